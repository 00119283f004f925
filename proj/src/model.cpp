#include "hsu/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hsu {

namespace {

using ordered_json = nlohmann::ordered_json;

TensorPtr normal_init(std::vector<int> shape, Rng& rng, double stddev = 0.02) {
    auto t = Tensor::zeros(std::move(shape));
    for (auto& v : t->values)
        v = rng.normal(0.0, stddev);
    return t;
}

TensorPtr ones(std::vector<int> shape) {
    auto t = Tensor::zeros(std::move(shape));
    std::fill(t->values.begin(), t->values.end(), 1.0);
    return t;
}

// Distances as a [n_slots, 1] leaf, optionally normalized by the scene max.
TensorPtr distance_column(const TokenizedScene& tokens, bool normalize) {
    std::vector<double> d = tokens.distances;
    if (normalize) {
        double mx = 0.0;
        for (size_t i = 0; i < d.size(); ++i)
            if (tokens.attention_mask[i])
                mx = std::max(mx, d[i]);
        if (mx > 0.0)
            for (auto& v : d)
                v /= mx;
    }
    const int n = static_cast<int>(d.size());
    return Tensor::from_values({n, 1}, std::move(d));
}

// Shared token assembly: [class token ; semantic (+ position) embeddings].
TensorPtr build_z0(const ParamStore& params, const ModelConfig& cfg,
                   const TokenizedScene& tokens,
                   const ExternalEmbeddings* external) {
    TensorPtr sem;
    if (external) {
        sem = matmul(lookup_rows(external->table, tokens.token_ids),
                     params.get("embed.proj"));
    } else {
        sem = lookup_rows(params.get("embed.semantic_table"), tokens.token_ids);
    }
    TensorPtr tok = sem;
    if (cfg.use_position_embedding) {
        auto pos = add_row_broadcast(
            matmul(distance_column(tokens, cfg.normalize_distances),
                   params.get("embed.pos_weight")),
            params.get("embed.pos_bias"));
        tok = add(sem, pos);
    }
    return concat_rows({params.get("embed.class_token"), tok});
}

void init_embedding_params(ParamStore& params, const ModelConfig& cfg, Rng& rng,
                           bool external) {
    // With external embeddings the caller adds the projection matrix instead;
    // only it knows the source dimension.
    if (!external)
        params.add("embed.semantic_table",
                   normal_init({cfg.vocab_size, cfg.embed_dim}, rng));
    if (cfg.use_position_embedding) {
        params.add("embed.pos_weight", normal_init({1, cfg.embed_dim}, rng));
        params.add("embed.pos_bias", Tensor::zeros({cfg.embed_dim}));
    }
    params.add("embed.class_token", normal_init({1, cfg.embed_dim}, rng));
}

void init_head_params(ParamStore& params, const ModelConfig& cfg, Rng& rng) {
    params.add("head.room.w", normal_init({cfg.embed_dim, cfg.n_room_classes}, rng));
    params.add("head.room.b", Tensor::zeros({cfg.n_room_classes}));
    params.add("head.region.w", normal_init({cfg.embed_dim, cfg.n_region_classes}, rng));
    params.add("head.region.b", Tensor::zeros({cfg.n_region_classes}));
}

Prediction make_prediction(const ParamStore& params, const TensorPtr& y,
                           const std::vector<char>& object_mask) {
    int n_slots = y->shape[0] - 1;
    Prediction pred;
    pred.room_logits = add_row_broadcast(
        matmul(slice_rows(y, 0, 1), params.get("head.room.w")), params.get("head.room.b"));
    pred.region_logits = add_row_broadcast(
        matmul(slice_rows(y, 1, 1 + n_slots), params.get("head.region.w")),
        params.get("head.region.b"));
    pred.mask = object_mask;
    return pred;
}

} // namespace

void ModelConfig::validate() const {
    if (embed_dim <= 0 || n_heads <= 0 || embed_dim % n_heads != 0)
        throw ShapeError("model config: embed_dim must be a positive multiple of n_heads");
    if (n_layers < 0 || mlp_ratio <= 0.0)
        throw DomainError("model config: invalid depth or mlp_ratio");
    if (vocab_size <= 0 || n_room_classes <= 0 || n_region_classes <= 0 || max_objects <= 0)
        throw DomainError("model config: all counts must be positive");
    if (dropout < 0.0 || dropout >= 1.0)
        throw DomainError("model config: dropout must be in [0, 1)");
}

std::string model_config_to_json(const ModelConfig& cfg) {
    ordered_json j;
    j["embed_dim"] = cfg.embed_dim;
    j["n_layers"] = cfg.n_layers;
    j["n_heads"] = cfg.n_heads;
    j["mlp_ratio"] = cfg.mlp_ratio;
    j["dropout"] = cfg.dropout;
    j["vocab_size"] = cfg.vocab_size;
    j["n_room_classes"] = cfg.n_room_classes;
    j["n_region_classes"] = cfg.n_region_classes;
    j["max_objects"] = cfg.max_objects;
    j["use_position_embedding"] = cfg.use_position_embedding;
    j["normalize_distances"] = cfg.normalize_distances;
    return j.dump(2);
}

ModelConfig model_config_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model config JSON: ") + e.what());
    }
    ModelConfig cfg;
    auto pick = [&](const char* key, auto& field) {
        if (j.contains(key))
            field = j[key].get<std::decay_t<decltype(field)>>();
    };
    pick("embed_dim", cfg.embed_dim);
    pick("n_layers", cfg.n_layers);
    pick("n_heads", cfg.n_heads);
    pick("mlp_ratio", cfg.mlp_ratio);
    pick("dropout", cfg.dropout);
    pick("vocab_size", cfg.vocab_size);
    pick("n_room_classes", cfg.n_room_classes);
    pick("n_region_classes", cfg.n_region_classes);
    pick("max_objects", cfg.max_objects);
    pick("use_position_embedding", cfg.use_position_embedding);
    pick("normalize_distances", cfg.normalize_distances);
    return cfg;
}

int Prediction::room_argmax() const {
    const auto& v = room_logits->values;
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::vector<int> Prediction::region_argmax() const {
    const int n = region_logits->shape[0];
    const int k = region_logits->shape[1];
    std::vector<int> out(static_cast<size_t>(n), TokenizedScene::kIgnoreTarget);
    for (int i = 0; i < n; ++i) {
        if (!mask[static_cast<size_t>(i)])
            continue;
        const double* row = region_logits->values.data() + static_cast<size_t>(i) * k;
        out[static_cast<size_t>(i)] =
            static_cast<int>(std::max_element(row, row + k) - row);
    }
    return out;
}

ExternalEmbeddings load_external_label_embeddings(const std::string& path,
                                                  const LabelVocab& vocab) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open embedding file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    ordered_json j;
    try {
        j = ordered_json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("embedding JSON: ") + e.what());
    }

    ExternalEmbeddings ext;
    for (int i = 0; i < vocab.size(); ++i) {
        const std::string& label = vocab.label_of(i);
        if (i == vocab.pad_index())
            continue; // PAD gets a zero vector
        if (!j.contains(label))
            throw DomainError("embedding file is missing label '" + label + "'");
        int dim = static_cast<int>(j[label].size());
        if (ext.source_dim == 0)
            ext.source_dim = dim;
        else if (dim != ext.source_dim)
            throw ShapeError("embedding for '" + label + "' has dimension " +
                             std::to_string(dim) + ", expected " +
                             std::to_string(ext.source_dim));
    }
    if (ext.source_dim == 0)
        throw DomainError("embedding file provides no usable vectors");

    ext.table = Tensor::zeros({vocab.size(), ext.source_dim});
    for (int i = 0; i < vocab.size(); ++i) {
        if (i == vocab.pad_index())
            continue;
        const auto& vec = j[vocab.label_of(i)];
        for (int c = 0; c < ext.source_dim; ++c)
            ext.table->values[static_cast<size_t>(i) * ext.source_dim + c] =
                vec[static_cast<size_t>(c)].get<double>();
    }
    return ext;
}

TbHsuModel::TbHsuModel(ModelConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    init_params(init_seed);
}

TbHsuModel::TbHsuModel(ModelConfig cfg, std::uint64_t init_seed, ExternalEmbeddings external)
    : cfg_(std::move(cfg)), external_(std::move(external)) {
    cfg_.validate();
    if (external_->table->shape[0] != cfg_.vocab_size)
        throw ShapeError("external embedding table row count does not match vocab");
    init_params(init_seed);
}

void TbHsuModel::init_params(std::uint64_t seed) {
    Rng rng(seed ^ 0x7b5d4f3e2a190807ull);
    const int d = cfg_.embed_dim;
    const int h = cfg_.mlp_hidden();

    init_embedding_params(params_, cfg_, rng, external_.has_value());
    if (external_)
        params_.add("embed.proj", normal_init({external_->source_dim, d}, rng));

    for (int l = 0; l < cfg_.n_layers; ++l) {
        std::string p = "enc.l" + std::to_string(l) + ".";
        params_.add(p + "ln1.gamma", ones({d}));
        params_.add(p + "ln1.beta", Tensor::zeros({d}));
        for (const char* w : {"wq", "wk", "wv", "wo"})
            params_.add(p + "attn." + w, normal_init({d, d}, rng));
        for (const char* b : {"bq", "bk", "bv", "bo"})
            params_.add(p + "attn." + b, Tensor::zeros({d}));
        params_.add(p + "ln2.gamma", ones({d}));
        params_.add(p + "ln2.beta", Tensor::zeros({d}));
        params_.add(p + "mlp.w1", normal_init({d, h}, rng));
        params_.add(p + "mlp.b1", Tensor::zeros({h}));
        params_.add(p + "mlp.w2", normal_init({h, d}, rng));
        params_.add(p + "mlp.b2", Tensor::zeros({d}));
    }
    params_.add("final_ln.gamma", ones({d}));
    params_.add("final_ln.beta", Tensor::zeros({d}));
    init_head_params(params_, cfg_, rng);
}

std::vector<char> TbHsuModel::full_mask(const TokenizedScene& tokens) {
    std::vector<char> mask;
    mask.reserve(tokens.attention_mask.size() + 1);
    mask.push_back(1); // class token is always attendable
    mask.insert(mask.end(), tokens.attention_mask.begin(), tokens.attention_mask.end());
    return mask;
}

TensorPtr TbHsuModel::embed(const TokenizedScene& tokens) const {
    return build_z0(params_, cfg_, tokens,
                    external_ ? &external_.value() : nullptr);
}

TensorPtr TbHsuModel::encode(const TensorPtr& z0, const std::vector<char>& mask,
                             bool training, Rng* dropout_rng) const {
    constexpr double kEps = 1e-5;
    const bool use_dropout = training && cfg_.dropout > 0.0 && dropout_rng != nullptr;
    TensorPtr x = z0;
    for (int l = 0; l < cfg_.n_layers; ++l) {
        std::string p = "enc.l" + std::to_string(l) + ".";
        AttentionParams attn{
            params_.get(p + "attn.wq"), params_.get(p + "attn.bq"),
            params_.get(p + "attn.wk"), params_.get(p + "attn.bk"),
            params_.get(p + "attn.wv"), params_.get(p + "attn.bv"),
            params_.get(p + "attn.wo"), params_.get(p + "attn.bo")};
        auto normed = layer_norm(x, params_.get(p + "ln1.gamma"),
                                 params_.get(p + "ln1.beta"), kEps);
        x = add(multi_head_attention(normed, mask, attn, cfg_.n_heads), x);

        auto h = layer_norm(x, params_.get(p + "ln2.gamma"),
                            params_.get(p + "ln2.beta"), kEps);
        h = quick_gelu(add_row_broadcast(matmul(h, params_.get(p + "mlp.w1")),
                                         params_.get(p + "mlp.b1")));
        if (use_dropout)
            h = dropout(h, cfg_.dropout, *dropout_rng);
        h = add_row_broadcast(matmul(h, params_.get(p + "mlp.w2")),
                              params_.get(p + "mlp.b2"));
        if (use_dropout)
            h = dropout(h, cfg_.dropout, *dropout_rng);
        x = add(h, x);
    }
    return layer_norm(x, params_.get("final_ln.gamma"), params_.get("final_ln.beta"),
                      kEps);
}

Prediction TbHsuModel::predict(const TensorPtr& y,
                               const std::vector<char>& object_mask) const {
    return make_prediction(params_, y, object_mask);
}

Prediction TbHsuModel::forward(const TokenizedScene& tokens, bool training,
                               Rng* dropout_rng) const {
    auto z0 = embed(tokens);
    auto y = encode(z0, full_mask(tokens), training, dropout_rng);
    return predict(y, tokens.attention_mask);
}

std::int64_t TbHsuModel::count_parameters(const ModelConfig& cfg) {
    const std::int64_t d = cfg.embed_dim;
    const std::int64_t h = cfg.mlp_hidden();
    std::int64_t total = 0;
    total += static_cast<std::int64_t>(cfg.vocab_size) * d; // semantic table
    if (cfg.use_position_embedding)
        total += d + d; // pos_weight + pos_bias
    total += d;         // class token
    // ln1 + attention + ln2 + mlp, per layer
    const std::int64_t per_layer =
        2 * d + 4 * (d * d + d) + 2 * d + (d * h + h) + (h * d + d);
    total += cfg.n_layers * per_layer;
    total += 2 * d; // final LN
    total += d * cfg.n_room_classes + cfg.n_room_classes;
    total += d * cfg.n_region_classes + cfg.n_region_classes;
    return total;
}

MlpBaseline::MlpBaseline(ModelConfig cfg, std::uint64_t init_seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    Rng rng(init_seed ^ 0x3c9a1f5e7d2b6048ull);
    const int d = cfg_.embed_dim;
    const int h = cfg_.mlp_hidden();
    init_embedding_params(params_, cfg_, rng, false);
    for (int l = 0; l < cfg_.n_layers; ++l) {
        std::string p = "blk" + std::to_string(l) + ".";
        params_.add(p + "w1", normal_init({d, h}, rng));
        params_.add(p + "b1", Tensor::zeros({h}));
        params_.add(p + "w2", normal_init({h, d}, rng));
        params_.add(p + "b2", Tensor::zeros({d}));
        params_.add(p + "ln.gamma", ones({d}));
        params_.add(p + "ln.beta", Tensor::zeros({d}));
    }
    init_head_params(params_, cfg_, rng);
}

Prediction MlpBaseline::forward(const TokenizedScene& tokens, bool training,
                                Rng* dropout_rng) const {
    constexpr double kEps = 1e-5;
    const bool use_dropout = training && cfg_.dropout > 0.0 && dropout_rng != nullptr;
    TensorPtr x = build_z0(params_, cfg_, tokens, nullptr);
    for (int l = 0; l < cfg_.n_layers; ++l) {
        std::string p = "blk" + std::to_string(l) + ".";
        x = quick_gelu(add_row_broadcast(matmul(x, params_.get(p + "w1")),
                                         params_.get(p + "b1")));
        x = add_row_broadcast(matmul(x, params_.get(p + "w2")), params_.get(p + "b2"));
        x = layer_norm(x, params_.get(p + "ln.gamma"), params_.get(p + "ln.beta"), kEps);
        if (use_dropout)
            x = dropout(x, cfg_.dropout, *dropout_rng);
    }
    return make_prediction(params_, x, tokens.attention_mask);
}

} // namespace hsu
