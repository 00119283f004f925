#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsu/scene.hpp"
#include "hsu/tensor.hpp"

namespace hsu {

struct ModelConfig {
    int embed_dim = 384;     // token embedding width
    int n_layers = 4;        // encoder depth
    int n_heads = 6;
    double mlp_ratio = 4.0;
    double dropout = 0.1;
    int vocab_size = 0;      // includes the PAD entry
    int n_room_classes = 0;
    int n_region_classes = 0;
    int max_objects = 0;     // object slots; the class token is extra
    bool use_position_embedding = true;
    bool normalize_distances = false; // divide d_i by the per-scene max

    int mlp_hidden() const { return static_cast<int>(embed_dim * mlp_ratio); }
    void validate() const;
};

std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

// Room logits from the class token, region logits per object slot.
struct Prediction {
    TensorPtr room_logits;   // [1, n_room_classes]
    TensorPtr region_logits; // [n_slots, n_region_classes]
    std::vector<char> mask;  // per object slot

    int room_argmax() const;
    std::vector<int> region_argmax() const; // kIgnoreTarget on padded slots
};

// Label -> embedding-vector table from an external text encoder; frozen,
// projected down to the model width by a learnable matrix.
struct ExternalEmbeddings {
    TensorPtr table;  // [vocab_size, source_dim], requires_grad = false
    int source_dim = 0;
};

ExternalEmbeddings load_external_label_embeddings(const std::string& path,
                                                  const LabelVocab& vocab);

class TbHsuModel {
public:
    TbHsuModel(ModelConfig cfg, std::uint64_t init_seed);
    // With external embeddings the semantic table is replaced by a frozen
    // table and a learnable projection to embed_dim.
    TbHsuModel(ModelConfig cfg, std::uint64_t init_seed, ExternalEmbeddings external);

    const ModelConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    // z0 = [class token ; semantic + position embeddings], one row per slot.
    TensorPtr embed(const TokenizedScene& tokens) const;
    // Pre-LN encoder stack followed by the output layer norm.
    TensorPtr encode(const TensorPtr& z0, const std::vector<char>& full_mask,
                     bool training = false, Rng* dropout_rng = nullptr) const;
    Prediction predict(const TensorPtr& y, const std::vector<char>& object_mask) const;
    Prediction forward(const TokenizedScene& tokens, bool training = false,
                       Rng* dropout_rng = nullptr) const;

    // [1 (class token), attention_mask...]
    static std::vector<char> full_mask(const TokenizedScene& tokens);

    static std::int64_t count_parameters(const ModelConfig& cfg);

private:
    void init_params(std::uint64_t seed);

    ModelConfig cfg_;
    ParamStore params_;
    std::optional<ExternalEmbeddings> external_;
};

// Per-token baseline with the same embeddings and heads but no attention:
// each block is linear -> QuickGELU -> linear -> LayerNorm -> dropout.
class MlpBaseline {
public:
    MlpBaseline(ModelConfig cfg, std::uint64_t init_seed);

    const ModelConfig& config() const { return cfg_; }
    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }

    Prediction forward(const TokenizedScene& tokens, bool training = false,
                       Rng* dropout_rng = nullptr) const;

private:
    ModelConfig cfg_;
    ParamStore params_;
};

} // namespace hsu
