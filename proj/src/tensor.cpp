#include "hsu/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

namespace hsu {

namespace {

TensorPtr make_node(std::vector<int> shape, std::vector<TensorPtr> parents) {
    auto t = Tensor::zeros(std::move(shape));
    for (const auto& p : parents)
        if (p->requires_grad)
            t->requires_grad = true;
    t->parents = std::move(parents);
    return t;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape != b->shape)
        throw ShapeError(std::string(op) + ": shape mismatch");
}

} // namespace

TensorPtr Tensor::zeros(std::vector<int> shape) {
    auto t = std::make_shared<Tensor>();
    std::int64_t n = 1;
    for (int d : shape) {
        if (d < 0)
            throw ShapeError("negative dimension");
        n *= d;
    }
    t->shape = std::move(shape);
    t->values.assign(static_cast<size_t>(n), 0.0);
    return t;
}

TensorPtr Tensor::from_values(std::vector<int> shape, std::vector<double> values) {
    auto t = zeros(std::move(shape));
    if (static_cast<std::int64_t>(values.size()) != t->size())
        throw ShapeError("from_values: element count does not match shape");
    for (double v : values)
        if (!std::isfinite(v))
            throw DomainError("from_values: non-finite value");
    t->values = std::move(values);
    return t;
}

double Tensor::item() const {
    if (size() != 1)
        throw ShapeError("item: tensor is not scalar");
    return values[0];
}

void backward(const TensorPtr& root) {
    if (root->size() != 1)
        throw ShapeError("backward: root must be scalar");

    // Iterative post-order DFS building a topological order.
    std::vector<Tensor*> topo;
    std::unordered_set<Tensor*> visited;
    std::vector<std::pair<Tensor*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Tensor* parent = node->parents[next].get();
            ++next;
            if (parent->requires_grad && !visited.count(parent)) {
                visited.insert(parent);
                stack.emplace_back(parent, 0);
            }
        } else {
            topo.push_back(node);
            stack.pop_back();
        }
    }

    for (Tensor* t : topo)
        t->ensure_grad();
    root->grad[0] = 1.0;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        if ((*it)->backward_fn && (*it)->requires_grad)
            (*it)->backward_fn();
    }
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(a, b, "add");
    auto out = make_node(a->shape, {a, b});
    for (size_t i = 0; i < out->values.size(); ++i)
        out->values[i] = a->values[i] + b->values[i];
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        Tensor* pb = b.get();
        out->backward_fn = [self, pa, pb] {
            if (pa->requires_grad) {
                pa->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i)
                    pa->grad[i] += self->grad[i];
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i)
                    pb->grad[i] += self->grad[i];
            }
        };
    }
    return out;
}

TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(a, b, "mul");
    auto out = make_node(a->shape, {a, b});
    for (size_t i = 0; i < out->values.size(); ++i)
        out->values[i] = a->values[i] * b->values[i];
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        Tensor* pb = b.get();
        out->backward_fn = [self, pa, pb] {
            if (pa->requires_grad) {
                pa->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i)
                    pa->grad[i] += self->grad[i] * pb->values[i];
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i)
                    pb->grad[i] += self->grad[i] * pa->values[i];
            }
        };
    }
    return out;
}

TensorPtr scale(const TensorPtr& a, double c) {
    auto out = make_node(a->shape, {a});
    for (size_t i = 0; i < out->values.size(); ++i)
        out->values[i] = a->values[i] * c;
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        out->backward_fn = [self, pa, c] {
            pa->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i)
                pa->grad[i] += self->grad[i] * c;
        };
    }
    return out;
}

TensorPtr sum(const TensorPtr& a) {
    auto out = make_node({1}, {a});
    double s = 0.0;
    for (double v : a->values)
        s += v;
    out->values[0] = s;
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        out->backward_fn = [self, pa] {
            pa->ensure_grad();
            for (size_t i = 0; i < pa->grad.size(); ++i)
                pa->grad[i] += self->grad[0];
        };
    }
    return out;
}

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
    if (a->shape.size() != 2 || b->shape.size() != 2 || a->shape[1] != b->shape[0])
        throw ShapeError("matmul: incompatible shapes");
    const int m = a->shape[0], k = a->shape[1], n = b->shape[1];
    auto out = make_node({m, n}, {a, b});
    const double* av = a->values.data();
    const double* bv = b->values.data();
    double* ov = out->values.data();
    for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
            const double aip = av[static_cast<size_t>(i) * k + p];
            const double* brow = bv + static_cast<size_t>(p) * n;
            double* orow = ov + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j)
                orow[j] += aip * brow[j];
        }
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        Tensor* pb = b.get();
        out->backward_fn = [self, pa, pb, m, k, n] {
            const double* g = self->grad.data();
            if (pa->requires_grad) {
                pa->ensure_grad();
                // dA = dC * B^T
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double gij = g[static_cast<size_t>(i) * n + j];
                        const double* brow = pb->values.data() + static_cast<size_t>(0) * n;
                        (void)brow;
                        for (int p = 0; p < k; ++p)
                            pa->grad[static_cast<size_t>(i) * k + p] +=
                                gij * pb->values[static_cast<size_t>(p) * n + j];
                    }
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                // dB = A^T * dC
                for (int p = 0; p < k; ++p)
                    for (int i = 0; i < m; ++i) {
                        const double aip = pa->values[static_cast<size_t>(i) * k + p];
                        const double* grow = g + static_cast<size_t>(i) * n;
                        double* brow = pb->grad.data() + static_cast<size_t>(p) * n;
                        for (int j = 0; j < n; ++j)
                            brow[j] += aip * grow[j];
                    }
            }
        };
    }
    return out;
}

TensorPtr matmul_nt(const TensorPtr& a, const TensorPtr& b) {
    if (a->shape.size() != 2 || b->shape.size() != 2 || a->shape[1] != b->shape[1])
        throw ShapeError("matmul_nt: incompatible shapes");
    const int m = a->shape[0], k = a->shape[1], n = b->shape[0];
    auto out = make_node({m, n}, {a, b});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            const double* arow = a->values.data() + static_cast<size_t>(i) * k;
            const double* brow = b->values.data() + static_cast<size_t>(j) * k;
            for (int p = 0; p < k; ++p)
                s += arow[p] * brow[p];
            out->values[static_cast<size_t>(i) * n + j] = s;
        }
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        Tensor* pb = b.get();
        out->backward_fn = [self, pa, pb, m, k, n] {
            const double* g = self->grad.data();
            if (pa->requires_grad) {
                pa->ensure_grad();
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double gij = g[static_cast<size_t>(i) * n + j];
                        const double* brow = pb->values.data() + static_cast<size_t>(j) * k;
                        double* arow = pa->grad.data() + static_cast<size_t>(i) * k;
                        for (int p = 0; p < k; ++p)
                            arow[p] += gij * brow[p];
                    }
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double gij = g[static_cast<size_t>(i) * n + j];
                        const double* arow = pa->values.data() + static_cast<size_t>(i) * k;
                        double* brow = pb->grad.data() + static_cast<size_t>(j) * k;
                        for (int p = 0; p < k; ++p)
                            brow[p] += gij * arow[p];
                    }
            }
        };
    }
    return out;
}

TensorPtr add_row_broadcast(const TensorPtr& a, const TensorPtr& bias) {
    if (a->shape.size() != 2 || bias->size() != a->shape[1])
        throw ShapeError("add_row_broadcast: bias length must equal column count");
    const int m = a->shape[0], n = a->shape[1];
    auto out = make_node(a->shape, {a, bias});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out->values[static_cast<size_t>(i) * n + j] =
                a->values[static_cast<size_t>(i) * n + j] + bias->values[static_cast<size_t>(j)];
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        Tensor* pb = bias.get();
        out->backward_fn = [self, pa, pb, m, n] {
            if (pa->requires_grad) {
                pa->ensure_grad();
                for (size_t i = 0; i < self->grad.size(); ++i)
                    pa->grad[i] += self->grad[i];
            }
            if (pb->requires_grad) {
                pb->ensure_grad();
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j)
                        pb->grad[static_cast<size_t>(j)] +=
                            self->grad[static_cast<size_t>(i) * n + j];
            }
        };
    }
    return out;
}

TensorPtr slice_cols(const TensorPtr& a, int c0, int c1) {
    if (a->shape.size() != 2 || c0 < 0 || c1 > a->shape[1] || c0 >= c1)
        throw ShapeError("slice_cols: invalid range");
    const int m = a->shape[0], n = a->shape[1], w = c1 - c0;
    auto out = make_node({m, w}, {a});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < w; ++j)
            out->values[static_cast<size_t>(i) * w + j] =
                a->values[static_cast<size_t>(i) * n + c0 + j];
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        out->backward_fn = [self, pa, m, n, w, c0] {
            pa->ensure_grad();
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < w; ++j)
                    pa->grad[static_cast<size_t>(i) * n + c0 + j] +=
                        self->grad[static_cast<size_t>(i) * w + j];
        };
    }
    return out;
}

TensorPtr concat_cols(const std::vector<TensorPtr>& parts) {
    if (parts.empty())
        throw ShapeError("concat_cols: no parts");
    const int m = parts[0]->shape[0];
    int n = 0;
    for (const auto& p : parts) {
        if (p->shape.size() != 2 || p->shape[0] != m)
            throw ShapeError("concat_cols: row count mismatch");
        n += p->shape[1];
    }
    auto out = make_node({m, n}, parts);
    int offset = 0;
    for (const auto& p : parts) {
        const int w = p->shape[1];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < w; ++j)
                out->values[static_cast<size_t>(i) * n + offset + j] =
                    p->values[static_cast<size_t>(i) * w + j];
        offset += w;
    }
    if (out->requires_grad) {
        Tensor* self = out.get();
        std::vector<Tensor*> raw;
        for (const auto& p : parts)
            raw.push_back(p.get());
        out->backward_fn = [self, raw, m, n] {
            int offset = 0;
            for (Tensor* p : raw) {
                const int w = p->shape[1];
                if (p->requires_grad) {
                    p->ensure_grad();
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < w; ++j)
                            p->grad[static_cast<size_t>(i) * w + j] +=
                                self->grad[static_cast<size_t>(i) * n + offset + j];
                }
                offset += w;
            }
        };
    }
    return out;
}

TensorPtr slice_rows(const TensorPtr& a, int r0, int r1) {
    if (a->shape.size() != 2 || r0 < 0 || r1 > a->shape[0] || r0 >= r1)
        throw ShapeError("slice_rows: invalid range");
    const int n = a->shape[1], h = r1 - r0;
    auto out = make_node({h, n}, {a});
    std::copy(a->values.begin() + static_cast<size_t>(r0) * n,
              a->values.begin() + static_cast<size_t>(r1) * n, out->values.begin());
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        out->backward_fn = [self, pa, n, h, r0] {
            pa->ensure_grad();
            for (size_t i = 0; i < static_cast<size_t>(h) * n; ++i)
                pa->grad[static_cast<size_t>(r0) * n + i] += self->grad[i];
        };
    }
    return out;
}

TensorPtr concat_rows(const std::vector<TensorPtr>& parts) {
    if (parts.empty())
        throw ShapeError("concat_rows: no parts");
    const int n = parts[0]->shape.size() == 2 ? parts[0]->shape[1] : 0;
    int m = 0;
    for (const auto& p : parts) {
        if (p->shape.size() != 2 || p->shape[1] != n)
            throw ShapeError("concat_rows: column count mismatch");
        m += p->shape[0];
    }
    auto out = make_node({m, n}, parts);
    size_t offset = 0;
    for (const auto& p : parts) {
        std::copy(p->values.begin(), p->values.end(), out->values.begin() + offset);
        offset += p->values.size();
    }
    if (out->requires_grad) {
        Tensor* self = out.get();
        std::vector<Tensor*> raw;
        for (const auto& p : parts)
            raw.push_back(p.get());
        out->backward_fn = [self, raw] {
            size_t offset = 0;
            for (Tensor* p : raw) {
                if (p->requires_grad) {
                    p->ensure_grad();
                    for (size_t i = 0; i < p->grad.size(); ++i)
                        p->grad[i] += self->grad[offset + i];
                }
                offset += p->values.size();
            }
        };
    }
    return out;
}

TensorPtr lookup_rows(const TensorPtr& table, const std::vector<int>& ids) {
    if (table->shape.size() != 2)
        throw ShapeError("lookup_rows: table must be 2-D");
    const int v = table->shape[0], d = table->shape[1];
    for (int id : ids)
        if (id < 0 || id >= v)
            throw DomainError("lookup_rows: index " + std::to_string(id) +
                              " out of vocabulary of size " + std::to_string(v));
    auto out = make_node({static_cast<int>(ids.size()), d}, {table});
    for (size_t i = 0; i < ids.size(); ++i)
        std::copy(table->values.begin() + static_cast<size_t>(ids[i]) * d,
                  table->values.begin() + static_cast<size_t>(ids[i] + 1) * d,
                  out->values.begin() + i * d);
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pt = table.get();
        out->backward_fn = [self, pt, ids, d] {
            pt->ensure_grad();
            for (size_t i = 0; i < ids.size(); ++i)
                for (int j = 0; j < d; ++j)
                    pt->grad[static_cast<size_t>(ids[i]) * d + j] +=
                        self->grad[i * d + j];
        };
    }
    return out;
}

TensorPtr quick_gelu(const TensorPtr& a) {
    auto out = make_node(a->shape, {a});
    for (size_t i = 0; i < out->values.size(); ++i) {
        double x = a->values[i];
        out->values[i] = x * sigmoid(1.702 * x);
    }
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        out->backward_fn = [self, pa] {
            pa->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i) {
                double x = pa->values[i];
                double s = sigmoid(1.702 * x);
                pa->grad[i] += self->grad[i] * (s + 1.702 * x * s * (1.0 - s));
            }
        };
    }
    return out;
}

TensorPtr layer_norm(const TensorPtr& a, const TensorPtr& gamma,
                     const TensorPtr& beta, double eps) {
    if (a->shape.size() != 2)
        throw ShapeError("layer_norm: input must be 2-D");
    const int m = a->shape[0], n = a->shape[1];
    if (gamma->size() != n || beta->size() != n)
        throw ShapeError("layer_norm: gamma/beta length must equal column count");
    auto out = make_node(a->shape, {a, gamma, beta});
    // Cached for backward: per-row inverse stddev and normalized values.
    auto inv_std = std::make_shared<std::vector<double>>(static_cast<size_t>(m));
    auto xhat = std::make_shared<std::vector<double>>(a->values.size());
    for (int i = 0; i < m; ++i) {
        const double* row = a->values.data() + static_cast<size_t>(i) * n;
        double mean = 0.0;
        for (int j = 0; j < n; ++j)
            mean += row[j];
        mean /= n;
        double var = 0.0;
        for (int j = 0; j < n; ++j)
            var += (row[j] - mean) * (row[j] - mean);
        var /= n;
        double is = 1.0 / std::sqrt(var + eps);
        (*inv_std)[static_cast<size_t>(i)] = is;
        for (int j = 0; j < n; ++j) {
            double xh = (row[j] - mean) * is;
            (*xhat)[static_cast<size_t>(i) * n + j] = xh;
            out->values[static_cast<size_t>(i) * n + j] =
                xh * gamma->values[static_cast<size_t>(j)] + beta->values[static_cast<size_t>(j)];
        }
    }
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        Tensor* pg = gamma.get();
        Tensor* pb = beta.get();
        out->backward_fn = [self, pa, pg, pb, inv_std, xhat, m, n] {
            for (int i = 0; i < m; ++i) {
                const double* g = self->grad.data() + static_cast<size_t>(i) * n;
                const double* xh = xhat->data() + static_cast<size_t>(i) * n;
                if (pg->requires_grad) {
                    pg->ensure_grad();
                    for (int j = 0; j < n; ++j)
                        pg->grad[static_cast<size_t>(j)] += g[j] * xh[j];
                }
                if (pb->requires_grad) {
                    pb->ensure_grad();
                    for (int j = 0; j < n; ++j)
                        pb->grad[static_cast<size_t>(j)] += g[j];
                }
                if (pa->requires_grad) {
                    pa->ensure_grad();
                    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                    for (int j = 0; j < n; ++j) {
                        double dxh = g[j] * pg->values[static_cast<size_t>(j)];
                        mean_dxhat += dxh;
                        mean_dxhat_xhat += dxh * xh[j];
                    }
                    mean_dxhat /= n;
                    mean_dxhat_xhat /= n;
                    const double is = (*inv_std)[static_cast<size_t>(i)];
                    for (int j = 0; j < n; ++j) {
                        double dxh = g[j] * pg->values[static_cast<size_t>(j)];
                        pa->grad[static_cast<size_t>(i) * n + j] +=
                            is * (dxh - mean_dxhat - xh[j] * mean_dxhat_xhat);
                    }
                }
            }
        };
    }
    return out;
}

TensorPtr masked_softmax_rows(const TensorPtr& a, const std::vector<char>& col_valid) {
    if (a->shape.size() != 2 || static_cast<int>(col_valid.size()) != a->shape[1])
        throw ShapeError("masked_softmax_rows: mask length must equal column count");
    const int m = a->shape[0], n = a->shape[1];
    auto out = make_node(a->shape, {a});
    for (int i = 0; i < m; ++i) {
        const double* row = a->values.data() + static_cast<size_t>(i) * n;
        double* orow = out->values.data() + static_cast<size_t>(i) * n;
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j)
            if (col_valid[static_cast<size_t>(j)] && row[j] > mx)
                mx = row[j];
        double denom = 0.0;
        for (int j = 0; j < n; ++j) {
            if (col_valid[static_cast<size_t>(j)]) {
                orow[j] = std::exp(row[j] - mx);
                denom += orow[j];
            } else {
                orow[j] = 0.0;
            }
        }
        if (denom > 0.0)
            for (int j = 0; j < n; ++j)
                orow[j] /= denom;
    }
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        out->backward_fn = [self, pa, col_valid, m, n] {
            pa->ensure_grad();
            for (int i = 0; i < m; ++i) {
                const double* s = self->values.data() + static_cast<size_t>(i) * n;
                const double* g = self->grad.data() + static_cast<size_t>(i) * n;
                double dot = 0.0;
                for (int j = 0; j < n; ++j)
                    if (col_valid[static_cast<size_t>(j)])
                        dot += s[j] * g[j];
                for (int j = 0; j < n; ++j)
                    if (col_valid[static_cast<size_t>(j)])
                        pa->grad[static_cast<size_t>(i) * n + j] += s[j] * (g[j] - dot);
            }
        };
    }
    return out;
}

TensorPtr dropout(const TensorPtr& a, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0)
        throw DomainError("dropout: rate must be in [0, 1)");
    if (rate == 0.0)
        return a;
    auto out = make_node(a->shape, {a});
    auto mask = std::make_shared<std::vector<double>>(a->values.size());
    const double keep = 1.0 - rate;
    for (size_t i = 0; i < a->values.size(); ++i) {
        (*mask)[i] = rng.uniform() < rate ? 0.0 : 1.0 / keep;
        out->values[i] = a->values[i] * (*mask)[i];
    }
    if (out->requires_grad) {
        Tensor* self = out.get();
        Tensor* pa = a.get();
        out->backward_fn = [self, pa, mask] {
            pa->ensure_grad();
            for (size_t i = 0; i < self->grad.size(); ++i)
                pa->grad[i] += self->grad[i] * (*mask)[i];
        };
    }
    return out;
}

TensorPtr cross_entropy_rows(const TensorPtr& logits, const std::vector<int>& targets,
                             const std::vector<char>& row_valid) {
    if (logits->shape.size() != 2)
        throw ShapeError("cross_entropy_rows: logits must be 2-D");
    const int m = logits->shape[0], k = logits->shape[1];
    if (static_cast<int>(targets.size()) != m || static_cast<int>(row_valid.size()) != m)
        throw ShapeError("cross_entropy_rows: target/mask length must equal row count");

    auto probs = std::make_shared<std::vector<double>>(logits->values.size(), 0.0);
    int n_valid = 0;
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
        if (!row_valid[static_cast<size_t>(i)] || targets[static_cast<size_t>(i)] < 0)
            continue;
        int target = targets[static_cast<size_t>(i)];
        if (target >= k)
            throw DomainError("cross_entropy_rows: target " + std::to_string(target) +
                              " out of range for " + std::to_string(k) + " classes");
        const double* row = logits->values.data() + static_cast<size_t>(i) * k;
        double mx = *std::max_element(row, row + k);
        double denom = 0.0;
        for (int j = 0; j < k; ++j)
            denom += std::exp(row[j] - mx);
        for (int j = 0; j < k; ++j)
            (*probs)[static_cast<size_t>(i) * k + j] = std::exp(row[j] - mx) / denom;
        total += std::log(denom) - (row[target] - mx);
        ++n_valid;
    }
    auto out = make_node({1}, {logits});
    out->values[0] = n_valid > 0 ? total / n_valid : 0.0;
    if (out->requires_grad && n_valid > 0) {
        Tensor* self = out.get();
        Tensor* pl = logits.get();
        out->backward_fn = [self, pl, probs, targets, row_valid, m, k, n_valid] {
            pl->ensure_grad();
            const double g = self->grad[0] / n_valid;
            for (int i = 0; i < m; ++i) {
                if (!row_valid[static_cast<size_t>(i)] || targets[static_cast<size_t>(i)] < 0)
                    continue;
                for (int j = 0; j < k; ++j) {
                    double p = (*probs)[static_cast<size_t>(i) * k + j];
                    double onehot = j == targets[static_cast<size_t>(i)] ? 1.0 : 0.0;
                    pl->grad[static_cast<size_t>(i) * k + j] += g * (p - onehot);
                }
            }
        };
    }
    return out;
}

TensorPtr multi_head_attention(const TensorPtr& x, const std::vector<char>& mask,
                               const AttentionParams& p, int n_heads) {
    if (x->shape.size() != 2)
        throw ShapeError("multi_head_attention: input must be 2-D");
    const int d = x->shape[1];
    if (d % n_heads != 0)
        throw ShapeError("multi_head_attention: width not divisible by head count");
    if (static_cast<int>(mask.size()) != x->shape[0])
        throw ShapeError("multi_head_attention: mask length must equal row count");
    const int dh = d / n_heads;

    auto q = add_row_broadcast(matmul(x, p.wq), p.bq);
    auto k = add_row_broadcast(matmul(x, p.wk), p.bk);
    auto v = add_row_broadcast(matmul(x, p.wv), p.bv);

    std::vector<TensorPtr> heads;
    heads.reserve(static_cast<size_t>(n_heads));
    for (int h = 0; h < n_heads; ++h) {
        auto qh = slice_cols(q, h * dh, (h + 1) * dh);
        auto kh = slice_cols(k, h * dh, (h + 1) * dh);
        auto vh = slice_cols(v, h * dh, (h + 1) * dh);
        auto scores = scale(matmul_nt(qh, kh), 1.0 / std::sqrt(static_cast<double>(dh)));
        auto weights = masked_softmax_rows(scores, mask);
        heads.push_back(matmul(weights, vh));
    }
    return add_row_broadcast(matmul(concat_cols(heads), p.wo), p.bo);
}

TensorPtr ParamStore::add(const std::string& name, TensorPtr t) {
    if (map_.count(name))
        throw DomainError("ParamStore: duplicate parameter '" + name + "'");
    t->requires_grad = true;
    names_.push_back(name);
    map_.emplace(name, t);
    return t;
}

const TensorPtr& ParamStore::get(const std::string& name) const {
    auto it = map_.find(name);
    if (it == map_.end())
        throw DomainError("ParamStore: unknown parameter '" + name + "'");
    return it->second;
}

void ParamStore::zero_grad() {
    for (const auto& name : names_)
        map_.at(name)->zero_grad();
}

std::int64_t ParamStore::total_scalars() const {
    std::int64_t n = 0;
    for (const auto& name : names_)
        n += map_.at(name)->size();
    return n;
}

namespace {
constexpr char kCheckpointMagic[8] = {'H', 'S', 'G', 'T', '0', '0', '0', '1'};
}

void ParamStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError("cannot write checkpoint: " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    std::uint64_t count = names_.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const auto& name : names_) {
        const auto& t = map_.at(name);
        std::uint32_t name_len = static_cast<std::uint32_t>(name.size());
        out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
        out.write(name.data(), name_len);
        std::uint32_t ndim = static_cast<std::uint32_t>(t->shape.size());
        out.write(reinterpret_cast<const char*>(&ndim), sizeof(ndim));
        for (int dim : t->shape) {
            std::uint64_t d = static_cast<std::uint64_t>(dim);
            out.write(reinterpret_cast<const char*>(&d), sizeof(d));
        }
        out.write(reinterpret_cast<const char*>(t->values.data()),
                  static_cast<std::streamsize>(t->values.size() * sizeof(double)));
    }
    if (!out)
        throw ParseError("failed writing checkpoint: " + path);
}

void ParamStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw ParseError("bad checkpoint magic in " + path);
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t name_len = 0;
        in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        std::uint32_t ndim = 0;
        in.read(reinterpret_cast<char*>(&ndim), sizeof(ndim));
        std::vector<int> shape;
        for (std::uint32_t j = 0; j < ndim; ++j) {
            std::uint64_t d = 0;
            in.read(reinterpret_cast<char*>(&d), sizeof(d));
            shape.push_back(static_cast<int>(d));
        }
        auto it = map_.find(name);
        if (it == map_.end())
            throw ParseError("checkpoint tensor '" + name + "' has no matching parameter");
        if (it->second->shape != shape)
            throw ShapeError("checkpoint tensor '" + name + "' shape mismatch");
        in.read(reinterpret_cast<char*>(it->second->values.data()),
                static_cast<std::streamsize>(it->second->values.size() * sizeof(double)));
        if (!in)
            throw ParseError("truncated checkpoint: " + path);
    }
}

std::vector<std::vector<double>> ParamStore::snapshot_values() const {
    std::vector<std::vector<double>> out;
    out.reserve(names_.size());
    for (const auto& name : names_)
        out.push_back(map_.at(name)->values);
    return out;
}

void ParamStore::restore_values(const std::vector<std::vector<double>>& values) {
    if (values.size() != names_.size())
        throw ShapeError("restore_values: snapshot size mismatch");
    for (size_t i = 0; i < names_.size(); ++i) {
        auto& t = map_.at(names_[i]);
        if (t->values.size() != values[i].size())
            throw ShapeError("restore_values: tensor size mismatch");
        t->values = values[i];
    }
}

GradCheckReport grad_check(const std::function<TensorPtr()>& loss_fn,
                           ParamStore& params, double h,
                           int max_coords_per_tensor, Rng& rng) {
    params.zero_grad();
    auto loss = loss_fn();
    backward(loss);

    std::unordered_map<std::string, std::vector<double>> analytic;
    for (const auto& name : params.names()) {
        auto& t = params.get(name);
        t->ensure_grad();
        analytic[name] = t->grad;
    }

    GradCheckReport report;
    for (const auto& name : params.names()) {
        auto& t = params.get(name);
        const std::int64_t n = t->size();
        std::vector<std::int64_t> coords;
        if (n <= max_coords_per_tensor) {
            for (std::int64_t i = 0; i < n; ++i)
                coords.push_back(i);
        } else {
            for (int i = 0; i < max_coords_per_tensor; ++i)
                coords.push_back(static_cast<std::int64_t>(rng.next_u64() % n));
        }
        for (std::int64_t c : coords) {
            const double old = t->values[static_cast<size_t>(c)];
            t->values[static_cast<size_t>(c)] = old + h;
            double f_plus = loss_fn()->item();
            t->values[static_cast<size_t>(c)] = old - h;
            double f_minus = loss_fn()->item();
            t->values[static_cast<size_t>(c)] = old;
            double fd = (f_plus - f_minus) / (2.0 * h);
            double an = analytic[name][static_cast<size_t>(c)];
            // The floor keeps near-zero gradients comparable on an absolute
            // scale; central differences carry ~1e-9 absolute noise at 64-bit,
            // so relative scales below 1e-4 would only measure that noise.
            double denom = std::max({std::abs(fd), std::abs(an), 1e-4});
            double rel = std::abs(fd - an) / denom;
            ++report.checked_coords;
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = name;
            }
        }
    }
    return report;
}

} // namespace hsu
