#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "hsu/error.hpp"
#include "hsu/rng.hpp"

namespace hsu {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense row-major 64-bit float tensor participating in a reverse-mode tape.
// Each op allocates a fresh output node holding its parents and a closure
// that scatters the output gradient back into them.
class Tensor {
public:
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad; // sized lazily by ensure_grad()
    bool requires_grad = false;

    std::vector<TensorPtr> parents;
    std::function<void()> backward_fn;

    static TensorPtr zeros(std::vector<int> shape);
    static TensorPtr from_values(std::vector<int> shape, std::vector<double> values);
    static TensorPtr scalar(double v) { return from_values({1}, {v}); }

    std::int64_t size() const {
        std::int64_t n = 1;
        for (int d : shape)
            n *= d;
        return n;
    }
    int rows() const { return shape.empty() ? 1 : shape[0]; }
    int cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& at(int r, int c) { return values[static_cast<size_t>(r) * cols() + c]; }
    double at(int r, int c) const { return values[static_cast<size_t>(r) * cols() + c]; }
    double item() const;

    void ensure_grad() {
        if (grad.empty())
            grad.assign(values.size(), 0.0);
    }
    void zero_grad() { grad.assign(values.size(), 0.0); }
};

// Runs reverse-mode accumulation from a scalar root; seeds d(root)/d(root)=1.
void backward(const TensorPtr& root);

// ---- differentiable ops -------------------------------------------------

TensorPtr add(const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(const TensorPtr& a, const TensorPtr& b); // elementwise
TensorPtr scale(const TensorPtr& a, double c);
TensorPtr sum(const TensorPtr& a); // -> scalar
TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);      // [m,k]x[k,n]
TensorPtr matmul_nt(const TensorPtr& a, const TensorPtr& b);   // [m,k]x[n,k]^T
TensorPtr add_row_broadcast(const TensorPtr& a, const TensorPtr& bias); // bias over rows
TensorPtr slice_cols(const TensorPtr& a, int c0, int c1);
TensorPtr concat_cols(const std::vector<TensorPtr>& parts);
TensorPtr slice_rows(const TensorPtr& a, int r0, int r1);
TensorPtr concat_rows(const std::vector<TensorPtr>& parts);
TensorPtr lookup_rows(const TensorPtr& table, const std::vector<int>& ids);
TensorPtr quick_gelu(const TensorPtr& a); // x * sigmoid(1.702 x)
TensorPtr layer_norm(const TensorPtr& a, const TensorPtr& gamma,
                     const TensorPtr& beta, double eps);
// Per-row softmax over columns flagged valid; invalid columns produce 0.
TensorPtr masked_softmax_rows(const TensorPtr& a, const std::vector<char>& col_valid);
// Inverted-dropout; rate 0 is the identity. The mask comes from `rng`.
TensorPtr dropout(const TensorPtr& a, double rate, Rng& rng);
// Mean of -log softmax(logits_row)[target] over rows where row_valid is set.
// Rows with target < 0 or row_valid unset are skipped. Zero valid rows -> 0.
TensorPtr cross_entropy_rows(const TensorPtr& logits, const std::vector<int>& targets,
                             const std::vector<char>& row_valid);

// Scaled dot-product attention over all heads with padded keys masked out.
struct AttentionParams {
    TensorPtr wq, bq, wk, bk, wv, bv, wo, bo;
};
TensorPtr multi_head_attention(const TensorPtr& x, const std::vector<char>& mask,
                               const AttentionParams& p, int n_heads);

// ---- parameters ---------------------------------------------------------

// Named parameter tensors with stable iteration order.
class ParamStore {
public:
    TensorPtr add(const std::string& name, TensorPtr t);
    const TensorPtr& get(const std::string& name) const;
    bool contains(const std::string& name) const { return map_.count(name) > 0; }
    const std::vector<std::string>& names() const { return names_; }
    void zero_grad();
    std::int64_t total_scalars() const;

    void save(const std::string& path) const;
    // Replaces values of existing parameters; shapes must match.
    void load(const std::string& path);

    // Deep copies of all parameter values, for best-checkpoint bookkeeping.
    std::vector<std::vector<double>> snapshot_values() const;
    void restore_values(const std::vector<std::vector<double>>& values);

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, TensorPtr> map_;
};

// ---- gradient verification ----------------------------------------------

struct GradCheckReport {
    double max_rel_error = 0.0;
    int checked_coords = 0;
    std::string worst_param;
};

// Central finite differences against reverse-mode gradients. `loss_fn` must
// rebuild the graph from current parameter values on every call and be
// deterministic (dropout off). Coordinates are sampled per tensor up to
// `max_coords_per_tensor`.
GradCheckReport grad_check(const std::function<TensorPtr()>& loss_fn,
                           ParamStore& params, double h,
                           int max_coords_per_tensor, Rng& rng);

} // namespace hsu
