#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "projeq/errors.hpp"

namespace projeq::nn {

/// Dense real tensor, row-major.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }
};

std::size_t shape_size(const std::vector<std::size_t>& shape);

/// Keeps large freed buffers in the heap instead of returning them to the
/// OS, so per-step tensors do not page-fault on every allocation. No-op
/// outside glibc; safe to call repeatedly.
void retain_heap_memory();
std::string shape_string(const std::vector<std::size_t>& shape);

class Tape;

/// Handle to a value recorded on a tape.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;
    std::uint64_t generation = 0;

    const Tensor& value() const;
    const std::vector<std::size_t>& shape() const { return value().shape; }
};

/// Records forward values and backward closures for reverse accumulation.
class Tape {
public:
    /// Leaf that receives no gradient.
    Var constant(Tensor value);
    /// Leaf whose gradient is added into *grad by backward().
    Var param(const Tensor& value, Tensor* grad);

    /// Node computed from parents; back() reads grad(self) and adds into
    /// the parents' gradients. Skipped when no parent needs a gradient.
    Var push(Tensor value, const std::vector<Var>& parents, std::function<void(Tape&, std::size_t)> back);

    /// Reverse sweep from a scalar node. Throws for nodes of another tape or
    /// of a cleared generation.
    void backward(const Var& loss);

    /// Drops all nodes; outstanding Vars become invalid.
    void clear();

    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    const Tensor& value(const Var& v) const;
    /// Gradient buffer, allocated as zeros on first access.
    Tensor& grad(std::size_t id);
    bool needs_grad(const Var& v) const;
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&, std::size_t)> back;
        Tensor* external = nullptr;
        bool needs_grad = false;
    };
    void check(const Var& v) const;

    std::vector<Node> nodes_;
    std::uint64_t generation_ = 1;
};

// ---------------------------------------------------------------- elementwise
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
/// x[..., F] + b[F]
Var add_bias(const Var& x, const Var& b);
Var tanh(const Var& a);
/// tanh through exp with an odd series near zero; exactly odd.
double fast_tanh(double x);
/// Vectorized form of fast_tanh over n values.
void fast_tanh(const double* x, double* y, std::size_t n);
/// x Phi(x) with the exact error-function form.
Var gelu(const Var& a);
Var sigmoid(const Var& a);
Var sum(const Var& a);
Var mean(const Var& a);

// ---------------------------------------------------------------- shape
Var reshape(const Var& a, std::vector<std::size_t> shape);
/// Entries [begin, end) along axis.
Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end);
Var concat(const std::vector<Var>& parts, std::size_t axis);

// ---------------------------------------------------------------- linear
/// [m,k] x [k,n]
Var matmul(const Var& a, const Var& b);
/// out[p, ...] = sum_q m[p][q] a[q, ...] for a constant matrix m.
Var mix_leading(const Tensor& m, const Var& a);
/// theta [N,R], constant basis [G,R,S] -> [G,N,S]
Var basis_expand(const Var& theta, const Tensor& basis);
/// Per-slot 3x3 cross-correlation with zero padding 1.
/// x [G,C,B,H,W], k [G,O,C,3,3] -> [G,O,B,H,W]
Var slot_conv3x3(const Var& x, const Var& k);
/// Mean over the last two axes.
Var spatial_mean(const Var& x);
/// f [G,K,B], p [K,G] -> [B,K] with out[b][k] = sum_g p[k][g] f[g][k][b].
Var selector(const Var& f, const Var& p);
/// w [O,I], f [P,I,D] -> [P,O,D]
Var contract_mix(const Var& w, const Var& f);

/// One term of a sparse real trilinear form: out[r] += c a[s] b[t].
struct BilinearTerm {
    std::size_t r, s, t;
    double c;
};
/// One interacting pair: out[dst] += T(a[src], b[edge]).
struct PairIndex {
    std::size_t dst, src, edge;
};
/// a [P,O,Da], b [E,O,Db] -> [P,O,Dout]
Var pair_bilinear(const Var& a, const Var& b, const std::vector<PairIndex>& pairs,
                  const std::vector<BilinearTerm>& terms, std::size_t dout);
/// f [P,O,D] * g [P,O] broadcast over D.
Var gate_mul(const Var& f, const Var& g);
/// Mean over consecutive groups of m rows along axis 0.
Var group_mean(const Var& x, std::size_t m);

// ---------------------------------------------------------------- normalization and losses
struct BatchNormState {
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double momentum = 0.1;
    double eps = 1e-5;
};
/// x [B,F]; batch statistics with biased variance when training, running
/// statistics otherwise. Running variance is updated with the unbiased estimate.
Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state, bool training);
/// sum_b w[y_b] (-log softmax(x_b)[y_b]) / sum_b w[y_b]
Var weighted_softmax_xent(const Var& logits, const std::vector<int>& labels, const std::vector<double>& weights);
/// Batch mean of min(|p - t|, |p + t|) over rows of [B,D]; ties follow |p - t|.
Var spinor_sign_loss(const Var& pred, const Tensor& target);

// ---------------------------------------------------------------- parameters

/// Named parameter tensors with matching gradient buffers, in insertion order.
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor value;
        Tensor grad;
    };

    /// Throws InvariantError on a duplicate name.
    Tensor& add(const std::string& name, Tensor init);
    bool contains(const std::string& name) const { return index_.count(name) != 0; }
    Tensor& value(const std::string& name);
    const Tensor& value(const std::string& name) const;
    Tensor& grad(const std::string& name);
    /// Leaf on the tape whose gradient accumulates into grad(name).
    Var bind(Tape& tape, const std::string& name);
    void zero_grad();
    /// Total number of scalar entries over all parameters.
    std::size_t count() const;
    bool all_finite() const;

    std::deque<Entry>& entries() { return entries_; }
    const std::deque<Entry>& entries() const { return entries_; }

private:
    Entry& entry(const std::string& name);
    const Entry& entry(const std::string& name) const;

    std::deque<Entry> entries_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace projeq::nn
