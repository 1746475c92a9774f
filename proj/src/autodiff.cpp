#include "projeq/autodiff.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace projeq::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using MapM = Eigen::Map<RowMat>;

void require(bool ok, const std::string& msg) {
    if (!ok) throw DimensionError(msg);
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
    require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                                        shape_string(b.shape()));
}

/// (outer, axis, inner) split of a shape around one axis.
struct AxisSplit {
    std::size_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const std::vector<std::size_t>& shape, std::size_t axis) {
    AxisSplit s;
    for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
    s.len = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
    return s;
}

template <class F, class D>
Var unary(const Var& a, F f, D df) {
    const Tensor& x = a.value();
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = f(x.data[i]);
    const std::size_t ia = a.id;
    return a.tape->push(std::move(y), {a}, [ia, df](Tape& t, std::size_t self) {
        const Tensor& x = t.value(ia);
        const Tensor& y = t.value(self);
        const Tensor& gy = t.grad(self);
        Tensor& gx = t.grad(ia);
        for (std::size_t i = 0; i < x.size(); ++i) gx.data[i] += gy.data[i] * df(x.data[i], y.data[i]);
    });
}

}  // namespace

// ---------------------------------------------------------------- tensors and tape

void retain_heap_memory() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

std::size_t shape_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
}

Tensor::Tensor(std::vector<std::size_t> shp, double fill) : shape(std::move(shp)), data(shape_size(shape), fill) {}

Tensor::Tensor(std::vector<std::size_t> shp, std::vector<double> d) : shape(std::move(shp)), data(std::move(d)) {
    require(data.size() == shape_size(shape), "Tensor: data length does not match shape");
}

const Tensor& Var::value() const {
    if (tape == nullptr) throw Error("Var: not attached to a tape");
    return tape->value(*this);
}

void Tape::check(const Var& v) const {
    if (v.tape != this || v.generation != generation_ || v.id >= nodes_.size())
        throw Error("Tape: value is not recorded on this tape (un-taped or cleared graph)");
}

const Tensor& Tape::value(const Var& v) const {
    check(v);
    return nodes_[v.id].value;
}

bool Tape::needs_grad(const Var& v) const {
    check(v);
    return nodes_[v.id].needs_grad;
}

Tensor& Tape::grad(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.data.empty() && !n.value.data.empty()) n.grad = Tensor(n.value.shape);
    if (n.grad.shape != n.value.shape) n.grad = Tensor(n.value.shape);
    return n.grad;
}

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, nullptr, nullptr, false});
    return Var{this, nodes_.size() - 1, generation_};
}

Var Tape::param(const Tensor& value, Tensor* grad) {
    if (grad != nullptr && grad->shape != value.shape) throw DimensionError("Tape::param: gradient shape mismatch");
    nodes_.push_back(Node{value, {}, nullptr, grad, grad != nullptr});
    return Var{this, nodes_.size() - 1, generation_};
}

Var Tape::push(Tensor value, const std::vector<Var>& parents, std::function<void(Tape&, std::size_t)> back) {
    bool needs = false;
    for (const Var& p : parents) {
        check(p);
        needs = needs || nodes_[p.id].needs_grad;
    }
    nodes_.push_back(Node{std::move(value), {}, needs ? std::move(back) : nullptr, nullptr, needs});
    return Var{this, nodes_.size() - 1, generation_};
}

void Tape::backward(const Var& loss) {
    check(loss);
    if (nodes_[loss.id].value.size() != 1) throw DimensionError("Tape::backward: loss must be a scalar");
    grad(loss.id).data[0] += 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.needs_grad || n.grad.data.empty()) continue;
        if (n.back) n.back(*this, i);
        if (n.external != nullptr)
            for (std::size_t k = 0; k < n.grad.size(); ++k) n.external->data[k] += n.grad.data[k];
    }
}

void Tape::clear() {
    nodes_.clear();
    ++generation_;
}

// ---------------------------------------------------------------- elementwise

Var add(const Var& a, const Var& b) {
    require_same_shape(a, b, "add");
    Tensor y = a.value();
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += b.value().data[i];
    const std::size_t ia = a.id, ib = b.id;
    return a.tape->push(std::move(y), {a, b}, [ia, ib](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        Tensor& ga = t.grad(ia);
        for (std::size_t i = 0; i < gy.size(); ++i) ga.data[i] += gy.data[i];
        Tensor& gb = t.grad(ib);
        for (std::size_t i = 0; i < gy.size(); ++i) gb.data[i] += gy.data[i];
    });
}

Var sub(const Var& a, const Var& b) { return add(a, scale(b, -1.0)); }

Var mul(const Var& a, const Var& b) {
    require_same_shape(a, b, "mul");
    Tensor y = a.value();
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= b.value().data[i];
    const std::size_t ia = a.id, ib = b.id;
    return a.tape->push(std::move(y), {a, b}, [ia, ib](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        const Tensor& va = t.value(ia);
        const Tensor& vb = t.value(ib);
        Tensor& ga = t.grad(ia);
        for (std::size_t i = 0; i < gy.size(); ++i) ga.data[i] += gy.data[i] * vb.data[i];
        Tensor& gb = t.grad(ib);
        for (std::size_t i = 0; i < gy.size(); ++i) gb.data[i] += gy.data[i] * va.data[i];
    });
}

Var scale(const Var& a, double s) {
    Tensor y = a.value();
    for (double& x : y.data) x *= s;
    const std::size_t ia = a.id;
    return a.tape->push(std::move(y), {a}, [ia, s](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        Tensor& ga = t.grad(ia);
        for (std::size_t i = 0; i < gy.size(); ++i) ga.data[i] += s * gy.data[i];
    });
}

Var add_bias(const Var& x, const Var& b) {
    const Tensor& xv = x.value();
    const Tensor& bv = b.value();
    require(bv.rank() == 1 && xv.rank() >= 1 && xv.shape.back() == bv.size(), "add_bias: bias length mismatch");
    const std::size_t f = bv.size();
    Tensor y = xv;
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += bv.data[i % f];
    const std::size_t ix = x.id, ib = b.id;
    return x.tape->push(std::move(y), {x, b}, [ix, ib, f](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        Tensor& gx = t.grad(ix);
        for (std::size_t i = 0; i < gy.size(); ++i) gx.data[i] += gy.data[i];
        Tensor& gb = t.grad(ib);
        for (std::size_t i = 0; i < gy.size(); ++i) gb.data[i % f] += gy.data[i];
    });
}

namespace {

constexpr double kTanhSeriesCut = 0.02;

/// Odd series, used below kTanhSeriesCut where 1 - e^{-2a} would cancel.
inline double tanh_series(double a) {
    const double a2 = a * a;
    return a * (1.0 + a2 * (-1.0 / 3.0 + a2 * (2.0 / 15.0 + a2 * (-17.0 / 315.0))));
}

}  // namespace

double fast_tanh(double x) {
    const double a = std::abs(x);
    const double e = std::exp(-2.0 * a);
    return std::copysign(a < kTanhSeriesCut ? tanh_series(a) : (1.0 - e) / (1.0 + e), x);
}

void fast_tanh(const double* x, double* y, std::size_t n) {
    using Block = Eigen::Array<double, Eigen::Dynamic, 1, 0, 256, 1>;
    for (std::size_t i0 = 0; i0 < n; i0 += 256) {
        const Eigen::Index m = static_cast<Eigen::Index>(std::min<std::size_t>(256, n - i0));
        Eigen::Map<const Block> xs(x + i0, m);
        const Block a = xs.abs();
        const Block e = (-2.0 * a).exp();
        const Block a2 = a * a;
        const Block series = a * (1.0 + a2 * (-1.0 / 3.0 + a2 * (2.0 / 15.0 + a2 * (-17.0 / 315.0))));
        Eigen::Map<Block>(y + i0, m) = (a < kTanhSeriesCut).select(series, (1.0 - e) / (1.0 + e));
        for (Eigen::Index i = 0; i < m; ++i) y[i0 + i] = std::copysign(y[i0 + i], x[i0 + i]);
    }
}

Var tanh(const Var& a) {
    const Tensor& x = a.value();
    Tensor y(x.shape);
    fast_tanh(x.data.data(), y.data.data(), x.size());
    const std::size_t ia = a.id;
    return a.tape->push(std::move(y), {a}, [ia](Tape& t, std::size_t self) {
        const Tensor& y = t.value(self);
        const Tensor& gy = t.grad(self);
        Tensor& gx = t.grad(ia);
        for (std::size_t i = 0; i < y.size(); ++i) gx.data[i] += gy.data[i] * (1.0 - y.data[i] * y.data[i]);
    });
}

Var gelu(const Var& a) {
    return unary(
        a, [](double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); },
        [](double x, double) {
            const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
            const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
            return cdf + x * pdf;
        });
}

Var sigmoid(const Var& a) {
    return unary(
        a,
        [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
        [](double, double y) { return y * (1.0 - y); });
}

Var sum(const Var& a) {
    double s = 0.0;
    for (double x : a.value().data) s += x;
    const std::size_t ia = a.id;
    return a.tape->push(Tensor({1}, {s}), {a}, [ia](Tape& t, std::size_t self) {
        const double g = t.grad(self).data[0];
        for (double& x : t.grad(ia).data) x += g;
    });
}

Var mean(const Var& a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

// ---------------------------------------------------------------- shape

Var reshape(const Var& a, std::vector<std::size_t> shape) {
    require(shape_size(shape) == a.value().size(), "reshape: element count changes");
    Tensor y(std::move(shape), a.value().data);
    const std::size_t ia = a.id;
    return a.tape->push(std::move(y), {a}, [ia](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        Tensor& ga = t.grad(ia);
        for (std::size_t i = 0; i < gy.size(); ++i) ga.data[i] += gy.data[i];
    });
}

Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end) {
    const Tensor& x = a.value();
    require(axis < x.rank() && begin <= end && end <= x.shape[axis], "slice: range out of bounds");
    const AxisSplit s = split_axis(x.shape, axis);
    std::vector<std::size_t> shape = x.shape;
    shape[axis] = end - begin;
    Tensor y(shape);
    const std::size_t w = end - begin;
    for (std::size_t o = 0; o < s.outer; ++o)
        std::copy_n(&x.data[(o * s.len + begin) * s.inner], w * s.inner, &y.data[o * w * s.inner]);
    const std::size_t ia = a.id;
    return a.tape->push(std::move(y), {a}, [ia, s, begin, w](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        Tensor& ga = t.grad(ia);
        for (std::size_t o = 0; o < s.outer; ++o)
            for (std::size_t k = 0; k < w * s.inner; ++k)
                ga.data[(o * s.len + begin) * s.inner + k] += gy.data[o * w * s.inner + k];
    });
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
    require(!parts.empty(), "concat: no inputs");
    std::vector<std::size_t> shape = parts[0].shape();
    require(axis < shape.size(), "concat: axis out of range");
    std::size_t total = 0;
    for (const Var& p : parts) {
        auto s = p.shape();
        require(s.size() == shape.size(), "concat: rank mismatch");
        for (std::size_t i = 0; i < s.size(); ++i)
            require(i == axis || s[i] == shape[i], "concat: shape mismatch off the concat axis");
        total += s[axis];
    }
    shape[axis] = total;
    Tensor y(shape);
    const AxisSplit ys = split_axis(shape, axis);
    std::vector<std::size_t> ids, offsets, lens;
    std::size_t off = 0;
    for (const Var& p : parts) {
        const Tensor& x = p.value();
        const std::size_t len = x.shape[axis];
        for (std::size_t o = 0; o < ys.outer; ++o)
            std::copy_n(&x.data[o * len * ys.inner], len * ys.inner, &y.data[(o * ys.len + off) * ys.inner]);
        ids.push_back(p.id);
        offsets.push_back(off);
        lens.push_back(len);
        off += len;
    }
    return parts[0].tape->push(std::move(y), parts, [ids, offsets, lens, ys](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            Tensor& gx = t.grad(ids[k]);
            for (std::size_t o = 0; o < ys.outer; ++o)
                for (std::size_t j = 0; j < lens[k] * ys.inner; ++j)
                    gx.data[o * lens[k] * ys.inner + j] += gy.data[(o * ys.len + offsets[k]) * ys.inner + j];
        }
    });
}

// ---------------------------------------------------------------- linear

Var matmul(const Var& a, const Var& b) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require(av.rank() == 2 && bv.rank() == 2 && av.shape[1] == bv.shape[0],
            "matmul: shapes " + shape_string(av.shape) + " x " + shape_string(bv.shape));
    const std::size_t m = av.shape[0], k = av.shape[1], n = bv.shape[1];
    Tensor y({m, n});
    MapM(y.data.data(), m, n).noalias() = MapC(av.data.data(), m, k) * MapC(bv.data.data(), k, n);
    const std::size_t ia = a.id, ib = b.id;
    return a.tape->push(std::move(y), {a, b}, [ia, ib, m, k, n](Tape& t, std::size_t self) {
        MapC gy(t.grad(self).data.data(), m, n);
        MapM(t.grad(ia).data.data(), m, k).noalias() += gy * MapC(t.value(ib).data.data(), k, n).transpose();
        MapM(t.grad(ib).data.data(), k, n).noalias() += MapC(t.value(ia).data.data(), m, k).transpose() * gy;
    });
}

Var mix_leading(const Tensor& m, const Var& a) {
    const Tensor& x = a.value();
    require(m.rank() == 2 && x.rank() >= 1 && x.shape[0] == m.shape[1], "mix_leading: leading axis mismatch");
    const std::size_t p = m.shape[0], q = m.shape[1], r = x.size() / q;
    std::vector<std::size_t> shape = x.shape;
    shape[0] = p;
    Tensor y(shape);
    MapM(y.data.data(), p, r).noalias() = MapC(m.data.data(), p, q) * MapC(x.data.data(), q, r);
    const std::size_t ia = a.id;
    return a.tape->push(std::move(y), {a}, [ia, m, p, q, r](Tape& t, std::size_t self) {
        MapM(t.grad(ia).data.data(), q, r).noalias() +=
            MapC(m.data.data(), p, q).transpose() * MapC(t.grad(self).data.data(), p, r);
    });
}

Var basis_expand(const Var& theta, const Tensor& basis) {
    const Tensor& th = theta.value();
    require(th.rank() == 2 && basis.rank() == 3 && basis.shape[1] == th.shape[1], "basis_expand: shape mismatch");
    const std::size_t n = th.shape[0], r = th.shape[1], g = basis.shape[0], s = basis.shape[2];
    Tensor y({g, n, s});
    for (std::size_t k = 0; k < g; ++k)
        MapM(&y.data[k * n * s], n, s).noalias() = MapC(th.data.data(), n, r) * MapC(&basis.data[k * r * s], r, s);
    const std::size_t it = theta.id;
    return theta.tape->push(std::move(y), {theta}, [it, basis, n, r, g, s](Tape& t, std::size_t self) {
        MapM gt(t.grad(it).data.data(), n, r);
        const Tensor& gy = t.grad(self);
        for (std::size_t k = 0; k < g; ++k)
            gt.noalias() += MapC(&gy.data[k * n * s], n, s) * MapC(&basis.data[k * r * s], r, s).transpose();
    });
}

namespace {

/// Valid destination columns [lo, hi) for a horizontal tap offset dx.
inline void tap_range(long dx, std::size_t w, std::size_t& lo, std::size_t& hi) {
    lo = dx < 0 ? static_cast<std::size_t>(-dx) : 0;
    hi = dx > 0 ? w - static_cast<std::size_t>(dx) : w;
}

/// cols[(c*9 + t), (j*H*W + p)] for images b0 + j, j < nb, of one slot
/// whose channels are laid out as [C, B, H, W].
void im2col(const double* x, std::size_t c, std::size_t b, std::size_t b0, std::size_t nb, std::size_t h,
            std::size_t w, double* cols) {
    const std::size_t n = nb * h * w;
    for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t t = 0; t < 9; ++t) {
            const long dy = static_cast<long>(t / 3) - 1, dx = static_cast<long>(t % 3) - 1;
            std::size_t lo, hi;
            tap_range(dx, w, lo, hi);
            double* row = cols + (ci * 9 + t) * n;
            for (std::size_t j = 0; j < nb; ++j) {
                const double* img = x + (ci * b + b0 + j) * h * w;
                double* out = row + j * h * w;
                for (std::size_t y = 0; y < h; ++y) {
                    double* o = out + y * w;
                    const long sy = static_cast<long>(y) + dy;
                    if (sy < 0 || sy >= static_cast<long>(h)) {
                        std::fill_n(o, w, 0.0);
                        continue;
                    }
                    const double* src = img + sy * static_cast<long>(w) + dx;
                    std::fill(o, o + lo, 0.0);
                    std::copy(src + lo, src + hi, o + lo);
                    std::fill(o + hi, o + w, 0.0);
                }
            }
        }
}

void col2im_add(const double* cols, std::size_t c, std::size_t b, std::size_t b0, std::size_t nb, std::size_t h,
                std::size_t w, double* gx) {
    const std::size_t n = nb * h * w;
    for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t t = 0; t < 9; ++t) {
            const long dy = static_cast<long>(t / 3) - 1, dx = static_cast<long>(t % 3) - 1;
            std::size_t lo, hi;
            tap_range(dx, w, lo, hi);
            const double* row = cols + (ci * 9 + t) * n;
            for (std::size_t j = 0; j < nb; ++j) {
                double* img = gx + (ci * b + b0 + j) * h * w;
                const double* in = row + j * h * w;
                for (std::size_t y = 0; y < h; ++y) {
                    const long sy = static_cast<long>(y) + dy;
                    if (sy < 0 || sy >= static_cast<long>(h)) continue;
                    double* dst = img + sy * static_cast<long>(w) + dx;
                    const double* src = in + y * w;
                    for (std::size_t xx = lo; xx < hi; ++xx) dst[xx] += src[xx];
                }
            }
        }
}

/// Images per im2col chunk, keeping the column buffer cache-sized.
std::size_t conv_chunk(std::size_t kc, std::size_t hw) {
    constexpr std::size_t kBudget = 1U << 16;  // doubles
    return std::max<std::size_t>(1, kBudget / (kc * hw));
}

}  // namespace

Var slot_conv3x3(const Var& x, const Var& k) {
    const Tensor& xv = x.value();
    const Tensor& kv = k.value();
    require(xv.rank() == 5 && kv.rank() == 5 && kv.shape[3] == 3 && kv.shape[4] == 3,
            "slot_conv3x3: expected x [G,C,B,H,W] and k [G,O,C,3,3]");
    const std::size_t g = xv.shape[0], c = xv.shape[1], b = xv.shape[2], h = xv.shape[3], w = xv.shape[4];
    const std::size_t o = kv.shape[1];
    require(kv.shape[0] == g && kv.shape[2] == c, "slot_conv3x3: slot or channel mismatch");
    const std::size_t hw = h * w, n = b * hw, kc = c * 9, chunk = conv_chunk(kc, hw);
    std::vector<double> cols(kc * chunk * hw);
    Tensor y({g, o, b, h, w});
    for (std::size_t s = 0; s < g; ++s) {
        MapC ks(&kv.data[s * o * kc], o, kc);
        MapM ys(&y.data[s * o * n], o, n);
        for (std::size_t b0 = 0; b0 < b; b0 += chunk) {
            const std::size_t nb = std::min(chunk, b - b0);
            im2col(&xv.data[s * c * n], c, b, b0, nb, h, w, cols.data());
            ys.middleCols(b0 * hw, nb * hw).noalias() = ks * MapC(cols.data(), kc, nb * hw);
        }
    }
    const std::size_t ix = x.id, ik = k.id;
    const bool need_x = x.tape->needs_grad(x);
    const bool need_k = x.tape->needs_grad(k);
    return x.tape->push(std::move(y), {x, k}, [=](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        const Tensor& xv2 = t.value(ix);
        const Tensor& kv2 = t.value(ik);
        std::vector<double> buf(kc * chunk * hw);
        for (std::size_t s = 0; s < g; ++s) {
            MapC dout(&gy.data[s * o * n], o, n);
            MapC ks(&kv2.data[s * o * kc], o, kc);
            for (std::size_t b0 = 0; b0 < b; b0 += chunk) {
                const std::size_t nb = std::min(chunk, b - b0);
                auto dchunk = dout.middleCols(b0 * hw, nb * hw);
                if (need_k) {
                    im2col(&xv2.data[s * c * n], c, b, b0, nb, h, w, buf.data());
                    MapM(&t.grad(ik).data[s * o * kc], o, kc).noalias() +=
                        dchunk * MapC(buf.data(), kc, nb * hw).transpose();
                }
                if (need_x) {
                    MapM(buf.data(), kc, nb * hw).noalias() = ks.transpose() * dchunk;
                    col2im_add(buf.data(), c, b, b0, nb, h, w, &t.grad(ix).data[s * c * n]);
                }
            }
        }
    });
}

Var spatial_mean(const Var& x) {
    const Tensor& xv = x.value();
    require(xv.rank() >= 2, "spatial_mean: rank must be at least 2");
    const std::size_t hw = xv.shape[xv.rank() - 1] * xv.shape[xv.rank() - 2];
    std::vector<std::size_t> shape(xv.shape.begin(), xv.shape.end() - 2);
    Tensor y(shape);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double s = 0.0;
        for (std::size_t p = 0; p < hw; ++p) s += xv.data[i * hw + p];
        y.data[i] = s / static_cast<double>(hw);
    }
    const std::size_t ix = x.id;
    return x.tape->push(std::move(y), {x}, [ix, hw](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        Tensor& gx = t.grad(ix);
        const double inv = 1.0 / static_cast<double>(hw);
        for (std::size_t i = 0; i < gy.size(); ++i)
            for (std::size_t p = 0; p < hw; ++p) gx.data[i * hw + p] += gy.data[i] * inv;
    });
}

Var selector(const Var& f, const Var& p) {
    const Tensor& fv = f.value();
    const Tensor& pv = p.value();
    require(fv.rank() == 3 && pv.rank() == 2 && pv.shape[0] == fv.shape[1] && pv.shape[1] == fv.shape[0],
            "selector: expected f [G,K,B] and p [K,G]");
    const std::size_t g = fv.shape[0], k = fv.shape[1], b = fv.shape[2];
    Tensor y({b, k});
    for (std::size_t s = 0; s < g; ++s)
        for (std::size_t ki = 0; ki < k; ++ki)
            for (std::size_t bi = 0; bi < b; ++bi) y.data[bi * k + ki] += pv.data[ki * g + s] * fv.data[(s * k + ki) * b + bi];
    const std::size_t iff = f.id, ip = p.id;
    return f.tape->push(std::move(y), {f, p}, [=](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        const Tensor& fv2 = t.value(iff);
        const Tensor& pv2 = t.value(ip);
        Tensor& gf = t.grad(iff);
        Tensor& gp = t.grad(ip);
        for (std::size_t s = 0; s < g; ++s)
            for (std::size_t ki = 0; ki < k; ++ki)
                for (std::size_t bi = 0; bi < b; ++bi) {
                    const double d = gy.data[bi * k + ki];
                    gp.data[ki * g + s] += d * fv2.data[(s * k + ki) * b + bi];
                    gf.data[(s * k + ki) * b + bi] += d * pv2.data[ki * g + s];
                }
    });
}

Var contract_mix(const Var& w, const Var& f) {
    const Tensor& wv = w.value();
    const Tensor& fv = f.value();
    require(wv.rank() == 2 && fv.rank() == 3 && fv.shape[1] == wv.shape[1], "contract_mix: expected w [O,I], f [P,I,D]");
    const std::size_t o = wv.shape[0], in = wv.shape[1], p = fv.shape[0], d = fv.shape[2];
    Tensor y({p, o, d});
    for (std::size_t pi = 0; pi < p; ++pi)
        MapM(&y.data[pi * o * d], o, d).noalias() = MapC(wv.data.data(), o, in) * MapC(&fv.data[pi * in * d], in, d);
    const std::size_t iw = w.id, iff = f.id;
    return w.tape->push(std::move(y), {w, f}, [=](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        MapM gw(t.grad(iw).data.data(), o, in);
        Tensor& gf = t.grad(iff);
        MapC wm(t.value(iw).data.data(), o, in);
        const Tensor& fv2 = t.value(iff);
        for (std::size_t pi = 0; pi < p; ++pi) {
            MapC dout(&gy.data[pi * o * d], o, d);
            gw.noalias() += dout * MapC(&fv2.data[pi * in * d], in, d).transpose();
            MapM(&gf.data[pi * in * d], in, d).noalias() += wm.transpose() * dout;
        }
    });
}

Var pair_bilinear(const Var& a, const Var& b, const std::vector<PairIndex>& pairs,
                  const std::vector<BilinearTerm>& terms, std::size_t dout) {
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    require(av.rank() == 3 && bv.rank() == 3 && av.shape[1] == bv.shape[1], "pair_bilinear: expected a [P,O,Da], b [E,O,Db]");
    const std::size_t p = av.shape[0], o = av.shape[1], da = av.shape[2], e = bv.shape[0], db = bv.shape[2];
    for (const BilinearTerm& tm : terms) require(tm.r < dout && tm.s < da && tm.t < db, "pair_bilinear: term index out of range");
    for (const PairIndex& pr : pairs) require(pr.dst < p && pr.src < p && pr.edge < e, "pair_bilinear: pair index out of range");
    Tensor y({p, o, dout});
    for (const PairIndex& pr : pairs)
        for (std::size_t oi = 0; oi < o; ++oi) {
            const double* ap = &av.data[(pr.src * o + oi) * da];
            const double* bp = &bv.data[(pr.edge * o + oi) * db];
            double* yp = &y.data[(pr.dst * o + oi) * dout];
            for (const BilinearTerm& tm : terms) yp[tm.r] += tm.c * ap[tm.s] * bp[tm.t];
        }
    const std::size_t ia = a.id, ib = b.id;
    return a.tape->push(std::move(y), {a, b}, [=](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        const Tensor& av2 = t.value(ia);
        const Tensor& bv2 = t.value(ib);
        Tensor& ga = t.grad(ia);
        Tensor& gb = t.grad(ib);
        for (const PairIndex& pr : pairs)
            for (std::size_t oi = 0; oi < o; ++oi) {
                const double* ap = &av2.data[(pr.src * o + oi) * da];
                const double* bp = &bv2.data[(pr.edge * o + oi) * db];
                double* gap = &ga.data[(pr.src * o + oi) * da];
                double* gbp = &gb.data[(pr.edge * o + oi) * db];
                const double* gyp = &gy.data[(pr.dst * o + oi) * dout];
                for (const BilinearTerm& tm : terms) {
                    gap[tm.s] += tm.c * gyp[tm.r] * bp[tm.t];
                    gbp[tm.t] += tm.c * gyp[tm.r] * ap[tm.s];
                }
            }
    });
}

Var gate_mul(const Var& f, const Var& g) {
    const Tensor& fv = f.value();
    const Tensor& gv = g.value();
    require(fv.rank() == 3 && gv.rank() == 2 && gv.shape[0] == fv.shape[0] && gv.shape[1] == fv.shape[1],
            "gate_mul: expected f [P,O,D], g [P,O]");
    const std::size_t d = fv.shape[2];
    Tensor y = fv;
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= gv.data[i / d];
    const std::size_t iff = f.id, ig = g.id;
    return f.tape->push(std::move(y), {f, g}, [iff, ig, d](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        const Tensor& fv2 = t.value(iff);
        const Tensor& gv2 = t.value(ig);
        Tensor& gf = t.grad(iff);
        Tensor& gg = t.grad(ig);
        for (std::size_t i = 0; i < gy.size(); ++i) {
            gf.data[i] += gy.data[i] * gv2.data[i / d];
            gg.data[i / d] += gy.data[i] * fv2.data[i];
        }
    });
}

Var group_mean(const Var& x, std::size_t m) {
    const Tensor& xv = x.value();
    require(m > 0 && xv.rank() >= 1 && xv.shape[0] % m == 0, "group_mean: leading axis not divisible by group size");
    std::vector<std::size_t> shape = xv.shape;
    shape[0] /= m;
    const std::size_t inner = xv.size() / xv.shape[0];
    Tensor y(shape);
    const double inv = 1.0 / static_cast<double>(m);
    for (std::size_t r = 0; r < xv.shape[0]; ++r)
        for (std::size_t k = 0; k < inner; ++k) y.data[(r / m) * inner + k] += inv * xv.data[r * inner + k];
    const std::size_t ix = x.id, rows = xv.shape[0];
    return x.tape->push(std::move(y), {x}, [ix, m, inner, rows, inv](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        Tensor& gx = t.grad(ix);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = 0; k < inner; ++k) gx.data[r * inner + k] += inv * gy.data[(r / m) * inner + k];
    });
}

// ---------------------------------------------------------------- normalization and losses

Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormState& st, bool training) {
    const Tensor& xv = x.value();
    require(xv.rank() == 2, "batch_norm: expected x [B,F]");
    const std::size_t b = xv.shape[0], f = xv.shape[1];
    require(gamma.value().size() == f && beta.value().size() == f, "batch_norm: affine length mismatch");
    if (st.running_mean.size() != f) {
        st.running_mean.assign(f, 0.0);
        st.running_var.assign(f, 1.0);
    }
    std::vector<double> mu(f), var(f);
    if (training) {
        require(b > 1, "batch_norm: training needs a batch of at least 2");
        for (std::size_t j = 0; j < f; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < b; ++i) s += xv.data[i * f + j];
            mu[j] = s / static_cast<double>(b);
            double v = 0.0;
            for (std::size_t i = 0; i < b; ++i) v += (xv.data[i * f + j] - mu[j]) * (xv.data[i * f + j] - mu[j]);
            var[j] = v / static_cast<double>(b);
            st.running_mean[j] = (1.0 - st.momentum) * st.running_mean[j] + st.momentum * mu[j];
            st.running_var[j] = (1.0 - st.momentum) * st.running_var[j] +
                                st.momentum * var[j] * static_cast<double>(b) / static_cast<double>(b - 1);
        }
    } else {
        mu = st.running_mean;
        var = st.running_var;
    }
    std::vector<double> inv_std(f);
    for (std::size_t j = 0; j < f; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + st.eps);
    Tensor xhat({b, f});
    Tensor y({b, f});
    const Tensor& gv = gamma.value();
    const Tensor& bv = beta.value();
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < f; ++j) {
            xhat.data[i * f + j] = (xv.data[i * f + j] - mu[j]) * inv_std[j];
            y.data[i * f + j] = gv.data[j] * xhat.data[i * f + j] + bv.data[j];
        }
    const std::size_t ix = x.id, ig = gamma.id, ib = beta.id;
    return x.tape->push(std::move(y), {x, gamma, beta}, [=](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        const Tensor& gam = t.value(ig);
        Tensor& gg = t.grad(ig);
        Tensor& gb = t.grad(ib);
        Tensor& gx = t.grad(ix);
        for (std::size_t j = 0; j < f; ++j) {
            double sdy = 0.0, sdyx = 0.0;
            for (std::size_t i = 0; i < b; ++i) {
                sdy += gy.data[i * f + j];
                sdyx += gy.data[i * f + j] * xhat.data[i * f + j];
            }
            gb.data[j] += sdy;
            gg.data[j] += sdyx;
            const double k = gam.data[j] * inv_std[j];
            for (std::size_t i = 0; i < b; ++i) {
                if (training) {
                    gx.data[i * f + j] += k * (gy.data[i * f + j] - sdy / static_cast<double>(b) -
                                               xhat.data[i * f + j] * sdyx / static_cast<double>(b));
                } else {
                    gx.data[i * f + j] += k * gy.data[i * f + j];
                }
            }
        }
    });
}

Var weighted_softmax_xent(const Var& logits, const std::vector<int>& labels, const std::vector<double>& weights) {
    const Tensor& x = logits.value();
    require(x.rank() == 2 && x.shape[0] == labels.size(), "weighted_softmax_xent: expected logits [B,K] and B labels");
    const std::size_t b = x.shape[0], k = x.shape[1];
    require(weights.size() == k, "weighted_softmax_xent: one weight per class required");
    Tensor probs({b, k});
    double loss = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k)
            throw DomainError("weighted_softmax_xent: label out of range");
        const double* row = &x.data[i * k];
        const double mx = *std::max_element(row, row + k);
        double z = 0.0;
        for (std::size_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
        for (std::size_t j = 0; j < k; ++j) probs.data[i * k + j] = std::exp(row[j] - mx) / z;
        const double w = weights[static_cast<std::size_t>(labels[i])];
        loss += w * (mx + std::log(z) - row[labels[i]]);
        wsum += w;
    }
    const std::size_t il = logits.id;
    return logits.tape->push(Tensor({1}, {loss / wsum}), {logits}, [=](Tape& t, std::size_t self) {
        const double g = t.grad(self).data[0] / wsum;
        Tensor& gx = t.grad(il);
        for (std::size_t i = 0; i < b; ++i) {
            const double w = weights[static_cast<std::size_t>(labels[i])];
            for (std::size_t j = 0; j < k; ++j)
                gx.data[i * k + j] += g * w * (probs.data[i * k + j] - (static_cast<int>(j) == labels[i] ? 1.0 : 0.0));
        }
    });
}

Var spinor_sign_loss(const Var& pred, const Tensor& target) {
    const Tensor& p = pred.value();
    require(p.rank() == 2 && p.shape == target.shape, "spinor_sign_loss: prediction and target shapes differ");
    const std::size_t b = p.shape[0], d = p.shape[1];
    std::vector<double> sign(b), dist(b);
    double loss = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        double dm = 0.0, dp = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double a = p.data[i * d + j], t = target.data[i * d + j];
            dm += (a - t) * (a - t);
            dp += (a + t) * (a + t);
        }
        dm = std::sqrt(dm);
        dp = std::sqrt(dp);
        sign[i] = dp < dm ? 1.0 : -1.0;
        dist[i] = std::min(dm, dp);
        loss += dist[i];
    }
    const std::size_t ip = pred.id;
    return pred.tape->push(Tensor({1}, {loss / static_cast<double>(b)}), {pred}, [=](Tape& t, std::size_t self) {
        const double g = t.grad(self).data[0] / static_cast<double>(b);
        const Tensor& pv = t.value(ip);
        Tensor& gp = t.grad(ip);
        for (std::size_t i = 0; i < b; ++i) {
            if (dist[i] == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j)
                gp.data[i * d + j] += g * (pv.data[i * d + j] + sign[i] * target.data[i * d + j]) / dist[i];
        }
    });
}

// ---------------------------------------------------------------- parameters

Tensor& ParamStore::add(const std::string& name, Tensor init) {
    if (contains(name)) throw InvariantError("ParamStore: duplicate parameter " + name);
    index_[name] = entries_.size();
    Tensor g(init.shape);
    entries_.push_back(Entry{name, std::move(init), std::move(g)});
    return entries_.back().value;
}

ParamStore::Entry& ParamStore::entry(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("ParamStore: unknown parameter " + name);
    return entries_[it->second];
}

const ParamStore::Entry& ParamStore::entry(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error("ParamStore: unknown parameter " + name);
    return entries_[it->second];
}

Tensor& ParamStore::value(const std::string& name) { return entry(name).value; }
const Tensor& ParamStore::value(const std::string& name) const { return entry(name).value; }
Tensor& ParamStore::grad(const std::string& name) { return entry(name).grad; }

Var ParamStore::bind(Tape& tape, const std::string& name) {
    Entry& e = entry(name);
    return tape.param(e.value, &e.grad);
}

void ParamStore::zero_grad() {
    for (Entry& e : entries_) std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
}

std::size_t ParamStore::count() const {
    std::size_t n = 0;
    for (const Entry& e : entries_) n += e.value.size();
    return n;
}

bool ParamStore::all_finite() const {
    for (const Entry& e : entries_)
        for (double v : e.value.data)
            if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace projeq::nn
