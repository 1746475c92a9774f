#include "projeq/network.hpp"

#include <algorithm>
#include <cmath>

#include "projeq/invariants.hpp"

namespace projeq {

Vec apply_nonlinearity(Nonlinearity s, const Vec& v) {
    Vec out(v.size());
    switch (s) {
        case Nonlinearity::Identity: return v;
        case Nonlinearity::Tanh:
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (v[i].imag() != 0.0) throw FieldError("tanh nonlinearity needs real features");
                out[i] = std::tanh(v[i].real());
            }
            return out;
        case Nonlinearity::PhaseTanh:
            for (std::size_t i = 0; i < v.size(); ++i) {
                const double r = std::abs(v[i]);
                out[i] = r == 0.0 ? cd{0.0, 0.0} : v[i] * (std::tanh(r) / r);
            }
            return out;
    }
    return out;
}

ProjEquivLinearLayer::ProjEquivLinearLayer(const LinearRep& rv, const LinearRep& rw)
    : in_dim_(rv.dim()), out_dim_(rw.dim()), field_(rv.field()) {
    chars_ = character_group(rv.group(), rv.field());
    for (const Character& g : chars_) {
        bases_.push_back(equivariant_basis(rv, rw, g));
        coeffs_.emplace_back(bases_.back().size(), cd{0.0, 0.0});
    }
    const std::size_t n = chars_.size();
    product_.resize(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) product_[a * n + b] = find_character(chars_, char_mul(chars_[a], chars_[b]));
}

void ProjEquivLinearLayer::set_coefficients(std::size_t gamma, Vec c) {
    if (c.size() != bases_.at(gamma).size()) throw DimensionError("ProjEquivLinearLayer: coefficient count");
    if (field_ == Field::Real)
        for (const cd& x : c)
            if (x.imag() != 0.0) throw FieldError("ProjEquivLinearLayer: complex coefficient on a real layer");
    coeffs_[gamma] = std::move(c);
}

void ProjEquivLinearLayer::randomize(Rng& rng) {
    for (Vec& c : coeffs_)
        for (cd& x : c) x = field_ == Field::Real ? cd{rng.normal(), 0.0} : cd{rng.normal(), rng.normal()};
}

Matrix ProjEquivLinearLayer::map(std::size_t gamma) const {
    const std::vector<Matrix>& b = bases_.at(gamma);
    Field f = field_;
    for (const Matrix& m : b) f = join(f, m.field());
    Matrix a(out_dim_, in_dim_, f);
    for (std::size_t k = 0; k < b.size(); ++k) {
        auto src = b[k].entries();
        auto dst = a.entries();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += coeffs_[gamma][k] * src[i];
    }
    return a;
}

CharIndexedFeature first_layer(const Vec& x, const ProjEquivLinearLayer& layer, Nonlinearity s) {
    if (x.size() != layer.in_dim()) throw DimensionError("first_layer: input dimension mismatch");
    CharIndexedFeature out{layer.chars(), {}};
    for (std::size_t e = 0; e < layer.chars().size(); ++e)
        out.slots.push_back(apply_nonlinearity(s, matvec(layer.map(e), x)));
    return out;
}

CharIndexedFeature char_conv_layer(const CharIndexedFeature& f, const ProjEquivLinearLayer& layer, Nonlinearity s) {
    const std::size_t n = layer.chars().size();
    if (f.slots.size() != n) throw GroupMismatch("char_conv_layer: character count mismatch");
    for (std::size_t e = 0; e < n; ++e)
        if (!f.chars[e].equals(layer.chars()[e])) throw GroupMismatch("char_conv_layer: character set mismatch");
    std::vector<Matrix> maps;
    for (std::size_t g = 0; g < n; ++g) maps.push_back(layer.map(g));
    CharIndexedFeature out{layer.chars(), std::vector<Vec>(n, Vec(layer.out_dim()))};
    for (std::size_t g = 0; g < n; ++g)
        for (std::size_t d = 0; d < n; ++d) {
            if (f.slots[d].size() != layer.in_dim()) throw DimensionError("char_conv_layer: feature dimension mismatch");
            Vec& acc = out.slots[layer.product(g, d)];
            acc = axpy(1.0, matvec(maps[g], f.slots[d]), acc);
        }
    for (Vec& v : out.slots) v = apply_nonlinearity(s, v);
    return out;
}

Vec select(const CharIndexedFeature& f, const Vec& p) {
    if (p.size() != f.slots.size() || f.slots.empty()) throw DimensionError("select: selector length mismatch");
    Vec w(f.slots[0].size());
    for (std::size_t e = 0; e < p.size(); ++e) w = axpy(p[e], f.slots[e], w);
    return w;
}

std::vector<CharIndexedFeature> CharNet::forward(const Vec& x) const {
    std::vector<CharIndexedFeature> out;
    if (layers.empty()) return out;
    out.push_back(first_layer(x, layers[0], nonlinearity));
    for (std::size_t k = 1; k < layers.size(); ++k) out.push_back(char_conv_layer(out.back(), layers[k], nonlinearity));
    return out;
}

double slot_equivariance_defect(const CharNet& net, const LinearRep& rep_in, const std::vector<LinearRep>& rep_layers,
                                const Vec& x, std::size_t g) {
    if (rep_layers.size() != net.layers.size()) throw DimensionError("slot_equivariance_defect: one rep per layer");
    const auto plain = net.forward(x);
    const auto moved = net.forward(matvec(rep_in(g), x));
    double worst = 0.0;
    for (std::size_t k = 0; k < plain.size(); ++k)
        for (std::size_t e = 0; e < plain[k].slots.size(); ++e) {
            const Vec expect = scaled(matvec(rep_layers[k](g), plain[k].slots[e]), plain[k].chars[e](g));
            worst = std::max(worst, max_abs_diff(moved[k].slots[e], expect));
        }
    return worst;
}

double sin_angle(const Vec& a, const Vec& b) {
    const double na = norm(a), nb = norm(b);
    if (na == 0.0 && nb == 0.0) return 0.0;
    if (na == 0.0 || nb == 0.0) return 1.0;
    // Residual of a off the line through b; sqrt(1 - cos^2) loses half the digits.
    const Vec r = axpy(-dot(b, a) / (nb * nb), b, a);
    return std::min(1.0, norm(r) / na);
}

EquivarianceReport check_projective_equivariance(const std::function<Vec(const Vec&)>& net, const LinearRep& rep_in,
                                                 const std::function<Vec(std::size_t, const Vec&)>& action_out,
                                                 const std::vector<Vec>& samples, double tol,
                                                 const std::vector<Character>& chars) {
    EquivarianceReport rep;
    const std::size_t n = rep_in.group()->order();
    rep.lambdas.assign(n, cd{0.0, 0.0});
    for (const Vec& v : samples) {
        const Vec base = net(v);
        for (std::size_t g = 0; g < n; ++g) {
            const Vec a = net(matvec(rep_in(g), v));
            const Vec b = action_out(g, base);
            const double s = sin_angle(a, b);
            ++rep.checks;
            if (!(s < tol)) ++rep.failures;
            rep.max_sin = std::max(rep.max_sin, s);
            const double nb = norm(b);
            rep.lambdas[g] = nb > 0.0 ? dot(b, a) / (nb * nb) : cd{0.0, 0.0};
        }
    }
    rep.matched_character = chars.size();
    for (std::size_t c = 0; c < chars.size(); ++c) {
        bool ok = true;
        for (std::size_t g = 0; g < n && ok; ++g) ok = std::abs(rep.lambdas[g] - chars[c](g)) < 1e-6;
        if (ok) {
            rep.matched_character = c;
            break;
        }
    }
    rep.passed = rep.failures == 0;
    return rep;
}

}  // namespace projeq
