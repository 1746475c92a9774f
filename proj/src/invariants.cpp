#include "projeq/invariants.hpp"

#include <algorithm>
#include <cmath>

namespace projeq {

namespace {

void require_same_group(const LinearRep& r, const Character& e, const char* op) {
    if (!same_group(*r.group(), *e.group())) throw GroupMismatch(std::string(op) + ": different groups");
}

LinearRep promoted(const LinearRep& r, Field f) {
    return join(r.field(), f) == r.field() ? r : rep_to_complex(r);
}

std::vector<Vec> canonical_all(const std::vector<Vec>& vs) {
    std::vector<Vec> out;
    out.reserve(vs.size());
    for (const Vec& v : vs) out.push_back(canonicalize(v));
    return out;
}

std::size_t parity(std::vector<std::size_t> p) {
    std::size_t swaps = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (p[i] != i) {
            std::swap(p[i], p[p[i]]);
            ++swaps;
        }
    }
    return swaps % 2;
}

}  // namespace

Vec canonicalize(const Vec& v, double tol) {
    double m = 0.0;
    for (const cd& x : v) m = std::max(m, std::abs(x));
    if (m == 0.0) return v;
    for (const cd& x : v) {
        if (std::abs(x) > tol * m) {
            const cd phase = std::conj(x) / std::abs(x);
            Vec out = scaled(v, phase);
            for (cd& y : out)
                if (std::abs(y.imag()) < 1e-15 * m) y = cd{y.real(), 0.0};
            return out;
        }
    }
    return v;
}

Matrix isotypic_projector(const LinearRep& r, const Character& e) {
    require_same_group(r, e, "isotypic_projector");
    const Field f = join(r.field(), e.field());
    const std::size_t n = r.group()->order();
    Matrix p(r.dim(), r.dim(), f);
    for (std::size_t h = 0; h < n; ++h) {
        const cd w = std::conj(e(h)) / static_cast<double>(n);
        auto src = r(h).entries();
        auto dst = p.entries();
        for (std::size_t i = 0; i < dst.size(); ++i)
            if (src[i] != cd{0.0, 0.0}) dst[i] += w * src[i];
    }
    if (f == Field::Real)
        for (cd& x : p.entries()) x = cd{x.real(), 0.0};
    return p;
}

InvariantBasis invariant_basis(const LinearRep& r, const Character& e, double tol) {
    const Matrix p = isotypic_projector(r, e);
    return InvariantBasis{e, canonical_all(column_space_basis(p, tol)), p.field()};
}

std::vector<Vec> twisted_nullspace(const LinearRep& r, const std::vector<cd>& values, double tol) {
    const FiniteGroup& g = *r.group();
    if (values.size() != g.order()) throw DimensionError("twisted_nullspace: value table length");
    bool complex_values = false;
    for (const cd& v : values) complex_values = complex_values || v.imag() != 0.0;
    const Field f = complex_values ? Field::Complex : r.field();
    const std::size_t d = r.dim();
    const auto& gens = g.generators();
    if (gens.empty()) {
        // trivial group: only the identity constraint
        std::vector<Vec> all;
        if (std::abs(values[g.identity()] - cd{1.0, 0.0}) > 1e-12) return all;
        for (std::size_t i = 0; i < d; ++i) {
            Vec v(d);
            v[i] = 1.0;
            all.push_back(v);
        }
        return all;
    }
    Matrix stacked(gens.size() * d, d, f);
    for (std::size_t s = 0; s < gens.size(); ++s) {
        const Matrix& m = r(gens[s]);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                stacked(s * d + i, j) = m(i, j) - (i == j ? values[gens[s]] : cd{0.0, 0.0});
    }
    return rref_nullspace(stacked, tol);
}

InvariantBasis invariant_basis_nullspace(const LinearRep& r, const Character& e, double tol) {
    require_same_group(r, e, "invariant_basis_nullspace");
    const LinearRep rr = promoted(r, e.field());
    return InvariantBasis{e, canonical_all(twisted_nullspace(rr, e.values(), tol)), rr.field()};
}

std::vector<Matrix> equivariant_basis(const LinearRep& rv, const LinearRep& rw, const Character& e,
                                      double tol) {
    if (!same_group(*rv.group(), *rw.group())) throw GroupMismatch("equivariant_basis: different groups");
    if (rv.field() != rw.field()) throw FieldError("equivariant_basis: field mismatch");
    require_same_group(rv, e, "equivariant_basis");
    // A rho_V(g) = e(g) rho_W(g) A  <=>  rho_W(g) A rho_V(g)^-1 = e(g)^-1 A
    const InvariantBasis ib = invariant_basis(rep_hom(rv, rw), char_inverse(e), tol);
    std::vector<Matrix> out;
    for (const Vec& v : ib.basis) out.emplace_back(rw.dim(), rv.dim(), v, ib.field);
    return out;
}

std::vector<InvariantBasis> projective_invariants(const LinearRep& r, double tol) {
    std::vector<InvariantBasis> out;
    for (const Character& e : character_group(r.group(), r.field())) out.push_back(invariant_basis(r, e, tol));
    return out;
}

InvariantBasis commutator_invariants(const LinearRep& r, double tol) {
    const Subgroup sub = commutator_subgroup(r.group());
    const LinearRep restricted = rep_restrict(r, sub);
    return invariant_basis(restricted, trivial_character(restricted.group(), r.field()), tol);
}

double proportionality_defect(const LinearRep& r, const Vec& x) {
    const double nx = norm(x);
    if (nx == 0.0) throw DomainError("proportionality_defect: zero vector");
    double worst = 0.0;
    for (const Matrix& m : r.matrices()) {
        const Vec y = matvec(m, x);
        const cd lambda = dot(x, y) / (nx * nx);
        worst = std::max(worst, norm(axpy(-lambda, x, y)) / nx);
    }
    return worst;
}

double twisted_invariance_defect(const LinearRep& r, const Character& e, const Vec& x) {
    require_same_group(r, e, "twisted_invariance_defect");
    double worst = 0.0;
    for (std::size_t h = 0; h < r.matrices().size(); ++h)
        worst = std::max(worst, norm(axpy(-e(h), x, matvec(r(h), x))));
    return worst;
}

Character sign_character(const GroupPtr& sn, std::size_t n) {
    std::vector<cd> values(sn->order());
    for (std::size_t g = 0; g < sn->order(); ++g) values[g] = parity(permutation_of(n, g)) ? -1.0 : 1.0;
    return Character(sn, std::move(values), Field::Real, "sgn");
}

SignTensorReport verify_sign_tensor(std::size_t n, std::size_t k) {
    if (k == 0 || n != k + 1) throw DomainError("verify_sign_tensor: requires n = k + 1");
    const LinearRep r = rep_permutation_tensor(n, k);
    const Character sgn = sign_character(r.group(), n);
    SignTensorReport rep;
    rep.n = n;
    rep.k = k;
    rep.tensor.assign(r.dim(), 0.0);
    std::vector<std::size_t> idx(k);
    for (std::size_t flat = 0; flat < r.dim(); ++flat) {
        std::size_t rest = flat;
        for (std::size_t a = k; a-- > 0;) {
            idx[a] = rest % n;
            rest /= n;
        }
        std::vector<bool> used(n, false);
        bool distinct = true;
        for (std::size_t i : idx) {
            if (used[i]) distinct = false;
            used[i] = true;
        }
        if (!distinct) continue;
        std::vector<std::size_t> full = idx;
        for (std::size_t m = 0; m < n; ++m)
            if (!used[m]) full.push_back(m);
        rep.tensor[flat] = parity(full) ? -1.0 : 1.0;
    }
    for (std::size_t s = 0; s < r.group()->order(); ++s)
        rep.max_defect = std::max(rep.max_defect, max_abs_diff(matvec(r(s), rep.tensor), scaled(rep.tensor, sgn(s))));
    const InvariantBasis u = invariant_basis(r, sgn);
    rep.dim_sgn = u.dim();
    rep.membership = residual_norm(scaled(rep.tensor, 1.0 / norm(rep.tensor)), u.basis);
    rep.passed = rep.max_defect < 1e-12 && rep.dim_sgn > 0 && rep.membership < 1e-9;
    return rep;
}

}  // namespace projeq
