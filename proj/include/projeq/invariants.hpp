#pragma once

#include <cstddef>
#include <vector>

#include "projeq/algebra.hpp"
#include "projeq/groups.hpp"
#include "projeq/reps.hpp"

namespace projeq {

/// Orthonormal basis of U^e = { v : rho(h) v = e(h) v for all h }.
struct InvariantBasis {
    Character character;
    std::vector<Vec> basis;
    Field field = Field::Real;

    std::size_t dim() const { return basis.size(); }
};

/// P = (1/|H|) sum_h e(h)^-1 rho(h).
Matrix isotypic_projector(const LinearRep& r, const Character& e);

/// Range of the isotypic projector. Vectors are canonicalized so that the
/// first non-negligible component is real and positive.
InvariantBasis invariant_basis(const LinearRep& r, const Character& e, double tol = kDefaultTol);

/// Nullspace of the stacked blocks rho(s) - e(s) I over the generators s.
InvariantBasis invariant_basis_nullspace(const LinearRep& r, const Character& e, double tol = kDefaultTol);

/// Same solve for an arbitrary value table over all group elements, which need
/// not be a unit-modulus character.
std::vector<Vec> twisted_nullspace(const LinearRep& r, const std::vector<cd>& values, double tol = kDefaultTol);

/// Maps A with A rho_V(g) = e(g) rho_W(g) A for all g, as dim_W x dim_V matrices.
std::vector<Matrix> equivariant_basis(const LinearRep& rv, const LinearRep& rw, const Character& e,
                                      double tol = kDefaultTol);

/// One basis per character of the group over the field of r.
std::vector<InvariantBasis> projective_invariants(const LinearRep& r, double tol = kDefaultTol);

/// Trivial-character invariants of the restriction to the commutator subgroup.
InvariantBasis commutator_invariants(const LinearRep& r, double tol = kDefaultTol);

/// Largest over g of the distance from rho(g) x to span{x}, relative to |x|.
double proportionality_defect(const LinearRep& r, const Vec& x);

/// Largest over h of |rho(h) x - e(h) x| for a unit vector x.
double twisted_invariance_defect(const LinearRep& r, const Character& e, const Vec& x);

/// Multiply v by the unit scalar that makes its first component above
/// tol * max|v_i| real positive.
Vec canonicalize(const Vec& v, double tol = 1e-9);

struct SignTensorReport {
    std::size_t n = 0;
    std::size_t k = 0;
    Vec tensor;              ///< S flattened with lexicographic multi-indices
    double max_defect = 0;   ///< max over sigma of |rho(sigma) S - sgn(sigma) S|
    double membership = 0;   ///< residual of S/|S| against U^sgn
    std::size_t dim_sgn = 0; ///< dim U^sgn
    bool passed = false;
};

/// Builds S_I = sgn of the permutation completing the repetition-free
/// multi-index I (0 otherwise) and checks it transforms by the sign
/// character of S_n on (F^n)^{(x) k}. Requires n = k + 1.
SignTensorReport verify_sign_tensor(std::size_t n, std::size_t k);

/// Sign character of S_n.
Character sign_character(const GroupPtr& sn, std::size_t n);

}  // namespace projeq
