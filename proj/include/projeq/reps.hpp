#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "projeq/algebra.hpp"
#include "projeq/groups.hpp"

namespace projeq {

/// Cap on |G| * dim^2 stored matrix entries.
inline constexpr std::size_t kMaxRepEntries = std::size_t{1} << 24;
/// Cap on n^k for permutation tensor representations.
inline constexpr std::size_t kMaxTensorDim = 4096;

/// A linear representation stored as one matrix per group element.
///
/// Construction checks that the identity maps to the identity matrix and
/// that rho(g) rho(s) = rho(g s) for every element g and generator s, which
/// by induction gives the full homomorphism table. Invertibility follows.
class LinearRep {
public:
    LinearRep(GroupPtr group, std::vector<Matrix> matrices, std::string name = {});

    const GroupPtr& group() const { return group_; }
    std::size_t dim() const { return dim_; }
    Field field() const { return field_; }
    const Matrix& operator()(std::size_t g) const { return matrices_[g]; }
    const std::vector<Matrix>& matrices() const { return matrices_; }
    const std::string& name() const { return name_; }

private:
    GroupPtr group_;
    std::size_t dim_ = 0;
    Field field_ = Field::Real;
    std::vector<Matrix> matrices_;
    std::string name_;
};

/// Largest deviation of rho(g) rho(h) from rho(gh) over all pairs.
double homomorphism_defect(const LinearRep& r);

/// dim-dimensional trivial representation.
LinearRep rep_trivial(const GroupPtr& g, std::size_t dim = 1, Field field = Field::Real);
/// One-dimensional representation g -> [e(g)].
LinearRep rep_from_character(const Character& e);

/// Z_n acting on F^n by e_j -> e_{j+l mod n}.
LinearRep rep_cyclic_shift(std::size_t n, Field field = Field::Real);
/// Z_2 x Z_2 acting on row-major h x w images: (1,0) reverses the row
/// order (vertical flip), (0,1) reverses the column order.
LinearRep rep_flip_image(std::size_t h, std::size_t w);
/// S_n permuting tensor indices: (rho(s) T)_I = T_{s^-1(I)}.
LinearRep rep_permutation_tensor(std::size_t n, std::size_t k, Field field = Field::Real);

/// g -> e(g) rho(g); promotes to complex when e is complex.
LinearRep rep_twist(const LinearRep& r, const Character& e);
/// Action A -> rho_W(g) A rho_V(g)^-1 on row-major vec(A).
LinearRep rep_hom(const LinearRep& rv, const LinearRep& rw);
LinearRep rep_direct_sum(const LinearRep& a, const LinearRep& b);
LinearRep rep_tensor(const LinearRep& a, const LinearRep& b);
LinearRep rep_to_complex(const LinearRep& r);
/// Restriction to a subgroup, as a representation of sub.as_group().
LinearRep rep_restrict(const LinearRep& r, const Subgroup& sub);

}  // namespace projeq
