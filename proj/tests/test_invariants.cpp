#include <doctest.h>

#include <cmath>

#include "projeq/invariants.hpp"
#include "projeq/random.hpp"
#include "projeq/verify.hpp"

using namespace projeq;

namespace {

/// The representations the solvers are cross-checked on.
std::vector<LinearRep> test_reps() {
    std::vector<LinearRep> reps{rep_cyclic_shift(4, Field::Complex),
                                rep_cyclic_shift(3, Field::Complex),
                                rep_cyclic_shift(4, Field::Real),
                                rep_flip_image(3, 3),
                                rep_flip_image(4, 5),
                                rep_permutation_tensor(3, 2),
                                rep_permutation_tensor(4, 2),
                                rep_to_complex(rep_permutation_tensor(3, 2))};
    const LinearRep p5 = rep_permutation_tensor(5, 1);
    reps.push_back(rep_restrict(p5, commutator_subgroup(p5.group())));
    return reps;
}

}  // namespace

TEST_CASE("isotypic projectors") {
    const LinearRep t = rep_trivial(make_cyclic(1), 3);
    CHECK(max_abs_diff(isotypic_projector(t, trivial_character(t.group(), Field::Real)), Matrix::identity(3)) == 0.0);

    const LinearRep f = rep_flip_image(3, 3);
    const auto chars = character_group(f.group(), Field::Real);
    const Matrix p = isotypic_projector(f, chars[0]);
    CHECK(column_space_basis(p).size() == 4);
    for (const Character& c : chars) {
        const Matrix pc = isotypic_projector(f, c);
        const double tr = trace(pc).real();
        CHECK(std::abs(tr - std::round(tr)) < 1e-8);
        CHECK(std::lround(tr) == static_cast<long>(invariant_basis(f, c).dim()));
    }
}

TEST_CASE("invariant bases satisfy the twisted identity") {
    for (const LinearRep& r : test_reps())
        for (const Character& c : character_group(r.group(), r.field()))
            for (const Vec& v : invariant_basis(r, c).basis) CHECK(twisted_invariance_defect(r, c, v) < 1e-9);
}

TEST_CASE("Z4 shift: each character gives the Fourier vector") {
    const LinearRep r = rep_cyclic_shift(4, Field::Complex);
    for (const Character& c : character_group(r.group(), Field::Complex)) {
        const InvariantBasis b = invariant_basis(r, c);
        REQUIRE(b.dim() == 1);
        Vec expect(4);
        for (std::size_t k = 0; k < 4; ++k) expect[k] = 1.0 / c(k);
        CHECK(residual_norm(scaled(expect, 0.5), b.basis) < 1e-12);
    }
}

TEST_CASE("filter dimensions and solver agreement") {
    const LinearRep f = rep_flip_image(3, 3);
    const auto chars = character_group(f.group(), Field::Real);
    const std::size_t dims[4] = {4, 2, 2, 1};
    for (std::size_t e = 0; e < 4; ++e) {
        CHECK(invariant_basis(f, chars[e]).dim() == dims[e]);
        CHECK(invariant_basis_nullspace(f, chars[e]).dim() == dims[e]);
        CHECK(equivariant_basis(rep_trivial(f.group()), f, chars[e]).size() == dims[e]);
    }
    for (const LinearRep& r : test_reps())
        for (const Character& c : character_group(r.group(), r.field())) {
            const InvariantBasis a = invariant_basis(r, c), b = invariant_basis_nullspace(r, c);
            CHECK(a.dim() == b.dim());
            CHECK(subspace_equal(a.basis, b.basis, 1e-9));
        }
    const LinearRep t = rep_trivial(make_symmetric(3), 4);
    CHECK(invariant_basis_nullspace(t, trivial_character(t.group(), Field::Real)).dim() == 4);
}

TEST_CASE("equivariant maps") {
    const GroupPtr s3 = make_symmetric(3);
    const LinearRep t2 = rep_trivial(s3, 2), t3 = rep_trivial(s3, 3);
    CHECK(equivariant_basis(t2, t3, trivial_character(s3, Field::Real)).size() == 6);

    const LinearRep rv = rep_permutation_tensor(3, 1), rw = rep_permutation_tensor(3, 2);
    for (const Character& e : character_group(s3, Field::Real))
        for (const Matrix& a : equivariant_basis(rv, rw, e))
            for (std::size_t g = 0; g < 6; ++g)
                CHECK(max_abs_diff(matmul(a, rv(g)), scale(matmul(rw(g), a), e(g))) < 1e-9);
}

TEST_CASE("projective invariants") {
    const LinearRep p5 = rep_permutation_tensor(5, 1);
    const LinearRep a5 = rep_restrict(p5, commutator_subgroup(p5.group()));
    const auto spaces = projective_invariants(a5);
    REQUIRE(spaces.size() == 1);
    CHECK(spaces[0].character.is_trivial());
    CHECK(spaces[0].dim() == 1);

    for (std::size_t n : {3, 4, 5}) {
        const auto f = projective_invariants(rep_cyclic_shift(n, Field::Complex));
        CHECK(f.size() == n);
        for (const InvariantBasis& b : f) CHECK(b.dim() == 1);
    }
}

TEST_CASE("commutator invariants") {
    CHECK(commutator_invariants(rep_flip_image(3, 3)).dim() == 9);
    const LinearRep s4 = rep_permutation_tensor(4, 2);
    const auto chars = character_group(s4.group(), Field::Real);
    CHECK(commutator_invariants(s4).dim() >= invariant_basis(s4, chars[0]).dim() + invariant_basis(s4, chars[1]).dim());
    for (const auto& c : check_commutator_invariants()) CHECK_MESSAGE(c.passed, c.name);
    for (const auto& c : check_projector_laws()) CHECK_MESSAGE(c.passed, c.name);
}

TEST_CASE("projective oracle agrees with the union of twisted spaces") {
    for (const auto& c : check_projective_oracle(5)) CHECK_MESSAGE(c.passed, c.name);
    const ProjectiveOracleResult r = projective_oracle(rep_cyclic_shift(4, Field::Complex), 20, 1);
    CHECK(r.solutions >= 4);
    CHECK(r.mismatches == 0);
}

TEST_CASE("sign-twisted tensors") {
    for (std::size_t n = 3; n <= 5; ++n)
        for (std::size_t k = 1; k + 2 <= n; ++k) {
            const LinearRep r = rep_permutation_tensor(n, k);
            CHECK_MESSAGE(invariant_basis(r, sign_character(r.group(), n)).dim() == 0, "n=" << n << " k=" << k);
        }
    for (std::size_t n = 2; n <= 4; ++n) {
        const LinearRep r = rep_permutation_tensor(n, n - 1);
        CHECK(invariant_basis(r, sign_character(r.group(), n)).dim() > 0);
    }
    const SignTensorReport s32 = verify_sign_tensor(3, 2);
    CHECK(s32.passed);
    // Antisymmetric pattern: S_01 = 1 = -S_10, zero on the diagonal.
    CHECK(s32.tensor[1] == -s32.tensor[3]);
    CHECK(s32.tensor[0] == cd{0, 0});
    CHECK(verify_sign_tensor(4, 3).passed);
    CHECK_THROWS_AS(verify_sign_tensor(5, 3), DomainError);
}

TEST_CASE("canonical basis vectors") {
    const Vec v{cd{0, 0}, cd{0, 2}, cd{1, 0}};
    const Vec c = canonicalize(v);
    CHECK(c[1].imag() == doctest::Approx(0.0));
    CHECK(c[1].real() > 0.0);
    for (const InvariantBasis& b : projective_invariants(rep_cyclic_shift(4, Field::Complex))) {
        const Vec& x = b.basis[0];
        CHECK(std::abs(x[0].imag()) < 1e-12);
        CHECK(x[0].real() > 0.0);
    }
}

TEST_CASE("a non-unit-modulus twist has no invariants") {
    const LinearRep r = rep_cyclic_shift(4, Field::Complex);
    std::vector<cd> values(4);
    for (std::size_t g = 0; g < 4; ++g) values[g] = std::pow(cd{2.0, 0.0}, static_cast<double>(g));
    CHECK(twisted_nullspace(r, values).empty());
}
