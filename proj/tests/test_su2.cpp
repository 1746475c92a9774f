#include <doctest.h>

#include <cmath>
#include <numbers>

#include "projeq/su2.hpp"
#include "projeq/verify.hpp"

using namespace projeq;

namespace {

double rot_diff(const Rotation3& a, const Rotation3& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
    return d;
}

}  // namespace

TEST_CASE("quaternion products") {
    Rng rng(21);
    const UnitQuaternion q = random_quaternion(rng);
    CHECK(quat_distance(quat_mul(UnitQuaternion::identity(), q), q) < 1e-15);
    CHECK(quat_distance(quat_mul(q, UnitQuaternion::identity()), q) < 1e-15);
    const UnitQuaternion e1(0.0, {1, 0, 0});
    CHECK(quat_distance(quat_mul(e1, e1), UnitQuaternion(-1.0, {0, 0, 0})) < 1e-15);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_quaternion(rng), b = random_quaternion(rng), c = random_quaternion(rng);
        CHECK(quat_distance(quat_mul(quat_mul(a, b), c), quat_mul(a, quat_mul(b, c))) < 1e-12);
    }
}

TEST_CASE("covering map") {
    CHECK(rot_diff(quat_to_rotation(UnitQuaternion::identity()), Rotation3()) == 0.0);
    const UnitQuaternion qz = axis_angle({0, 0, 1}, std::numbers::pi / 2);
    const Vec3 y = quat_to_rotation(qz).apply({1, 0, 0});
    CHECK(std::abs(y[0]) < 1e-15);
    CHECK(y[1] == doctest::Approx(1.0));
    const Vec3 yq = quat_rotate(qz, {1, 0, 0});
    CHECK(std::abs(yq[1] - 1.0) < 1e-15);
    Rng rng(22);
    for (int i = 0; i < 200; ++i) {
        const auto a = random_quaternion(rng), b = random_quaternion(rng);
        CHECK(rot_diff(quat_to_rotation(quat_mul(a, b)), rotation_compose(quat_to_rotation(a), quat_to_rotation(b))) < 1e-10);
    }
}

TEST_CASE("rotation to quaternion") {
    const UnitQuaternion id = rotation_to_quat(Rotation3());
    CHECK(id.alpha() == doctest::Approx(1.0));
    Rng rng(23);
    for (int i = 0; i < 1000; ++i) {
        const auto q = random_quaternion(rng);
        const Rotation3 r = quat_to_rotation(q);
        const UnitQuaternion back = rotation_to_quat(r);
        CHECK(back.alpha() >= 0.0);
        CHECK(std::min(quat_distance(back, q), quat_distance(back, -q)) < 1e-9);
        CHECK(rot_diff(quat_to_rotation(-q), r) < 1e-12);
    }
    Mat3 bad{{{1, 0, 0}, {0, 1, 0}, {0, 0, -1}}};
    CHECK_THROWS_AS(Rotation3{bad}, DomainError);
}

TEST_CASE("square roots and commutators") {
    CHECK(quat_distance(quat_sqrt(UnitQuaternion::identity()), UnitQuaternion::identity()) == 0.0);
    const UnitQuaternion minus(-1.0, {0, 0, 0});
    const UnitQuaternion r = quat_sqrt(minus);
    CHECK(quat_distance(r, UnitQuaternion(0.0, {1, 0, 0})) < 1e-15);
    CHECK(quat_distance(quat_mul(r, r), minus) < 1e-15);

    Rng rng(24);
    std::vector<UnitQuaternion> qs{UnitQuaternion::identity(), minus};
    for (int i = 0; i < 1000; ++i) qs.push_back(random_quaternion(rng));
    for (const auto& q : qs) {
        const auto s = quat_sqrt(q);
        CHECK(quat_distance(quat_mul(s, s), q) < 1e-12);
        const auto [a, b] = commutator_decompose(q);
        const auto c = quat_mul(quat_mul(a, b), quat_mul(quat_inverse(a), quat_inverse(b)));
        CHECK(quat_distance(c, q) < 1e-10);
    }
}

TEST_CASE("Wigner matrices") {
    Rng rng(25);
    for (int twice = 0; twice <= 4; ++twice) {
        const IrrepLevel l(twice);
        CHECK(max_abs_diff(wigner(l, UnitQuaternion::identity()), Matrix::identity(l.dim(), Field::Complex)) < 1e-14);
        for (int i = 0; i < 50; ++i) {
            const auto a = random_quaternion(rng), b = random_quaternion(rng);
            CHECK(max_abs_diff(wigner(l, quat_mul(a, b)), matmul(wigner(l, a), wigner(l, b))) < 1e-9);
            const Matrix w = wigner(l, a);
            CHECK(max_abs_diff(wigner(l, -a), l.is_integer() ? w : scale(w, -1.0)) < 1e-12);
        }
    }
    CHECK_THROWS_AS(IrrepLevel(5), DomainError);
}

TEST_CASE("Clebsch-Gordan tables") {
    const CGTable& t = clebsch_gordan(IrrepLevel(2), IrrepLevel(2));
    const Vec scalar = t.block_rows(IrrepLevel(0)).row_vec(0);
    const double expect[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(scalar[i] * std::sqrt(3.0) - expect[i]) < 1e-12);

    // (1/2, 1/2) -> V0 + V1 with the singlet (0, 1, -1, 0) / sqrt 2.
    const CGTable& h = clebsch_gordan(IrrepLevel(1), IrrepLevel(1));
    REQUIRE(h.blocks.size() == 2);
    CHECK(h.blocks[0].level == IrrepLevel(0));
    CHECK(h.blocks[1].level == IrrepLevel(2));
    const Vec singlet = h.block_rows(IrrepLevel(0)).row_vec(0);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(singlet[0]) < 1e-15);
    CHECK(std::abs(singlet[1] - s) < 1e-12);
    CHECK(std::abs(singlet[2] + s) < 1e-12);
    CHECK(std::abs(singlet[3]) < 1e-15);

    for (int b = 0; b <= 2; ++b) {
        const CGTable& z = clebsch_gordan(IrrepLevel(0), IrrepLevel(b));
        CHECK(max_abs_diff(z.c, Matrix::identity(b + 1, Field::Complex)) < 1e-14);
    }
    for (const auto& c : check_su2(3)) CHECK_MESSAGE(c.passed, c.name);
}

TEST_CASE("spherical harmonics and spinor squares") {
    Rng rng(26);
    const auto e3 = spherical_harmonic(1, {0, 0, 2});
    CHECK(e3 == std::vector<double>{0, 0, 1});
    for (int i = 0; i < 50; ++i) {
        const auto q = random_quaternion(rng);
        const Rotation3 r = quat_to_rotation(q);
        const Vec3 x{rng.normal(), rng.normal(), rng.normal()};
        CHECK(spherical_harmonic(0, r.apply(x))[0] == 1.0);
        const auto a = spherical_harmonic(1, x), b = spherical_harmonic(1, r.apply(x));
        for (std::size_t k = 0; k < 3; ++k) {
            double y = 0;
            for (std::size_t j = 0; j < 3; ++j) y += r(k, j) * a[j];
            CHECK(std::abs(y - b[k]) < 1e-10);
        }
        const Spinor sp{cd{rng.normal(), rng.normal()}, cd{rng.normal(), rng.normal()}};
        const SpinorSquare p = spinor_square(sp), m = spinor_square({-sp[0], -sp[1]});
        CHECK(p.scalar == m.scalar);
        CHECK(p.vector == m.vector);
        CHECK(std::abs(p.scalar) < 1e-12);
        const SpinorSquare rot = spinor_square(spinor_rotate(q, sp));
        for (std::size_t k = 0; k < 3; ++k) {
            cd y = 0;
            for (std::size_t j = 0; j < 3; ++j) y += r(k, j) * p.vector[j];
            CHECK(std::abs(y - rot.vector[k]) < 1e-9);
        }
    }
    const SpinorSquare up = spinor_square({cd{1, 0}, cd{0, 0}});
    CHECK(std::abs(up.scalar) == 0.0);
}
