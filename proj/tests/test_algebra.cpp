#include <doctest.h>

#include <cmath>

#include "projeq/algebra.hpp"
#include "projeq/random.hpp"

using namespace projeq;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, Field f) {
    Matrix m(r, c, f);
    for (cd& x : m.entries()) x = f == Field::Real ? cd{rng.normal(), 0} : cd{rng.normal(), rng.normal()};
    return m;
}

Vec random_vec(Rng& rng, std::size_t n) {
    Vec v(n);
    for (cd& x : v) x = rng.normal();
    return v;
}

}  // namespace

TEST_CASE("complex conjugation is multiplicative") {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const cd a{rng.normal(), rng.normal()}, b{rng.normal(), rng.normal()};
        CHECK(std::abs(std::conj(a * b) - std::conj(a) * std::conj(b)) < 1e-14);
    }
}

TEST_CASE("matrix and tensor shapes") {
    const Matrix m(2, 3, Field::Complex);
    CHECK(m.entries().size() == 6);
    const Tensor t({2, 3, 4});
    CHECK(t.size() == 24);
    const std::size_t idx[] = {1, 2, 3};
    CHECK(t.flat_index(idx) == 23);
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<cd>(3), Field::Real), DimensionError);
}

TEST_CASE("matmul") {
    Rng rng(2);
    const Matrix m = random_matrix(rng, 2, 2, Field::Real);
    CHECK(max_abs_diff(matmul(Matrix::identity(2), m), m) == 0.0);
    const Matrix swap = Matrix::real({{0, 1}, {1, 0}});
    CHECK(max_abs_diff(matmul(swap, swap), Matrix::identity(2)) == 0.0);

    const Matrix a = random_matrix(rng, 3, 3, Field::Complex), b = random_matrix(rng, 3, 3, Field::Complex);
    const Matrix c = matmul(a, b);
    double dev = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            cd s = 0;
            for (std::size_t k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            dev = std::max(dev, std::abs(s - c(i, j)));
        }
    CHECK(dev < 1e-12);
    CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), DimensionError);
    CHECK_THROWS_AS(matmul(Matrix(2, 2, Field::Real), Matrix(2, 2, Field::Complex)), FieldError);
}

TEST_CASE("kron") {
    CHECK(max_abs_diff(kron(Matrix::identity(2), Matrix::identity(3)), Matrix::identity(6)) == 0.0);
    const Matrix e00 = Matrix::real({{1, 0}, {0, 0}});
    const Matrix e11 = Matrix::real({{0, 0}, {0, 1}});
    const Matrix k = kron(e00, e11);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(k(i, j) == cd{(i == 1 && j == 1) ? 1.0 : 0.0, 0.0});
    Rng rng(3);
    const Matrix a = random_matrix(rng, 2, 2, Field::Complex), b = random_matrix(rng, 2, 2, Field::Complex);
    const Matrix c = random_matrix(rng, 2, 2, Field::Complex), d = random_matrix(rng, 2, 2, Field::Complex);
    CHECK(max_abs_diff(matmul(kron(a, b), kron(c, d)), kron(matmul(a, c), matmul(b, d))) < 1e-12);
}

TEST_CASE("conjugate transpose") {
    const Matrix r = Matrix::real({{1, 2, 3}, {4, 5, 6}});
    CHECK(max_abs_diff(conj_transpose(r), transpose(r)) == 0.0);
    const Matrix i = Matrix::complex({{cd{0, 1}}});
    CHECK(conj_transpose(i)(0, 0) == cd{0, -1});
    Rng rng(4);
    const Matrix a = random_matrix(rng, 3, 2, Field::Complex), b = random_matrix(rng, 2, 4, Field::Complex);
    CHECK(max_abs_diff(conj_transpose(matmul(a, b)), matmul(conj_transpose(b), conj_transpose(a))) < 1e-12);
}

TEST_CASE("rref nullspace") {
    CHECK(rref_nullspace(Matrix::zeros(3, 3)).size() == 3);
    CHECK(rref_nullspace(Matrix::identity(3)).empty());
    Rng rng(5);
    const Vec u = random_vec(rng, 4), v = random_vec(rng, 4);
    Matrix m(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) m(i, j) = u[i] * v[j];
    const auto ns = rref_nullspace(m);
    REQUIRE(ns.size() == 3);
    for (const Vec& x : ns) {
        CHECK(std::abs(dot(x, v)) < 1e-10);
        CHECK(std::abs(norm(x) - 1.0) < 1e-12);
    }
    CHECK(std::abs(dot(ns[0], ns[1])) < 1e-12);
}

TEST_CASE("column space basis") {
    CHECK(column_space_basis(Matrix::identity(4)).size() == 4);
    const auto ones = column_space_basis(Matrix::real({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}));
    REQUIRE(ones.size() == 1);
    for (const cd& x : ones[0]) CHECK(std::abs(std::abs(x) - 1.0 / std::sqrt(3.0)) < 1e-12);

    // P from a random orthonormal frame of a 2-dim subspace of R^5.
    Rng rng(6);
    const auto frame = orthonormalize({random_vec(rng, 5), random_vec(rng, 5)});
    const Matrix f = from_columns(frame, Field::Real);
    const Matrix p = matmul(f, conj_transpose(f));
    CHECK(max_abs_diff(matmul(p, p), p) < 1e-12);
    const auto b = column_space_basis(p);
    REQUIRE(b.size() == 2);
    for (const Vec& x : b) CHECK(max_abs_diff(matvec(p, x), x) < 1e-10);
}

TEST_CASE("subspace equality") {
    const Vec e1{1, 0, 0}, e2{0, 1, 0};
    CHECK(subspace_equal({e1, e2}, {axpy(1.0, e1, e2), axpy(-1.0, e2, e1)}, 1e-9));
    CHECK_FALSE(subspace_equal({e1}, {e2}, 1e-9));
    Rng rng(7);
    std::vector<Vec> sub{random_vec(rng, 6), random_vec(rng, 6), random_vec(rng, 6)};
    // Mix the basis by a random invertible 3x3 map.
    std::vector<Vec> mixed;
    for (int r = 0; r < 3; ++r) {
        Vec m(6);
        for (const Vec& s : sub) m = axpy(rng.normal(), s, m);
        mixed.push_back(m);
    }
    CHECK(subspace_equal(orthonormalize(sub), orthonormalize(mixed), 1e-9));
}
