#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "projeq/errors.hpp"

namespace projeq {

using cd = std::complex<double>;

enum class Field { Real, Complex };

const char* to_string(Field f);

/// The smallest field containing both arguments.
inline Field join(Field a, Field b) {
    return (a == Field::Complex || b == Field::Complex) ? Field::Complex : Field::Real;
}

/// Default relative tolerance for rank decisions.
inline constexpr double kDefaultTol = 1e-10;

using Vec = std::vector<cd>;

/// Dense row-major matrix over R or C.
///
/// Entries are always stored as complex pairs. A Real-tagged matrix is
/// guaranteed to carry zero imaginary parts; operations never promote a
/// Real operand to Complex on their own, use to_complex() for that.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, Field field = Field::Real);
    Matrix(std::size_t rows, std::size_t cols, std::vector<cd> entries, Field field);

    static Matrix identity(std::size_t n, Field field = Field::Real);
    static Matrix zeros(std::size_t rows, std::size_t cols, Field field = Field::Real);
    /// Real matrix from nested initializer rows.
    static Matrix real(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix complex(std::initializer_list<std::initializer_list<cd>> rows);
    /// Column matrix holding v.
    static Matrix column(const Vec& v, Field field);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Field field() const { return field_; }
    bool is_square() const { return rows_ == cols_; }

    cd& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cd& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const cd> entries() const { return data_; }
    std::span<cd> entries() { return data_; }

    Vec column_vec(std::size_t j) const;
    Vec row_vec(std::size_t i) const;

    Matrix to_complex() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Field field_ = Field::Real;
    std::vector<cd> data_;
};

/// Dense tensor with row-major (last axis fastest) layout.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<std::size_t> shape, Field field = Field::Real);

    const std::vector<std::size_t>& shape() const { return shape_; }
    Field field() const { return field_; }
    std::size_t size() const { return data_.size(); }

    std::size_t flat_index(std::span<const std::size_t> index) const;
    cd& at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }
    const cd& at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

    std::span<const cd> entries() const { return data_; }
    std::span<cd> entries() { return data_; }

    Vec flatten() const { return data_; }

private:
    std::vector<std::size_t> shape_;
    Field field_ = Field::Real;
    std::vector<cd> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Vec matvec(const Matrix& a, const Vec& x);
Matrix kron(const Matrix& a, const Matrix& b);
Matrix conj_transpose(const Matrix& a);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, cd s);
/// Block-diagonal matrix with a in the upper-left and b in the lower-right.
Matrix block_diag(const Matrix& a, const Matrix& b);
cd trace(const Matrix& a);

/// Largest absolute entry.
double max_abs(const Matrix& a);
/// Largest absolute entry of a - b; throws on shape mismatch.
double max_abs_diff(const Matrix& a, const Matrix& b);
/// Induced infinity norm (max absolute row sum).
double norm_inf(const Matrix& a);

cd dot(const Vec& a, const Vec& b);  ///< <a, b> = sum conj(a_i) b_i
double norm(const Vec& v);
Vec scaled(const Vec& v, cd s);
Vec axpy(cd alpha, const Vec& x, const Vec& y);  ///< alpha x + y
double max_abs_diff(const Vec& a, const Vec& b);

/// Orthonormal basis of the nullspace of a.
///
/// Row reduction with partial pivoting; a pivot is accepted when its modulus
/// exceeds tol * max|a_ij|. The free-variable solutions are then
/// orthonormalized with two passes of modified Gram-Schmidt.
std::vector<Vec> rref_nullspace(const Matrix& a, double tol = kDefaultTol);

/// Orthonormal basis of the column space via pivoted Gram-Schmidt.
///
/// Columns whose residual norm falls to tol * (largest column norm) or
/// below are dropped.
std::vector<Vec> column_space_basis(const Matrix& a, double tol = kDefaultTol);

/// Orthonormalize vectors in order, dropping those that become negligible.
std::vector<Vec> orthonormalize(const std::vector<Vec>& vs, double tol = kDefaultTol);

/// Norm of the component of v orthogonal to span(orthonormal basis).
double residual_norm(const Vec& v, const std::vector<Vec>& orthonormal_basis);

/// True iff every vector of each basis lies in the span of the other,
/// with relative residual below tol.
bool subspace_equal(const std::vector<Vec>& b1, const std::vector<Vec>& b2, double tol);

/// Matrix whose columns are the given vectors.
Matrix from_columns(const std::vector<Vec>& cols, Field field);

}  // namespace projeq
