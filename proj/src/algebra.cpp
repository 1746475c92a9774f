#include "projeq/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace projeq {

namespace {

std::string shape_str(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

void require_same_field(const Matrix& a, const Matrix& b, const char* op) {
    if (a.field() != b.field()) {
        throw FieldError(std::string(op) + ": field mismatch (" + to_string(a.field()) + " vs " +
                         to_string(b.field()) + ")");
    }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                             shape_str(b));
    }
}

}  // namespace

const char* to_string(Field f) { return f == Field::Real ? "real" : "complex"; }

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, Field field)
    : rows_(rows), cols_(cols), field_(field), data_(rows * cols, cd{0.0, 0.0}) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<cd> entries, Field field)
    : rows_(rows), cols_(cols), field_(field), data_(std::move(entries)) {
    if (data_.size() != rows * cols) {
        throw DimensionError("Matrix: entry count does not match shape");
    }
    for (const cd& z : data_) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            throw DomainError("Matrix: non-finite entry");
        }
        if (field_ == Field::Real && z.imag() != 0.0) {
            throw FieldError("Matrix: real matrix with nonzero imaginary part");
        }
    }
}

Matrix Matrix::identity(std::size_t n, Field field) {
    Matrix m(n, n, field);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::zeros(std::size_t rows, std::size_t cols, Field field) {
    return Matrix(rows, cols, field);
}

Matrix Matrix::real(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<cd> e;
    e.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("Matrix::real: ragged rows");
        for (double x : row) e.emplace_back(x, 0.0);
    }
    return Matrix(r, c, std::move(e), Field::Real);
}

Matrix Matrix::complex(std::initializer_list<std::initializer_list<cd>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<cd> e;
    e.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) throw DimensionError("Matrix::complex: ragged rows");
        e.insert(e.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(e), Field::Complex);
}

Matrix Matrix::column(const Vec& v, Field field) {
    return Matrix(v.size(), 1, v, field);
}

Vec Matrix::column_vec(std::size_t j) const {
    Vec v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

Vec Matrix::row_vec(std::size_t i) const {
    return Vec(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
               data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

Matrix Matrix::to_complex() const {
    Matrix m = *this;
    m.field_ = Field::Complex;
    return m;
}

// ---------------------------------------------------------------- Tensor

Tensor::Tensor(std::vector<std::size_t> shape, Field field) : shape_(std::move(shape)), field_(field) {
    std::size_t n = 1;
    for (std::size_t s : shape_) n *= s;
    data_.assign(n, cd{0.0, 0.0});
}

std::size_t Tensor::flat_index(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw DimensionError("Tensor: index rank mismatch");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        if (index[a] >= shape_[a]) throw DimensionError("Tensor: index out of range");
        flat = flat * shape_[a] + index[a];
    }
    return flat;
}

// ---------------------------------------------------------------- kernels

Matrix matmul(const Matrix& a, const Matrix& b) {
    require_same_field(a, b, "matmul");
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions differ (" + shape_str(a) + " * " +
                             shape_str(b) + ")");
    }
    Matrix c(a.rows(), b.cols(), a.field());
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cd* crow = &c(i, 0);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cd aik = a(i, k);
            // permutation and twisted-permutation tables are mostly zeros
            if (aik == cd{0.0, 0.0}) continue;
            const cd* brow = &b(k, 0);
            for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Vec matvec(const Matrix& a, const Vec& x) {
    if (a.cols() != x.size()) throw DimensionError("matvec: dimension mismatch");
    Vec y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cd s = 0.0;
        for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * x[k];
        y[i] = s;
    }
    return y;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    require_same_field(a, b, "kron");
    Matrix c(a.rows() * b.rows(), a.cols() * b.cols(), a.field());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cd aij = a(i, j);
            if (aij == cd{0.0, 0.0}) continue;
            for (std::size_t p = 0; p < b.rows(); ++p)
                for (std::size_t q = 0; q < b.cols(); ++q)
                    c(i * b.rows() + p, j * b.cols() + q) = aij * b(p, q);
        }
    return c;
}

Matrix conj_transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows(), a.field());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = std::conj(a(i, j));
    return t;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows(), a.field());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_field(a, b, "add");
    require_same_shape(a, b, "add");
    Matrix c = a;
    auto ce = c.entries();
    auto be = b.entries();
    for (std::size_t i = 0; i < ce.size(); ++i) ce[i] += be[i];
    return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
    require_same_field(a, b, "subtract");
    require_same_shape(a, b, "subtract");
    Matrix c = a;
    auto ce = c.entries();
    auto be = b.entries();
    for (std::size_t i = 0; i < ce.size(); ++i) ce[i] -= be[i];
    return c;
}

Matrix scale(const Matrix& a, cd s) {
    if (a.field() == Field::Real && s.imag() != 0.0) {
        throw FieldError("scale: complex scalar applied to a real matrix");
    }
    Matrix c = a;
    for (cd& z : c.entries()) z *= s;
    return c;
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
    require_same_field(a, b, "block_diag");
    Matrix c(a.rows() + b.rows(), a.cols() + b.cols(), a.field());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) c(a.rows() + i, a.cols() + j) = b(i, j);
    return c;
}

cd trace(const Matrix& a) {
    if (!a.is_square()) throw DimensionError("trace: matrix not square");
    cd t = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (const cd& z : a.entries()) m = std::max(m, std::abs(z));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    auto ae = a.entries();
    auto be = b.entries();
    for (std::size_t i = 0; i < ae.size(); ++i) m = std::max(m, std::abs(ae[i] - be[i]));
    return m;
}

double norm_inf(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += std::abs(a(i, j));
        m = std::max(m, s);
    }
    return m;
}

// ---------------------------------------------------------------- vectors

cd dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    cd s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double norm(const Vec& v) {
    double s = 0.0;
    for (const cd& z : v) s += std::norm(z);
    return std::sqrt(s);
}

Vec scaled(const Vec& v, cd s) {
    Vec r = v;
    for (cd& z : r) z *= s;
    return r;
}

Vec axpy(cd alpha, const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
    Vec r = y;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += alpha * x[i];
    return r;
}

double max_abs_diff(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("max_abs_diff: length mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---------------------------------------------------------------- subspaces

namespace {

// One modified Gram-Schmidt sweep of v against an orthonormal set.
void project_out(Vec& v, const std::vector<Vec>& basis) {
    for (const Vec& q : basis) {
        const cd c = dot(q, v);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
    }
}

}  // namespace

std::vector<Vec> orthonormalize(const std::vector<Vec>& vs, double tol) {
    std::vector<Vec> basis;
    for (const Vec& v0 : vs) {
        const double n0 = norm(v0);
        if (n0 == 0.0) continue;
        Vec v = v0;
        project_out(v, basis);
        project_out(v, basis);  // re-orthogonalization pass
        const double n = norm(v);
        if (n <= tol * n0) continue;
        for (cd& z : v) z /= n;
        basis.push_back(std::move(v));
    }
    return basis;
}

std::vector<Vec> rref_nullspace(const Matrix& a, double tol) {
    if (!(tol > 0.0)) throw DomainError("rref_nullspace: tolerance must be positive");
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    const double threshold = tol * max_abs(a);

    Matrix r = a;
    std::vector<std::size_t> pivot_cols;
    std::vector<bool> is_pivot(n, false);
    std::size_t row = 0;
    for (std::size_t c = 0; c < n && row < m; ++c) {
        std::size_t p = row;
        double best = std::abs(r(row, c));
        for (std::size_t i = row + 1; i < m; ++i) {
            const double v = std::abs(r(i, c));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best <= threshold || best == 0.0) continue;
        if (p != row)
            for (std::size_t j = 0; j < n; ++j) std::swap(r(p, j), r(row, j));
        const cd inv = 1.0 / r(row, c);
        for (std::size_t j = c; j < n; ++j) r(row, j) *= inv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == row) continue;
            const cd f = r(i, c);
            if (f == cd{0.0, 0.0}) continue;
            for (std::size_t j = c; j < n; ++j) r(i, j) -= f * r(row, j);
        }
        pivot_cols.push_back(c);
        is_pivot[c] = true;
        ++row;
    }

    std::vector<Vec> raw;
    for (std::size_t f = 0; f < n; ++f) {
        if (is_pivot[f]) continue;
        Vec x(n, cd{0.0, 0.0});
        x[f] = 1.0;
        for (std::size_t t = 0; t < pivot_cols.size(); ++t) x[pivot_cols[t]] = -r(t, f);
        raw.push_back(std::move(x));
    }
    return orthonormalize(raw, 1e-12);
}

std::vector<Vec> column_space_basis(const Matrix& a, double tol) {
    if (!(tol > 0.0)) throw DomainError("column_space_basis: tolerance must be positive");
    std::vector<Vec> cols;
    cols.reserve(a.cols());
    double max_norm = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        cols.push_back(a.column_vec(j));
        max_norm = std::max(max_norm, norm(cols.back()));
    }
    std::vector<Vec> basis;
    if (max_norm == 0.0) return basis;
    const double threshold = tol * max_norm;
    std::vector<bool> used(cols.size(), false);
    while (basis.size() < a.rows()) {
        std::size_t best_j = cols.size();
        double best = threshold;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (used[j]) continue;
            const double nj = norm(cols[j]);
            if (nj > best) {
                best = nj;
                best_j = j;
            }
        }
        if (best_j == cols.size()) break;
        used[best_j] = true;
        Vec q = cols[best_j];
        project_out(q, basis);
        const double nq = norm(q);
        if (nq <= threshold) continue;
        for (cd& z : q) z /= nq;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (used[j]) continue;
            const cd c = dot(q, cols[j]);
            for (std::size_t i = 0; i < q.size(); ++i) cols[j][i] -= c * q[i];
        }
        basis.push_back(std::move(q));
    }
    return basis;
}

double residual_norm(const Vec& v, const std::vector<Vec>& orthonormal_basis) {
    Vec r = v;
    project_out(r, orthonormal_basis);
    project_out(r, orthonormal_basis);
    return norm(r);
}

bool subspace_equal(const std::vector<Vec>& b1, const std::vector<Vec>& b2, double tol) {
    std::size_t dim = 0;
    for (const auto* set : {&b1, &b2})
        for (const Vec& v : *set) {
            if (dim == 0) dim = v.size();
            if (v.size() != dim) throw DimensionError("subspace_equal: vector length mismatch");
        }
    const std::vector<Vec> q1 = orthonormalize(b1, 1e-12);
    const std::vector<Vec> q2 = orthonormalize(b2, 1e-12);
    auto contained = [tol](const std::vector<Vec>& vs, const std::vector<Vec>& q) {
        for (const Vec& v : vs) {
            const double n = norm(v);
            if (n == 0.0) continue;
            if (residual_norm(v, q) / n >= tol) return false;
        }
        return true;
    };
    return contained(b1, q2) && contained(b2, q1);
}

Matrix from_columns(const std::vector<Vec>& cols, Field field) {
    if (cols.empty()) return Matrix(0, 0, field);
    const std::size_t n = cols.front().size();
    Matrix m(n, cols.size(), field);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].size() != n) throw DimensionError("from_columns: ragged columns");
        for (std::size_t i = 0; i < n; ++i) m(i, j) = cols[j][i];
    }
    return m;
}

}  // namespace projeq
