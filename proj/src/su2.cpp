#include "projeq/su2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace projeq {

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

}  // namespace

// ---------------------------------------------------------------- quaternions

UnitQuaternion::UnitQuaternion(double alpha, Vec3 v) : alpha_(alpha), v_(v) {
    const double n = std::sqrt(alpha * alpha + dot3(v, v));
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("UnitQuaternion: zero or non-finite input");
    alpha_ /= n;
    for (double& x : v_) x /= n;
}

UnitQuaternion UnitQuaternion::operator-() const { return {-alpha_, {-v_[0], -v_[1], -v_[2]}}; }

UnitQuaternion quat_mul(const UnitQuaternion& q, const UnitQuaternion& p) {
    const double a = q.alpha(), b = p.alpha();
    const Vec3& v = q.vec();
    const Vec3& w = p.vec();
    const Vec3 c = cross(v, w);
    return {a * b - dot3(v, w), {a * w[0] + b * v[0] + c[0], a * w[1] + b * v[1] + c[1], a * w[2] + b * v[2] + c[2]}};
}

UnitQuaternion quat_inverse(const UnitQuaternion& q) {
    return {q.alpha(), {-q.vec()[0], -q.vec()[1], -q.vec()[2]}};
}

double quat_distance(const UnitQuaternion& q, const UnitQuaternion& p) {
    double d = std::abs(q.alpha() - p.alpha());
    for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(q.vec()[i] - p.vec()[i]));
    return d;
}

UnitQuaternion random_quaternion(Rng& rng) {
    while (true) {
        const double a = rng.normal(), x = rng.normal(), y = rng.normal(), z = rng.normal();
        if (a * a + x * x + y * y + z * z > 1e-12) return {a, {x, y, z}};
    }
}

UnitQuaternion axis_angle(const Vec3& axis, double angle) {
    const double n = norm3(axis);
    if (n == 0.0) throw DomainError("axis_angle: zero axis");
    const double s = std::sin(angle / 2.0) / n;
    return {std::cos(angle / 2.0), {axis[0] * s, axis[1] * s, axis[2] * s}};
}

// ---------------------------------------------------------------- rotations

Rotation3::Rotation3() : m_{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}} {}

Rotation3::Rotation3(const Mat3& m) : m_(m) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += m[k][i] * m[k][j];
            if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-10) throw DomainError("Rotation3: matrix is not orthogonal");
        }
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (std::abs(det - 1.0) > 1e-10) throw DomainError("Rotation3: determinant is not 1");
}

Vec3 Rotation3::apply(const Vec3& x) const {
    Vec3 y{};
    for (int i = 0; i < 3; ++i) y[i] = m_[i][0] * x[0] + m_[i][1] * x[1] + m_[i][2] * x[2];
    return y;
}

Rotation3 rotation_compose(const Rotation3& a, const Rotation3& b) {
    Mat3 m{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) m[i][j] += a(i, k) * b(k, j);
    return Rotation3(m);
}

Rotation3 quat_to_rotation(const UnitQuaternion& q) {
    const double w = q.alpha(), x = q.vec()[0], y = q.vec()[1], z = q.vec()[2];
    return Rotation3(Mat3{{{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
                           {2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
                           {2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}}});
}

UnitQuaternion rotation_to_quat(const Rotation3& r) {
    const Mat3& m = r.matrix();
    const double tr = m[0][0] + m[1][1] + m[2][2];
    double w, x, y, z;
    // Shepperd: divide by the largest of the four candidate magnitudes
    if (tr >= m[0][0] && tr >= m[1][1] && tr >= m[2][2]) {
        const double s = 2.0 * std::sqrt(1.0 + tr);
        w = s / 4.0;
        x = (m[2][1] - m[1][2]) / s;
        y = (m[0][2] - m[2][0]) / s;
        z = (m[1][0] - m[0][1]) / s;
    } else if (m[0][0] >= m[1][1] && m[0][0] >= m[2][2]) {
        const double s = 2.0 * std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]);
        w = (m[2][1] - m[1][2]) / s;
        x = s / 4.0;
        y = (m[0][1] + m[1][0]) / s;
        z = (m[0][2] + m[2][0]) / s;
    } else if (m[1][1] >= m[2][2]) {
        const double s = 2.0 * std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]);
        w = (m[0][2] - m[2][0]) / s;
        x = (m[0][1] + m[1][0]) / s;
        y = s / 4.0;
        z = (m[1][2] + m[2][1]) / s;
    } else {
        const double s = 2.0 * std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]);
        w = (m[1][0] - m[0][1]) / s;
        x = (m[0][2] + m[2][0]) / s;
        y = (m[1][2] + m[2][1]) / s;
        z = s / 4.0;
    }
    bool flip = w < 0.0;
    if (std::abs(w) < 1e-12) {
        w = 0.0;
        const double first = std::abs(x) > 1e-12 ? x : (std::abs(y) > 1e-12 ? y : z);
        flip = first < 0.0;
    }
    if (flip) {
        w = -w;
        x = -x;
        y = -y;
        z = -z;
    }
    return {w, {x, y, z}};
}

Vec3 quat_rotate(const UnitQuaternion& q, const Vec3& x) {
    // (0, x) is not unit, so expand q (0,x) q^-1 by hand
    const double a = q.alpha();
    const Vec3& v = q.vec();
    const Vec3 t = cross(v, x);
    const Vec3 u = cross(v, t);
    Vec3 y{};
    for (int i = 0; i < 3; ++i) y[i] = x[i] + 2.0 * (a * t[i] + u[i]);
    return y;
}

UnitQuaternion quat_sqrt(const UnitQuaternion& q) {
    const double a = q.alpha();
    const Vec3& v = q.vec();
    if (a >= 0.0) return {1.0 + a, v};
    const double nv = norm3(v);
    const double t = std::atan2(nv, a) / 2.0;
    const Vec3 u = nv > 0.0 ? Vec3{v[0] / nv, v[1] / nv, v[2] / nv} : Vec3{1.0, 0.0, 0.0};
    return {std::cos(t), {std::sin(t) * u[0], std::sin(t) * u[1], std::sin(t) * u[2]}};
}

std::pair<UnitQuaternion, UnitQuaternion> commutator_decompose(const UnitQuaternion& q) {
    const UnitQuaternion r = quat_sqrt(q);
    const Vec3& u = r.vec();
    Vec3 vhat{0.0, 1.0, 0.0};
    if (norm3(u) > 1e-12) {
        std::size_t axis = 0;
        for (std::size_t i = 1; i < 3; ++i)
            if (std::abs(u[i]) < std::abs(u[axis])) axis = i;
        Vec3 e{0.0, 0.0, 0.0};
        e[axis] = 1.0;
        vhat = cross(u, e);
    }
    return {r, UnitQuaternion(0.0, vhat)};
}

// ---------------------------------------------------------------- irreps

IrrepLevel::IrrepLevel(int twice) : twice_(twice) {
    if (twice < 0 || twice > 4) throw DomainError("IrrepLevel: supported levels are 0, 1/2, 1, 3/2, 2");
}

IrrepLevel IrrepLevel::from_double(double l) {
    const double t = 2.0 * l;
    if (std::abs(t - std::round(t)) > 1e-12) throw DomainError("IrrepLevel: not a half-integer");
    return IrrepLevel(static_cast<int>(std::round(t)));
}

namespace {

/// Ladder recursion in the |j, m> basis, rows grouped by J descending.
struct StandardCG {
    Matrix c;  // rows ascending J
    std::vector<CGBlock> blocks;
};

StandardCG build_standard(IrrepLevel l1, IrrepLevel l2) {
    const int j1 = l1.twice(), j2 = l2.twice();
    const std::size_t d1 = l1.dim(), d2 = l2.dim(), d = d1 * d2;
    auto m_of = [](int jt, std::size_t i) { return (jt - 2 * static_cast<int>(i)) / 2.0; };
    auto lower_coef = [](double j, double m) { return std::sqrt(j * (j + 1) - m * (m - 1)); };
    auto lower = [&](const Vec& psi) {
        Vec out(d);
        for (std::size_t i = 0; i < d1; ++i)
            for (std::size_t p = 0; p < d2; ++p) {
                const cd x = psi[i * d2 + p];
                if (x == cd{0.0, 0.0}) continue;
                if (i + 1 < d1) out[(i + 1) * d2 + p] += lower_coef(j1 / 2.0, m_of(j1, i)) * x;
                if (p + 1 < d2) out[i * d2 + p + 1] += lower_coef(j2 / 2.0, m_of(j2, p)) * x;
            }
        return out;
    };

    std::vector<std::pair<int, std::vector<Vec>>> by_j;  // descending J
    std::vector<Vec> all;
    for (int jt = j1 + j2; jt >= std::abs(j1 - j2); jt -= 2) {
        Vec best;
        double best_norm = -1.0;
        for (std::size_t i = 0; i < d1; ++i)
            for (std::size_t p = 0; p < d2; ++p) {
                if (j1 - 2 * static_cast<int>(i) + j2 - 2 * static_cast<int>(p) != jt) continue;
                Vec e(d);
                e[i * d2 + p] = 1.0;
                for (int pass = 0; pass < 2; ++pass)
                    for (const Vec& s : all) e = axpy(-dot(s, e), s, e);
                const double n = norm(e);
                if (n > best_norm) {
                    best_norm = n;
                    best = e;
                }
            }
        Vec top = scaled(best, 1.0 / best_norm);
        // Condon-Shortley: <j1 j1; j2 (J - j1) | J J> > 0
        const int m2t = jt - j1;
        const std::size_t p = static_cast<std::size_t>((j2 - m2t) / 2);
        if (top[p].real() < 0.0) top = scaled(top, -1.0);
        std::vector<Vec> states{top};
        const double jj = jt / 2.0;
        for (int k = 1; k <= jt; ++k) {
            const double m = jj - (k - 1);
            Vec next = scaled(lower(states.back()), 1.0 / lower_coef(jj, m));
            for (cd& x : next) x = cd{x.real(), 0.0};
            states.push_back(next);
        }
        for (const Vec& s : states) all.push_back(s);
        by_j.emplace_back(jt, std::move(states));
    }
    StandardCG out{Matrix(d, d, Field::Complex), {}};
    std::size_t row = 0;
    for (auto it = by_j.rbegin(); it != by_j.rend(); ++it) {
        out.blocks.push_back(CGBlock{IrrepLevel(it->first), row});
        for (const Vec& s : it->second) {
            for (std::size_t j = 0; j < d; ++j) out.c(row, j) = s[j];
            ++row;
        }
    }
    return out;
}

Matrix real_basis_l1() {
    const double r = 1.0 / std::numbers::sqrt2;
    return Matrix::complex({{cd{-r, 0.0}, 0.0, cd{r, 0.0}},
                            {cd{0.0, -r}, 0.0, cd{0.0, -r}},
                            {0.0, cd{1.0, 0.0}, 0.0}});
}

Matrix real_basis_l2() {
    // real quadrupole basis xy, yz, (2zz - xx - yy)/sqrt6, xz, (xx - yy)/sqrt2 on row-major 3x3
    const double r2 = 1.0 / std::numbers::sqrt2;
    const double r6 = 1.0 / std::sqrt(6.0);
    const double q[5][9] = {
        {0, r2, 0, r2, 0, 0, 0, 0, 0},
        {0, 0, 0, 0, 0, r2, 0, r2, 0},
        {-r6, 0, 0, 0, -r6, 0, 0, 0, 2 * r6},
        {0, 0, r2, 0, 0, 0, r2, 0, 0},
        {r2, 0, 0, 0, -r2, 0, 0, 0, 0},
    };
    const StandardCG s = build_standard(IrrepLevel(2), IrrepLevel(2));
    const Matrix b11 = kron(real_basis_l1(), real_basis_l1());
    const CGBlock blk = s.blocks.back();  // J = 2
    Matrix b(5, 5, Field::Complex);
    for (std::size_t m = 0; m < 5; ++m) {
        const Vec std_state = s.c.row_vec(blk.offset + m);  // real, so conj is itself
        const Vec cart = matvec(b11, std_state);
        for (std::size_t k = 0; k < 5; ++k) {
            cd acc = 0.0;
            for (std::size_t i = 0; i < 9; ++i) acc += q[k][i] * cart[i];
            b(k, m) = acc;
        }
    }
    return b;
}

CGTable build_table(IrrepLevel l1, IrrepLevel l2) {
    const StandardCG s = build_standard(l1, l2);
    const std::size_t d = l1.dim() * l2.dim();
    Matrix bout(d, d, Field::Complex);
    for (const CGBlock& blk : s.blocks) {
        const Matrix b = real_basis_change(blk.level);
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) bout(blk.offset + i, blk.offset + j) = b(i, j);
    }
    const Matrix bin = kron(real_basis_change(l1), real_basis_change(l2));
    Matrix c = matmul(matmul(bout, s.c), conj_transpose(bin));
    for (const CGBlock& blk : s.blocks) {
        cd phase = 1.0;
        for (std::size_t j = 0; j < d; ++j) {
            const cd x = c(blk.offset, j);
            if (std::abs(x) > 1e-12) {
                phase = std::conj(x) / std::abs(x);
                break;
            }
        }
        for (std::size_t i = 0; i < blk.level.dim(); ++i)
            for (std::size_t j = 0; j < d; ++j) {
                cd& x = c(blk.offset + i, j);
                x *= phase;
                if (std::abs(x.real()) < 1e-15) x = cd{0.0, x.imag()};
                if (std::abs(x.imag()) < 1e-15) x = cd{x.real(), 0.0};
            }
    }
    return CGTable{l1, l2, std::move(c), s.blocks};
}

}  // namespace

Matrix clebsch_gordan_standard(IrrepLevel l1, IrrepLevel l2) {
    if (l1.twice() + l2.twice() > 4) throw DomainError("clebsch_gordan: unsupported pair, l + l' must be <= 2");
    return build_standard(l1, l2).c;
}

Matrix real_basis_change(IrrepLevel l) {
    switch (l.twice()) {
        case 2: return real_basis_l1();
        case 4: {
            static const Matrix b2 = real_basis_l2();
            return b2;
        }
        default: return Matrix::identity(l.dim(), Field::Complex);
    }
}

Matrix CGTable::block_rows(IrrepLevel j) const {
    const CGBlock& b = block(j);
    Matrix out(j.dim(), c.cols(), Field::Complex);
    for (std::size_t i = 0; i < j.dim(); ++i)
        for (std::size_t k = 0; k < c.cols(); ++k) out(i, k) = c(b.offset + i, k);
    return out;
}

const CGBlock& CGTable::block(IrrepLevel j) const {
    for (const CGBlock& b : blocks)
        if (b.level == j) return b;
    throw DomainError("CGTable: level not present in the decomposition");
}

const CGTable& clebsch_gordan(IrrepLevel l1, IrrepLevel l2) {
    if (l1.twice() + l2.twice() > 4) throw DomainError("clebsch_gordan: unsupported pair, l + l' must be <= 2");
    static const std::vector<CGTable> tables = [] {
        std::vector<CGTable> t;
        for (int a = 0; a <= 4; ++a)
            for (int b = 0; a + b <= 4; ++b) t.push_back(build_table(IrrepLevel(a), IrrepLevel(b)));
        return t;
    }();
    for (const CGTable& t : tables)
        if (t.l1 == l1 && t.l2 == l2) return t;
    throw DomainError("clebsch_gordan: unsupported pair");
}

namespace {

Matrix top_block(const CGTable& t, IrrepLevel j, const Matrix& full) {
    const Matrix conj = matmul(matmul(t.c, full), conj_transpose(t.c));
    const std::size_t off = t.block(j).offset;
    Matrix out(j.dim(), j.dim(), Field::Complex);
    for (std::size_t a = 0; a < j.dim(); ++a)
        for (std::size_t b = 0; b < j.dim(); ++b) out(a, b) = conj(off + a, off + b);
    if (j.is_integer())
        for (cd& x : out.entries()) x = cd{x.real(), 0.0};
    return out;
}

}  // namespace

Matrix wigner(IrrepLevel l, const UnitQuaternion& q) {
    const double a = q.alpha(), v1 = q.vec()[0], v2 = q.vec()[1], v3 = q.vec()[2];
    switch (l.twice()) {
        case 0: return Matrix::identity(1, Field::Complex);
        case 1: return Matrix::complex({{cd{a, -v3}, cd{-v2, -v1}}, {cd{v2, -v1}, cd{a, v3}}});
        case 2: {
            const Rotation3 r = quat_to_rotation(q);
            Matrix m(3, 3, Field::Complex);
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) m(i, j) = r(i, j);
            return m;
        }
        case 3: {
            const CGTable& t = clebsch_gordan(IrrepLevel(1), IrrepLevel(2));
            return top_block(t, IrrepLevel(3), kron(wigner(IrrepLevel(1), q), wigner(IrrepLevel(2), q)));
        }
        default: {
            const CGTable& t = clebsch_gordan(IrrepLevel(1), IrrepLevel(3));
            return top_block(t, IrrepLevel(4), kron(wigner(IrrepLevel(1), q), wigner(IrrepLevel(3), q)));
        }
    }
}

std::vector<double> spherical_harmonic(int l, const Vec3& x) {
    if (l == 0) return {1.0};
    if (l != 1) throw DomainError("spherical_harmonic: only l = 0 and l = 1 are supported");
    const double n = norm3(x);
    if (n == 0.0) throw DomainError("spherical_harmonic: zero input at l = 1");
    return {x[0] / n, x[1] / n, x[2] / n};
}

SpinorSquare spinor_square(const Spinor& s) {
    const CGTable& t = clebsch_gordan(IrrepLevel(1), IrrepLevel(1));
    const Vec ss{s[0] * s[0], s[0] * s[1], s[1] * s[0], s[1] * s[1]};
    const Vec out = matvec(t.c, ss);
    return SpinorSquare{out[0], {out[1], out[2], out[3]}};
}

Spinor spinor_rotate(const UnitQuaternion& q, const Spinor& s) {
    const Matrix u = wigner(IrrepLevel(1), q);
    return {u(0, 0) * s[0] + u(0, 1) * s[1], u(1, 0) * s[0] + u(1, 1) * s[1]};
}

}  // namespace projeq
