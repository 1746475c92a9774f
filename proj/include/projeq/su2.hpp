#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "projeq/algebra.hpp"
#include "projeq/random.hpp"

namespace projeq {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;
using Spinor = std::array<cd, 2>;

/// Element (alpha, v) of SU(2), renormalized to unit length on construction.
class UnitQuaternion {
public:
    UnitQuaternion() = default;
    UnitQuaternion(double alpha, Vec3 v);

    double alpha() const { return alpha_; }
    const Vec3& vec() const { return v_; }

    static UnitQuaternion identity() { return {}; }
    UnitQuaternion operator-() const;

private:
    double alpha_ = 1.0;
    Vec3 v_{0.0, 0.0, 0.0};
};

/// (a, v)(b, w) = (ab - v.w, a w + b v + v x w)
UnitQuaternion quat_mul(const UnitQuaternion& q, const UnitQuaternion& p);
UnitQuaternion quat_inverse(const UnitQuaternion& q);
double quat_distance(const UnitQuaternion& q, const UnitQuaternion& p);
/// Haar-uniform draw: normalized 4D Gaussian.
UnitQuaternion random_quaternion(Rng& rng);
/// Rotation by angle about a (not necessarily unit) axis.
UnitQuaternion axis_angle(const Vec3& axis, double angle);

/// Proper rotation matrix, validated on construction.
class Rotation3 {
public:
    Rotation3();
    explicit Rotation3(const Mat3& m);

    const Mat3& matrix() const { return m_; }
    double operator()(std::size_t i, std::size_t j) const { return m_[i][j]; }
    Vec3 apply(const Vec3& x) const;

private:
    Mat3 m_;
};

Rotation3 rotation_compose(const Rotation3& a, const Rotation3& b);

/// Covering map SU(2) -> SO(3): x -> q x q^-1.
Rotation3 quat_to_rotation(const UnitQuaternion& q);
/// Preimage with alpha >= 0 (first nonzero vector component positive when alpha = 0).
UnitQuaternion rotation_to_quat(const Rotation3& r);
/// Action x -> q (0, x) q^-1 computed through quaternion products.
Vec3 quat_rotate(const UnitQuaternion& q, const Vec3& x);

/// r with r^2 = q, r = (cos t, sin t u) for q = (cos 2t, sin 2t u), t in [0, pi/2].
UnitQuaternion quat_sqrt(const UnitQuaternion& q);
/// (r, s) with r s r^-1 s^-1 = q.
std::pair<UnitQuaternion, UnitQuaternion> commutator_decompose(const UnitQuaternion& q);

/// Irrep level l in {0, 1/2, 1, 3/2, 2}, stored as 2l.
class IrrepLevel {
public:
    explicit IrrepLevel(int twice);
    static IrrepLevel from_double(double l);

    int twice() const { return twice_; }
    double value() const { return twice_ / 2.0; }
    std::size_t dim() const { return static_cast<std::size_t>(twice_) + 1; }
    bool is_integer() const { return twice_ % 2 == 0; }
    /// Real basis for integer levels, complex otherwise.
    Field field() const { return is_integer() ? Field::Real : Field::Complex; }

    bool operator==(const IrrepLevel& o) const { return twice_ == o.twice_; }

private:
    int twice_;
};

/// Irrep matrix of q. l = 1/2 uses [[a - i v3, -v2 - i v1], [v2 - i v1, a + i v3]];
/// l = 1 is the rotation matrix; l = 3/2 and l = 2 come from the top
/// Clebsch-Gordan block of (1/2) x (l - 1/2). Integer levels are returned
/// as complex matrices with zero imaginary part.
Matrix wigner(IrrepLevel l, const UnitQuaternion& q);

struct CGBlock {
    IrrepLevel level;
    std::size_t offset;
};

/// Unitary C with C (D_l(q) x D_l'(q)) C^H = diag(D_j(q)), j ascending.
struct CGTable {
    IrrepLevel l1;
    IrrepLevel l2;
    Matrix c;
    std::vector<CGBlock> blocks;

    /// Rows of C belonging to output level j.
    Matrix block_rows(IrrepLevel j) const;
    const CGBlock& block(IrrepLevel j) const;
};

/// Cached table for l + l' <= 2. Built by ladder recursion with
/// Condon-Shortley phases in the |j, m> basis (m descending), then
/// converted to the real basis on integer levels. Each output block is
/// rephased so the first nonzero entry of its first row is real positive.
const CGTable& clebsch_gordan(IrrepLevel l1, IrrepLevel l2);

/// Same recursion without basis conversion or rephasing.
Matrix clebsch_gordan_standard(IrrepLevel l1, IrrepLevel l2);

/// Unitary B mapping |l, m> coordinates to the real basis (identity for
/// half-integer l). For l = 1 the real basis is (x, y, z).
Matrix real_basis_change(IrrepLevel l);

/// l = 0 -> [1]; l = 1 -> x / |x|.
std::vector<double> spherical_harmonic(int l, const Vec3& x);

struct SpinorSquare {
    cd scalar;
    std::array<cd, 3> vector;
};

/// Clebsch-Gordan (1/2, 1/2) applied to s (x) s.
SpinorSquare spinor_square(const Spinor& s);

/// D_{1/2}(q) s.
Spinor spinor_rotate(const UnitQuaternion& q, const Spinor& s);

}  // namespace projeq
