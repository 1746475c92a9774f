#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "projeq/algebra.hpp"
#include "projeq/groups.hpp"
#include "projeq/random.hpp"
#include "projeq/reps.hpp"

namespace projeq {

/// One feature vector per character, in character_group order.
struct CharIndexedFeature {
    std::vector<Character> chars;
    std::vector<Vec> slots;
};

enum class Nonlinearity {
    Identity,
    Tanh,       ///< elementwise tanh, real features
    PhaseTanh,  ///< z -> tanh(|z|) z / |z|, commutes with unit complex scalars
};

Vec apply_nonlinearity(Nonlinearity s, const Vec& v);

/// Linear maps A^g in U^g for every character g of the group, each a
/// coefficient vector over equivariant_basis(rv, rw, g).
class ProjEquivLinearLayer {
public:
    ProjEquivLinearLayer(const LinearRep& rv, const LinearRep& rw);

    const std::vector<Character>& chars() const { return chars_; }
    const std::vector<Matrix>& basis(std::size_t gamma) const { return bases_[gamma]; }
    const Vec& coefficients(std::size_t gamma) const { return coeffs_[gamma]; }
    void set_coefficients(std::size_t gamma, Vec c);
    /// Draw every coefficient from N(0, 1) (real and imaginary parts over C).
    void randomize(Rng& rng);
    /// Realized map sum_k c_k B_k.
    Matrix map(std::size_t gamma) const;
    std::size_t in_dim() const { return in_dim_; }
    std::size_t out_dim() const { return out_dim_; }
    Field field() const { return field_; }
    /// Index of chars()[a] * chars()[b].
    std::size_t product(std::size_t a, std::size_t b) const { return product_[a * chars_.size() + b]; }

private:
    std::vector<Character> chars_;
    std::vector<std::vector<Matrix>> bases_;
    std::vector<Vec> coeffs_;
    std::vector<std::size_t> product_;
    std::size_t in_dim_ = 0;
    std::size_t out_dim_ = 0;
    Field field_ = Field::Real;
};

/// v^e = s(A^e x) for every character e.
CharIndexedFeature first_layer(const Vec& x, const ProjEquivLinearLayer& layer, Nonlinearity s);
/// v'^e = s(sum over g d = e of A^g v^d).
CharIndexedFeature char_conv_layer(const CharIndexedFeature& f, const ProjEquivLinearLayer& layer, Nonlinearity s);
/// w = sum_e p_e v^e
Vec select(const CharIndexedFeature& f, const Vec& p);

/// Stack of layers evaluated with first_layer then char_conv_layer.
struct CharNet {
    std::vector<ProjEquivLinearLayer> layers;
    Nonlinearity nonlinearity = Nonlinearity::Tanh;

    /// Features after every layer.
    std::vector<CharIndexedFeature> forward(const Vec& x) const;
};

/// Largest |v_k^e(rho_0(g) x) - e(g) rho_k(g) v_k^e(x)| over layers k,
/// slots e and all g, for the given per-layer output representations.
double slot_equivariance_defect(const CharNet& net, const LinearRep& rep_in, const std::vector<LinearRep>& rep_layers,
                                const Vec& x, std::size_t g);

struct EquivarianceReport {
    std::size_t checks = 0;
    std::size_t failures = 0;
    double max_sin = 0.0;
    /// Recovered scale per group element (last sample).
    std::vector<cd> lambdas;
    /// Character index matching the recovered scales, or chars.size() if none.
    std::size_t matched_character = 0;
    bool passed = false;
};

/// Tests net(rho_0(g) v) parallel to action_out(g, net(v)) for every sample
/// and g, passing when sin(angle) < tol. Recovered scalars are matched
/// against the given characters when any are supplied.
EquivarianceReport check_projective_equivariance(const std::function<Vec(const Vec&)>& net, const LinearRep& rep_in,
                                                 const std::function<Vec(std::size_t, const Vec&)>& action_out,
                                                 const std::vector<Vec>& samples, double tol,
                                                 const std::vector<Character>& chars = {});

/// Sine of the angle between two vectors; zero when both vanish.
double sin_angle(const Vec& a, const Vec& b);

}  // namespace projeq
