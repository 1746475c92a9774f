#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "projeq/autodiff.hpp"
#include "projeq/invariants.hpp"

namespace projeq {

/// The four character-typed 3x3 filter bases of Z_2^2 acting by image flips.
///
/// Raw kernel parameters come in blocks of 9 laid out as consecutive
/// coefficient blocks, one per character in character_group order, of
/// sizes dim U^e = (4, 2, 2, 1).
struct ViererFilterBank {
    std::vector<Character> chars;
    std::vector<InvariantBasis> bases;
    std::array<std::size_t, 5> offsets{};
    /// chars[e](g) as table[e][g].
    nn::Tensor table;       // [4,4]
    /// transform[g] = sum_e table[e][g] * (basis rows of type e placed in their block), [4,9,9]
    nn::Tensor transform;
};

const ViererFilterBank& vierer_filter_bank();

/// 3x3 kernel of character type e from one 9-parameter block.
std::array<double, 9> vierer_kernel(const double* theta, std::size_t e);

enum class VisionModel { Vierer, Baseline };
std::string to_string(VisionModel m);
VisionModel parse_vision_model(const std::string& s);

struct FlipNetConfig {
    VisionModel model = VisionModel::Vierer;
    /// Output channels per conv layer; the last is the class count.
    std::vector<std::size_t> widths{8, 8, 8, 11};
    double init_gain = 1.0;
};

/// Four-layer tanh CNN with average pooling and batch norm.
///
/// The Vierer variant keeps one feature map per character of Z_2^2 and
/// combines them as v'^e = tanh(sum over g d = e of K^g * v^d); slots are
/// evaluated in the character-transform domain, where that sum is a
/// pointwise product. The baseline is the same stack with one slot and
/// unconstrained kernels. No conv layer has a bias.
class FlipNet {
public:
    FlipNet(FlipNetConfig cfg, std::uint64_t seed);

    /// Logits [B, classes] for raw images [B,H,W]; each image is mean-centered first.
    nn::Var forward(nn::Tape& tape, const nn::Tensor& images, bool training);
    /// Pooled selector outputs before batch norm, [B, classes].
    nn::Tensor pre_norm_outputs(const nn::Tensor& images);
    /// Features after each layer as [slots, C, B, H, W], slots in character order.
    std::vector<nn::Tensor> slot_features(const nn::Tensor& images);
    /// Same features from explicit per-character kernels and the sum over g d = e.
    std::vector<nn::Tensor> slot_features_direct(const nn::Tensor& images) const;

    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    nn::BatchNormState& bn_state() { return bn_; }
    const nn::BatchNormState& bn_state() const { return bn_; }
    const FlipNetConfig& config() const { return cfg_; }
    std::size_t classes() const { return cfg_.widths.back(); }
    std::size_t slots() const { return cfg_.model == VisionModel::Vierer ? 4 : 1; }
    static std::string kernel_name(std::size_t layer);

private:
    std::vector<nn::Var> layers(nn::Tape& tape, const nn::Tensor& images);
    nn::Var pooled_selected(nn::Tape& tape, const nn::Var& last);

    FlipNetConfig cfg_;
    nn::ParamStore params_;
    nn::BatchNormState bn_;
};

/// Subtract each image's mean; images [B,H,W].
nn::Tensor center_images(const nn::Tensor& images);

}  // namespace projeq
