#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "projeq/autodiff.hpp"
#include "projeq/data.hpp"
#include "projeq/su2.hpp"

namespace projeq {

enum class SpinorVariant { AsScalars, AsFeatures, AsFilters, SquaredFeatures, SquaredFilters };

inline constexpr std::array<SpinorVariant, 5> kSpinorVariants{SpinorVariant::AsScalars, SpinorVariant::AsFeatures,
                                                             SpinorVariant::AsFilters, SpinorVariant::SquaredFeatures,
                                                             SpinorVariant::SquaredFilters};

/// "spinors-as-scalars", "spinors-as-features", "spinors-as-filters",
/// "squared-features", "squared-filters".
std::string to_string(SpinorVariant v);
SpinorVariant parse_spinor_variant(const std::string& s);

/// Feature types: 0 scalars (1 real), 1 spinors (4 reals: re0 im0 re1 im1),
/// 2 vectors (3 reals, Cartesian).
enum class FieldType : std::size_t { Scalar = 0, Spinor = 1, Vector = 2 };
inline constexpr std::array<std::size_t, 3> kFieldWidth{1, 4, 3};

struct TypeCounts {
    std::size_t scalars = 0;
    std::size_t spinors = 0;
    std::size_t vectors = 0;

    std::size_t operator[](FieldType t) const;
    bool operator==(const TypeCounts&) const = default;
};

struct SpinorLayerSpec {
    TypeCounts input;
    TypeCounts filter;
    TypeCounts output;
    /// Gated GeLU / sigmoid nonlinearity after the layer; the extra gate
    /// scalars are produced alongside the scalar outputs.
    bool gated = true;
};

/// The three layers of a variant, widths as in the reference architecture table.
std::vector<SpinorLayerSpec> spinor_layer_specs(SpinorVariant v);

/// Irrep level of a field type.
IrrepLevel field_level(FieldType t);

/// Real sparse form of the Clebsch-Gordan block mapping (a, b) to output
/// type out. Complex results of spinor pairs landing on scalar or vector
/// outputs are split into [real parts, imaginary parts].
struct PathTerms {
    std::vector<nn::BilinearTerm> terms;
    std::size_t dout = 0;
    bool split = false;
};
PathTerms path_terms(FieldType a, FieldType b, FieldType out);

/// Output type reachable from (input, filter) in the product decomposition.
bool path_allowed(FieldType a, FieldType b, FieldType out);

/// Features on points or edges: one [N, count, width] tensor per type;
/// a type with count 0 is absent.
struct TypedFeatures {
    std::array<nn::Var, 3> parts{};
    std::array<std::size_t, 3> counts{};

    bool has(FieldType t) const { return counts[static_cast<std::size_t>(t)] != 0; }
    const nn::Var& operator[](FieldType t) const { return parts[static_cast<std::size_t>(t)]; }
};

/// Points and neighbor pairs of a batch of clouds with a fixed point count.
struct CloudBatch {
    std::size_t clouds = 0;
    std::size_t points_per_cloud = 0;
    std::vector<Vec3> positions;   ///< clouds * points_per_cloud
    std::vector<Spinor> spinors;
    std::vector<nn::PairIndex> pairs;  ///< every ordered (i, j), j != i, within a cloud; edge = pair index

    std::size_t points() const { return positions.size(); }
    std::size_t edges() const { return pairs.size(); }
};

CloudBatch make_cloud_batch(std::span<const SpinorSample> samples);

/// Input point features and edge filters of a variant's first layer.
TypedFeatures spinor_input_features(nn::Tape& tape, SpinorVariant v, const CloudBatch& batch);
/// Edge filters for a layer with the given counts: Y0 = 1 scalars, spinor
/// s_j, unit direction x_j - x_i and, for three vector filters, the real and
/// imaginary parts of the square of s_j.
TypedFeatures spinor_edge_filters(nn::Tape& tape, const TypeCounts& counts, const CloudBatch& batch);

/// One tensor-product convolution: for every output type and every allowed
/// (input type, filter type) path, a learned weighted sum of inputs is
/// paired with a learned weighted sum of filters per output channel, the
/// pair is contracted with Clebsch-Gordan rows and summed over neighbors.
/// Scalar outputs carry a bias. When gated, GeLU acts on scalars and each
/// spinor and vector output is scaled by the sigmoid of its own gate scalar.
class SpinorLayer {
public:
    SpinorLayer(std::string prefix, SpinorLayerSpec spec);

    void init_params(nn::ParamStore& store, std::uint64_t seed, std::size_t layer_index) const;
    TypedFeatures apply(nn::Tape& tape, nn::ParamStore& store, const TypedFeatures& in, const TypedFeatures& filters,
                        const CloudBatch& batch) const;
    const SpinorLayerSpec& spec() const { return spec_; }

    /// Scalar channels computed by the layer: outputs plus gates.
    std::size_t scalar_channels() const;

private:
    struct Path {
        FieldType in, filt, out;
        PathTerms terms;
        std::size_t channels;  ///< weight sets; half the outputs for split paths
        std::string name;
    };

    std::string prefix_;
    SpinorLayerSpec spec_;
    std::vector<Path> paths_;
};

/// Three-layer spinor field network; output is the cloud mean of the last
/// layer, read as a spinor [re0, im0, re1, im1].
class SpinorNet {
public:
    SpinorNet(SpinorVariant v, std::uint64_t seed);

    /// Predicted spinors [B, 4].
    nn::Var forward(nn::Tape& tape, const CloudBatch& batch);
    /// Convenience: prediction for each sample as complex 2-vectors.
    std::vector<Spinor> predict(std::span<const SpinorSample> samples);

    SpinorVariant variant() const { return variant_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    const std::vector<SpinorLayer>& layers() const { return layers_; }

private:
    SpinorVariant variant_;
    std::vector<SpinorLayer> layers_;
    nn::ParamStore params_;
};

/// Targets of samples as [B, 4].
nn::Tensor spinor_targets(std::span<const SpinorSample> samples);

}  // namespace projeq
