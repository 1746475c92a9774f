#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "projeq/data.hpp"
#include "projeq/spinor_net.hpp"
#include "projeq/train.hpp"
#include "projeq/vierer.hpp"

namespace projeq {

// ---------------------------------------------------------------- flip classification

struct FlipExperimentConfig {
    FlipNetConfig net{VisionModel::Vierer, {4, 4, 4, 11}, 1.0};
    /// Empty means synthetic glyphs; otherwise a directory holding the
    /// MNIST IDX files (train-images-idx3-ubyte and friends).
    std::string mnist_dir;
    std::size_t train_count = 5000;
    std::size_t eval_count = 1000;
    GlyphOptions glyphs;
    TrainConfig train{30, 32, 250, AdamConfig{3e-3}, LrSchedule::Cosine, 0, {}};
};

/// Offset separating eval sample indices from train indices in the
/// generators' (seed, index) keying.
inline constexpr std::uint64_t kEvalIndexOffset = 1'000'000;

/// Flip-augmented images as batched tensors.
struct FlipSplit {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> pixels;  ///< [N, rows, cols]
    std::vector<int> labels;

    std::size_t size() const { return labels.size(); }
    nn::Tensor gather(std::span<const std::size_t> idx) const;
};

FlipSplit make_flip_split(const std::vector<FlipSample>& samples);

/// Builds both splits from glyphs or MNIST. Throws DataError on missing files.
std::pair<FlipSplit, FlipSplit> load_flip_splits(const FlipExperimentConfig& cfg);

class FlipTask : public TrainTask {
public:
    FlipTask(FlipNetConfig net, std::uint64_t seed, FlipSplit train, FlipSplit eval);

    nn::ParamStore& params() override { return net_.params(); }
    std::size_t train_size() const override { return train_.size(); }
    std::size_t eval_size() const override { return eval_.size(); }
    BatchResult batch(nn::Tape& tape, std::span<const std::size_t> indices, bool training) override;
    std::vector<std::pair<std::string, nn::Tensor>> buffers() const override;

    FlipNet& net() { return net_; }

private:
    FlipNet net_;
    FlipSplit train_, eval_;
    std::vector<double> weights_;
};

struct RunResult {
    std::vector<EpochMetrics> history;
    std::size_t parameter_count = 0;
    nlohmann::json summary;
};

/// Trains one model. When out_dir is nonempty, writes <stem>.csv,
/// <stem>.pjeq and <stem>.json there.
RunResult run_flip_experiment(const FlipExperimentConfig& cfg, const std::string& out_dir = {},
                              const std::string& stem = {},
                              const std::function<void(const EpochMetrics&)>& on_epoch = {});

// ---------------------------------------------------------------- spinor regression

struct SpinorExperimentConfig {
    SpinorVariant variant = SpinorVariant::SquaredFeatures;
    double noise = 0.0;
    /// Train on randomly rotated clouds as well; evaluation is always rotated.
    bool augment = false;
    std::size_t train_per_epoch = 128;
    std::size_t eval_count = 256;
    /// A prediction counts as correct when its sign-invariant loss is below this.
    double hit_threshold = 0.25;
    TrainConfig train{300, 32, 256, AdamConfig{1e-2}, LrSchedule::Constant, 0, {}};
};

/// Train clouds are redrawn every epoch from (seed, epoch); eval clouds are fixed.
class SpinorTask : public TrainTask {
public:
    explicit SpinorTask(const SpinorExperimentConfig& cfg);

    nn::ParamStore& params() override { return net_.params(); }
    std::size_t train_size() const override { return train_.size(); }
    std::size_t eval_size() const override { return eval_.size(); }
    void begin_epoch(std::size_t epoch) override;
    BatchResult batch(nn::Tape& tape, std::span<const std::size_t> indices, bool training) override;

    SpinorNet& net() { return net_; }

private:
    SpinorExperimentConfig cfg_;
    SpinorNet net_;
    std::vector<SpinorSample> train_, eval_;
};

RunResult run_spinor_experiment(const SpinorExperimentConfig& cfg, const std::string& out_dir = {},
                                const std::string& stem = {},
                                const std::function<void(const EpochMetrics&)>& on_epoch = {});

/// Total scalar count over all parameter tensors.
std::size_t parameter_count(const nn::ParamStore& params);

}  // namespace projeq
