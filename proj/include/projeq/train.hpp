#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "projeq/autodiff.hpp"

namespace projeq {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction; moment buffers keyed by parameter name.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    /// Applies one update from the accumulated gradients. Throws
    /// DivergenceError naming the parameter when a gradient is not finite;
    /// no parameter is modified in that case.
    void step(nn::ParamStore& params);
    std::size_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

private:
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::map<std::string, std::vector<double>> m_, v_;
};

struct EpochMetrics {
    std::size_t epoch = 0;  ///< 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double eval_loss = 0.0;
    double eval_accuracy = 0.0;
};

/// Loss node of one minibatch and the number of correct predictions in it.
struct BatchResult {
    nn::Var loss;
    double correct = 0.0;
};

/// A model bound to its train and eval data.
class TrainTask {
public:
    virtual ~TrainTask() = default;
    virtual nn::ParamStore& params() = 0;
    virtual std::size_t train_size() const = 0;
    virtual std::size_t eval_size() const = 0;
    /// Called before each epoch (1-based), e.g. to redraw noisy samples.
    virtual void begin_epoch(std::size_t /*epoch*/) {}
    /// Forward pass over the given indices of the train split (training =
    /// true) or the eval split.
    virtual BatchResult batch(nn::Tape& tape, std::span<const std::size_t> indices, bool training) = 0;
    /// Non-trainable tensors to store next to the parameters in checkpoints.
    virtual std::vector<std::pair<std::string, nn::Tensor>> buffers() const { return {}; }
};

enum class LrSchedule {
    Constant,
    /// Half-cosine decay per epoch: lr (1 + cos(pi (epoch - 1) / epochs)) / 2.
    Cosine,
};
std::string to_string(LrSchedule s);
LrSchedule parse_lr_schedule(const std::string& s);

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    std::size_t eval_batch_size = 250;
    AdamConfig adam;
    LrSchedule schedule = LrSchedule::Constant;
    std::uint64_t seed = 0;
    /// Where to write the last good parameters when training diverges; empty to skip.
    std::string divergence_checkpoint;
};

/// Learning rate used throughout the given 1-based epoch.
double scheduled_lr(const TrainConfig& cfg, std::size_t epoch);

/// Minibatch training with a per-epoch shuffle drawn from (seed, epoch).
/// A trailing minibatch of one sample is skipped so batch statistics stay
/// defined. Losses are sample-weighted means over the epoch. Bitwise
/// deterministic for a fixed task and config.
std::vector<EpochMetrics> train_loop(TrainTask& task, const TrainConfig& cfg,
                                     const std::function<void(const EpochMetrics&)>& on_epoch = {});

/// Evaluates the eval split only: (mean loss, accuracy).
std::pair<double, double> evaluate(TrainTask& task, std::size_t batch_size);

/// Fisher-Yates permutation of [0, n) keyed by (seed, epoch).
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch);

/// Rows "epoch,split,loss,accuracy" with a header line.
void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& history);

}  // namespace projeq
