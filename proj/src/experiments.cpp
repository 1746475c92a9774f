#include "projeq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "projeq/errors.hpp"
#include "projeq/serialize.hpp"

namespace projeq {

namespace fs = std::filesystem;

std::size_t parameter_count(const nn::ParamStore& params) {
    std::size_t n = 0;
    for (const auto& e : params.entries()) n += e.value.size();
    return n;
}

namespace {

std::size_t argmax_row(const nn::Tensor& x, std::size_t row) {
    const std::size_t k = x.shape[1];
    const double* p = x.data.data() + row * k;
    return static_cast<std::size_t>(std::max_element(p, p + k) - p);
}

nlohmann::json history_json(const std::vector<EpochMetrics>& history) {
    auto a = nlohmann::json::array();
    for (const EpochMetrics& m : history)
        a.push_back({{"epoch", m.epoch},
                     {"train_loss", m.train_loss},
                     {"train_accuracy", m.train_accuracy},
                     {"eval_loss", m.eval_loss},
                     {"eval_accuracy", m.eval_accuracy}});
    return a;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write '" + p.string() + "'");
    f << text;
}

void write_outputs(const std::string& out_dir, const std::string& stem, const TrainTask& task,
                   const nn::ParamStore& params, RunResult& r) {
    if (out_dir.empty()) return;
    fs::create_directories(out_dir);
    const fs::path base = fs::path(out_dir) / stem;
    std::ostringstream csv;
    write_metrics_csv(csv, r.history);
    write_text(base.string() + ".csv", csv.str());
    save_checkpoint(base.string() + ".pjeq", params, task.buffers());
    write_text(base.string() + ".json", dump_json(r.summary));
}

FlipSplit load_mnist_split(const std::string& dir, const char* prefix, std::size_t limit, std::uint64_t seed,
                           std::uint64_t first_index) {
    const fs::path d(dir);
    const std::string img = (d / (std::string(prefix) + "-images-idx3-ubyte")).string();
    const std::string lab = (d / (std::string(prefix) + "-labels-idx1-ubyte")).string();
    return make_flip_split(gen_flip_dataset(load_idx_pair(img, lab, limit), seed, first_index));
}

}  // namespace

nn::Tensor FlipSplit::gather(std::span<const std::size_t> idx) const {
    const std::size_t hw = rows * cols;
    nn::Tensor t({idx.size(), rows, cols});
    for (std::size_t i = 0; i < idx.size(); ++i)
        std::copy_n(pixels.begin() + static_cast<std::ptrdiff_t>(idx[i] * hw), hw, t.data.begin() + static_cast<std::ptrdiff_t>(i * hw));
    return t;
}

FlipSplit make_flip_split(const std::vector<FlipSample>& samples) {
    FlipSplit s;
    if (samples.empty()) return s;
    s.rows = samples.front().rows;
    s.cols = samples.front().cols;
    s.pixels.reserve(samples.size() * s.rows * s.cols);
    for (const FlipSample& f : samples) {
        if (f.rows != s.rows || f.cols != s.cols) throw DimensionError("make_flip_split: images differ in size");
        s.pixels.insert(s.pixels.end(), f.image.begin(), f.image.end());
        s.labels.push_back(f.label);
    }
    return s;
}

std::pair<FlipSplit, FlipSplit> load_flip_splits(const FlipExperimentConfig& cfg) {
    const std::uint64_t seed = cfg.train.seed;
    if (!cfg.mnist_dir.empty())
        return {load_mnist_split(cfg.mnist_dir, "train", cfg.train_count, seed, 0),
                load_mnist_split(cfg.mnist_dir, "t10k", cfg.eval_count, seed, kEvalIndexOffset)};
    return {make_flip_split(gen_flip_dataset(synthetic_glyphs(cfg.train_count, seed, 0, cfg.glyphs), seed, 0)),
            make_flip_split(gen_flip_dataset(synthetic_glyphs(cfg.eval_count, seed, kEvalIndexOffset, cfg.glyphs), seed,
                                             kEvalIndexOffset))};
}

FlipTask::FlipTask(FlipNetConfig net, std::uint64_t seed, FlipSplit train, FlipSplit eval)
    : net_(std::move(net), seed), train_(std::move(train)), eval_(std::move(eval)),
      weights_(kFlipClassWeights.begin(), kFlipClassWeights.end()) {
    if (net_.classes() != kFlipClasses)
        throw ConfigError("flip task needs " + std::to_string(kFlipClasses) + " output classes");
}

BatchResult FlipTask::batch(nn::Tape& tape, std::span<const std::size_t> indices, bool training) {
    const FlipSplit& split = training ? train_ : eval_;
    std::vector<int> labels(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) labels[i] = split.labels[indices[i]];
    nn::Var logits = net_.forward(tape, split.gather(indices), training);
    BatchResult r;
    r.loss = nn::weighted_softmax_xent(logits, labels, weights_);
    const nn::Tensor& x = logits.value();
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (argmax_row(x, i) == static_cast<std::size_t>(labels[i])) r.correct += 1.0;
    return r;
}

std::vector<std::pair<std::string, nn::Tensor>> FlipTask::buffers() const {
    const nn::BatchNormState& bn = net_.bn_state();
    return {{"bn.running_mean", nn::Tensor({bn.running_mean.size()}, bn.running_mean)},
            {"bn.running_var", nn::Tensor({bn.running_var.size()}, bn.running_var)}};
}

RunResult run_flip_experiment(const FlipExperimentConfig& cfg, const std::string& out_dir, const std::string& stem,
                              const std::function<void(const EpochMetrics&)>& on_epoch) {
    auto [train, eval] = load_flip_splits(cfg);
    FlipTask task(cfg.net, cfg.train.seed, std::move(train), std::move(eval));
    RunResult r;
    r.parameter_count = parameter_count(task.params());
    r.history = train_loop(task, cfg.train, on_epoch);
    const EpochMetrics last = r.history.empty() ? EpochMetrics{} : r.history.back();
    r.summary = {{"experiment", "flip"},
                 {"model", to_string(cfg.net.model)},
                 {"widths", cfg.net.widths},
                 {"data", cfg.mnist_dir.empty() ? "synthetic" : "mnist"},
                 {"train_count", task.train_size()},
                 {"eval_count", task.eval_size()},
                 {"seed", cfg.train.seed},
                 {"epochs", cfg.train.epochs},
                 {"batch_size", cfg.train.batch_size},
                 {"learning_rate", cfg.train.adam.lr},
                 {"lr_schedule", to_string(cfg.train.schedule)},
                 {"parameter_count", r.parameter_count},
                 {"final_train_accuracy", last.train_accuracy},
                 {"final_eval_accuracy", last.eval_accuracy},
                 {"final_eval_loss", last.eval_loss},
                 {"history", history_json(r.history)}};
    write_outputs(out_dir, stem, task, task.params(), r);
    return r;
}

SpinorTask::SpinorTask(const SpinorExperimentConfig& cfg)
    : cfg_(cfg), net_(cfg.variant, cfg.train.seed),
      eval_(gen_spinor_dataset(cfg.noise, cfg.train.seed, cfg.eval_count, true, kEvalIndexOffset)) {
    if (cfg.train_per_epoch == 0) throw ConfigError("spinor task needs at least one training cloud per epoch");
    begin_epoch(1);
}

void SpinorTask::begin_epoch(std::size_t epoch) {
    train_ = gen_spinor_dataset(cfg_.noise, cfg_.train.seed, cfg_.train_per_epoch, cfg_.augment,
                                (epoch - 1) * cfg_.train_per_epoch);
}

BatchResult SpinorTask::batch(nn::Tape& tape, std::span<const std::size_t> indices, bool training) {
    const std::vector<SpinorSample>& src = training ? train_ : eval_;
    std::vector<SpinorSample> picked;
    picked.reserve(indices.size());
    for (std::size_t i : indices) picked.push_back(src[i]);
    const nn::Tensor target = spinor_targets(picked);
    nn::Var pred = net_.forward(tape, make_cloud_batch(picked));
    BatchResult r;
    r.loss = nn::spinor_sign_loss(pred, target);
    const nn::Tensor& p = pred.value();
    for (std::size_t b = 0; b < picked.size(); ++b) {
        double dm = 0.0, dp = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            const double x = p.data[b * 4 + k], t = target.data[b * 4 + k];
            dm += (x - t) * (x - t);
            dp += (x + t) * (x + t);
        }
        if (std::sqrt(std::min(dm, dp)) < cfg_.hit_threshold) r.correct += 1.0;
    }
    return r;
}

RunResult run_spinor_experiment(const SpinorExperimentConfig& cfg, const std::string& out_dir, const std::string& stem,
                                const std::function<void(const EpochMetrics&)>& on_epoch) {
    if (cfg.noise < 0.0 || cfg.noise > kMaxSpinorNoise)
        throw ConfigError("noise must lie in [0, " + std::to_string(kMaxSpinorNoise) + "]");
    SpinorTask task(cfg);
    RunResult r;
    r.parameter_count = parameter_count(task.params());
    r.history = train_loop(task, cfg.train, on_epoch);
    const EpochMetrics last = r.history.empty() ? EpochMetrics{} : r.history.back();
    r.summary = {{"experiment", "spinor"},
                 {"variant", to_string(cfg.variant)},
                 {"noise", cfg.noise},
                 {"augment", cfg.augment},
                 {"train_per_epoch", cfg.train_per_epoch},
                 {"eval_count", cfg.eval_count},
                 {"hit_threshold", cfg.hit_threshold},
                 {"seed", cfg.train.seed},
                 {"epochs", cfg.train.epochs},
                 {"batch_size", cfg.train.batch_size},
                 {"learning_rate", cfg.train.adam.lr},
                 {"lr_schedule", to_string(cfg.train.schedule)},
                 {"parameter_count", r.parameter_count},
                 {"final_train_loss", last.train_loss},
                 {"final_eval_loss", last.eval_loss},
                 {"final_eval_accuracy", last.eval_accuracy},
                 {"history", history_json(r.history)}};
    write_outputs(out_dir, stem, task, task.params(), r);
    return r;
}

}  // namespace projeq
