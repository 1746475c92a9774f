#include "projeq/train.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <ostream>

#include "projeq/random.hpp"
#include "projeq/serialize.hpp"

namespace projeq {

void Adam::step(nn::ParamStore& params) {
    for (const auto& e : params.entries())
        for (std::size_t i = 0; i < e.grad.size(); ++i)
            if (!std::isfinite(e.grad.data[i]))
                throw DivergenceError("Adam: non-finite gradient in '" + e.name + "' at flat index " + std::to_string(i));
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (auto& e : params.entries()) {
        auto& m = m_[e.name];
        auto& v = v_[e.name];
        if (m.size() != e.value.size()) {
            m.assign(e.value.size(), 0.0);
            v.assign(e.value.size(), 0.0);
        }
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double g = e.grad.data[i];
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
            e.value.data[i] -= cfg_.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.eps);
        }
    }
}

std::string to_string(LrSchedule s) { return s == LrSchedule::Cosine ? "cosine" : "constant"; }

LrSchedule parse_lr_schedule(const std::string& s) {
    if (s == "constant") return LrSchedule::Constant;
    if (s == "cosine") return LrSchedule::Cosine;
    throw ConfigError("unknown learning-rate schedule '" + s + "' (expected constant or cosine)");
}

double scheduled_lr(const TrainConfig& cfg, std::size_t epoch) {
    if (cfg.schedule == LrSchedule::Constant || cfg.epochs == 0) return cfg.adam.lr;
    const double t = static_cast<double>(epoch - 1) / static_cast<double>(cfg.epochs);
    return cfg.adam.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    Rng rng(seed, Stream::Shuffle, epoch);
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    return p;
}

std::pair<double, double> evaluate(TrainTask& task, std::size_t batch_size) {
    nn::Tape tape;
    const std::size_t n = task.eval_size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    double loss = 0.0, correct = 0.0;
    for (std::size_t b0 = 0; b0 < n; b0 += batch_size) {
        const std::size_t nb = std::min(batch_size, n - b0);
        tape.clear();
        BatchResult r = task.batch(tape, std::span<const std::size_t>(idx).subspan(b0, nb), false);
        loss += r.loss.value().data[0] * static_cast<double>(nb);
        correct += r.correct;
    }
    return {n ? loss / static_cast<double>(n) : 0.0, n ? correct / static_cast<double>(n) : 0.0};
}

std::vector<EpochMetrics> train_loop(TrainTask& task, const TrainConfig& cfg,
                                     const std::function<void(const EpochMetrics&)>& on_epoch) {
    if (cfg.batch_size < 2) throw ConfigError("train_loop: batch size must be at least 2");
    if (cfg.eval_batch_size < 1) throw ConfigError("train_loop: eval batch size must be positive");
    nn::retain_heap_memory();
    Adam adam(cfg.adam);
    nn::Tape tape;
    std::vector<EpochMetrics> history;
    nn::ParamStore& params = task.params();
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        task.begin_epoch(epoch);
        adam.set_lr(scheduled_lr(cfg, epoch));
        const nn::ParamStore last_good = params;
        const auto last_buffers = task.buffers();
        const std::vector<std::size_t> order = epoch_permutation(task.train_size(), cfg.seed, epoch);
        double loss_sum = 0.0, correct = 0.0;
        std::size_t seen = 0;
        for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
            const std::size_t nb = std::min(cfg.batch_size, order.size() - b0);
            if (nb < 2) break;
            tape.clear();
            params.zero_grad();
            BatchResult r = task.batch(tape, std::span<const std::size_t>(order).subspan(b0, nb), true);
            const double l = r.loss.value().data[0];
            try {
                if (!std::isfinite(l)) throw DivergenceError("training loss became " + std::to_string(l));
                tape.backward(r.loss);
                adam.step(params);
            } catch (const DivergenceError& e) {
                if (!cfg.divergence_checkpoint.empty()) save_checkpoint(cfg.divergence_checkpoint, last_good, last_buffers);
                throw DivergenceError(std::string(e.what()) + " in epoch " + std::to_string(epoch) +
                                      (cfg.divergence_checkpoint.empty()
                                           ? std::string()
                                           : "; last good parameters written to " + cfg.divergence_checkpoint));
            }
            loss_sum += l * static_cast<double>(nb);
            correct += r.correct;
            seen += nb;
        }
        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
        m.train_accuracy = seen ? correct / static_cast<double>(seen) : 0.0;
        std::tie(m.eval_loss, m.eval_accuracy) = evaluate(task, cfg.eval_batch_size);
        history.push_back(m);
        if (on_epoch) on_epoch(m);
    }
    return history;
}

void write_metrics_csv(std::ostream& out, const std::vector<EpochMetrics>& history) {
    out << "epoch,split,loss,accuracy\n";
    char buf[128];
    for (const EpochMetrics& m : history) {
        std::snprintf(buf, sizeof buf, "%zu,train,%.9g,%.6f\n%zu,eval,%.9g,%.6f\n", m.epoch, m.train_loss,
                      m.train_accuracy, m.epoch, m.eval_loss, m.eval_accuracy);
        out << buf;
    }
}

}  // namespace projeq
