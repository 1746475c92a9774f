// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Detailed measurements go to <out>/acceptance.json.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "projeq/cli.hpp"
#include "projeq/data.hpp"
#include "projeq/experiments.hpp"
#include "projeq/serialize.hpp"
#include "projeq/verify.hpp"
#include "support/gradcheck.hpp"

using namespace projeq;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
    bool passed = false;
    std::string summary;
    json detail;
};

struct Criterion {
    int id;
    std::string title;
    double budget_seconds;
    std::function<Outcome(const fs::path&)> run;
};

Outcome from_checks(const std::vector<CheckResult>& checks) {
    Outcome o;
    o.passed = !checks.empty();
    double worst = 0.0;
    std::size_t failed = 0;
    for (const CheckResult& c : checks) {
        o.detail.push_back({{"name", c.name},
                            {"reference", c.reference},
                            {"deviation", c.deviation},
                            {"tolerance", c.tolerance},
                            {"passed", c.passed}});
        if (!c.passed) {
            o.passed = false;
            ++failed;
        }
        worst = std::max(worst, c.deviation);
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu checks, %zu failed, max deviation %.2e", checks.size(), failed, worst);
    o.summary = buf;
    return o;
}

Outcome gradients() {
    Outcome o;
    o.passed = true;
    double worst_primitive = 0.0;
    for (const testing::PrimitiveCase& c : testing::primitive_cases(1)) {
        const testing::GradCheck r = testing::check_graph_gradient(c.inputs, c.fn, 2, 1e-5, c.differentiable);
        o.detail["primitives"][c.name] = r.rel_error;
        worst_primitive = std::max(worst_primitive, r.rel_error);
        if (!(r.rel_error < 1e-6)) o.passed = false;
    }

    const ImageSet glyphs = synthetic_glyphs(6, 3, 0, GlyphOptions{9, 0.05, 1});
    const auto samples = gen_flip_dataset(glyphs, 3);
    nn::Tensor images({samples.size(), 9, 9});
    std::vector<int> labels;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        std::copy(samples[i].image.begin(), samples[i].image.end(), images.data.begin() + i * 81);
        labels.push_back(samples[i].label);
    }
    const std::vector<double> w(kFlipClassWeights.begin(), kFlipClassWeights.end());
    double worst_net = 0.0;
    auto record = [&](const std::string& name, const testing::GradCheck& r) {
        o.detail["networks"][name] = r.rel_error;
        worst_net = std::max(worst_net, r.rel_error);
        if (!(r.rel_error < 1e-4)) o.passed = false;
    };
    for (VisionModel m : {VisionModel::Vierer, VisionModel::Baseline}) {
        FlipNet net(FlipNetConfig{m, {2, 2, 2, 11}, 1.0}, 4);
        record(to_string(m), testing::check_param_gradient(net.params(), [&](nn::Tape& tape) {
                   return nn::weighted_softmax_xent(net.forward(tape, images, true), labels, w);
               }));
    }
    const auto clouds = gen_spinor_dataset(0.1, 5, 4, true);
    const CloudBatch batch = make_cloud_batch(clouds);
    const nn::Tensor target = spinor_targets(clouds);
    for (SpinorVariant v : kSpinorVariants) {
        SpinorNet net(v, 6);
        record(to_string(v), testing::check_param_gradient(net.params(), [&](nn::Tape& tape) {
                   return nn::spinor_sign_loss(net.forward(tape, batch), target);
               }));
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "worst primitive rel %.2e (< 1e-6), worst network rel %.2e (< 1e-4)", worst_primitive,
                  worst_net);
    o.summary = buf;
    return o;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome flip_experiment(const fs::path& out) {
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::map<VisionModel, std::vector<std::vector<double>>> acc;
    Outcome o;
    for (VisionModel m : {VisionModel::Vierer, VisionModel::Baseline}) {
        for (std::uint64_t s : seeds) {
            FlipExperimentConfig cfg;
            cfg.net.model = m;
            cfg.train.seed = s;
            const std::string stem = to_string(m) + "-seed" + std::to_string(s);
            const RunResult r = run_flip_experiment(cfg, (out / "flip").string(), stem);
            std::vector<double> a;
            for (const EpochMetrics& e : r.history) a.push_back(e.eval_accuracy);
            acc[m].push_back(a);
            o.detail["parameter_count"][to_string(m)] = r.parameter_count;
            std::cout << "  " << stem << ": final eval accuracy " << a.back() << std::endl;
        }
    }
    const std::size_t epochs = acc[VisionModel::Vierer].front().size();
    double best = 0.0;
    std::vector<std::size_t> behind;
    for (std::size_t e = 0; e < epochs; ++e) {
        std::vector<double> v, b;
        for (std::size_t k = 0; k < seeds.size(); ++k) {
            v.push_back(acc[VisionModel::Vierer][k][e]);
            b.push_back(acc[VisionModel::Baseline][k][e]);
        }
        const double mv = median(v), mb = median(b);
        o.detail["median_eval_accuracy"].push_back({{"epoch", e + 1}, {"vierer", mv}, {"baseline", mb}});
        best = std::max(best, mv);
        if (e + 1 >= 10 && !(mv > mb)) behind.push_back(e + 1);
    }
    o.passed = best >= 0.95 && behind.empty() && epochs <= 30;
    std::ostringstream s;
    s << "best median ViererNet accuracy " << best << " (>= 0.95), epochs >= 10 where it does not beat the baseline: ";
    if (behind.empty()) s << "none";
    for (std::size_t e : behind) s << e << (e == behind.back() ? "" : ",");
    o.summary = s.str();
    return o;
}

Outcome spinor_experiment(const fs::path& out) {
    Outcome o;
    auto run_variant = [&](SpinorVariant v) {
        SpinorExperimentConfig cfg;
        cfg.variant = v;
        cfg.noise = 0.0;
        cfg.augment = false;
        const RunResult r = run_spinor_experiment(cfg, (out / "spinor").string(), to_string(v) + "-noise0-seed0");
        double lo = 1e300;
        for (const EpochMetrics& e : r.history) lo = std::min(lo, e.eval_loss);
        o.detail[to_string(v)] = {{"min_eval_loss", lo},
                                  {"final_eval_loss", r.history.back().eval_loss},
                                  {"epochs", r.history.size()},
                                  {"parameter_count", r.parameter_count}};
        return lo;
    };
    const double squared = run_variant(SpinorVariant::SquaredFeatures);
    const double scalars = run_variant(SpinorVariant::AsScalars);
    o.passed = squared < 0.1 && scalars > 0.5;
    char buf[200];
    std::snprintf(buf, sizeof buf, "squared-features min eval loss %.4f (< 0.1), spinors-as-scalars min eval loss %.4f (> 0.5)",
                  squared, scalars);
    o.summary = buf;
    return o;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        files[fs::relative(e.path(), dir).string()] = s.str();
    }
    return files;
}

Outcome determinism(const fs::path& out) {
    const std::vector<std::vector<std::string>> commands{
        {"verify", "--scope", "network", "--seed", "7", "--out", "@/verify.json"},
        {"bases", "--group", "vierer", "--rep", "image-5x4", "--out", "@/bases"},
        {"bases", "--group", "symmetric-3", "--rep", "tensor-2", "--field", "complex", "--out", "@/bases"},
        {"train-vierer", "--model", "vierer", "--synthetic", "--epochs", "2", "--train-count", "200", "--eval-count",
         "100", "--widths", "2,2,2,11", "--seed", "7", "--out", "@/vierer"},
        {"train-vierer", "--model", "baseline", "--epochs", "2", "--train-count", "200", "--eval-count", "100",
         "--repeats", "2", "--jobs", "2", "--seed", "7", "--out", "@/baseline"},
        {"train-spinor", "--variant", "spinors-as-filters", "--epochs", "3", "--noise", "0.2", "--augment", "--seed",
         "7", "--out", "@/spinor"},
    };
    Outcome o;
    o.passed = true;
    std::size_t compared = 0;
    std::vector<std::string> differing;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::array<std::string, 2> stdouts;
        std::array<std::map<std::string, std::string>, 2> trees;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path dir = out / "determinism" / ("cmd" + std::to_string(c)) / ("run" + std::to_string(rep));
            fs::remove_all(dir);
            fs::create_directories(dir);
            std::vector<std::string> args = commands[c];
            for (std::string& a : args)
                if (a.rfind("@/", 0) == 0) a = (dir / a.substr(2)).string();
            std::ostringstream so, se;
            const int code = run_cli(args, so, se);
            if (code != kExitOk) {
                o.passed = false;
                differing.push_back(args.front() + " exited " + std::to_string(code));
            }
            // Paths differ between the two runs by construction; progress lines of
            // parallel repeats interleave freely, so only the JSON document counts.
            std::string text = so.str();
            if (const std::size_t j = text.find("\n["); j != std::string::npos) text.erase(0, j + 1);
            for (std::size_t p; (p = text.find(dir.string())) != std::string::npos;) text.replace(p, dir.string().size(), "@");
            stdouts[rep] = text;
            trees[rep] = read_tree(dir);
        }
        ++compared;
        if (stdouts[0] != stdouts[1]) differing.push_back(commands[c].front() + " stdout");
        if (trees[0].size() != trees[1].size() || trees[0].empty()) differing.push_back(commands[c].front() + " file set");
        for (const auto& [name, bytes] : trees[0]) {
            ++compared;
            const auto it = trees[1].find(name);
            if (it == trees[1].end() || it->second != bytes) differing.push_back(name);
        }
    }
    if (!differing.empty()) o.passed = false;
    o.detail["differing"] = differing;
    o.summary = std::to_string(commands.size()) + " commands run twice, " + std::to_string(compared) +
                " outputs compared, " + std::to_string(differing.size()) + " differing";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria runner"};
    std::string out_dir = "acceptance";
    std::vector<int> only;
    std::uint64_t seed = 0;
    app.add_option("--out", out_dir, "Directory for run artifacts and the JSON report")->capture_default_str();
    app.add_option("--only", only, "Run only these criteria, comma-separated (default: all)")->delimiter(',');
    app.add_option("--seed", seed, "Seed of the randomized property checks")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    const fs::path out(out_dir);
    fs::create_directories(out);

    const std::vector<Criterion> criteria{
        {1, "character groups", 1.0, [](const fs::path&) { return from_checks(check_character_tables()); }},
        {2, "commutator subgroups", 1.0, [](const fs::path&) { return from_checks(check_commutator_subgroups()); }},
        {3, "projective oracle equals the union of twisted spaces", 10.0,
         [&](const fs::path&) { return from_checks(check_projective_oracle(seed)); }},
        {4, "commutator invariants versus twisted invariants", 10.0,
         [](const fs::path&) { return from_checks(check_commutator_invariants()); }},
        {5, "sign-twisted tensor invariants", 10.0, [](const fs::path&) { return from_checks(check_sign_tensors()); }},
        {6, "flip filter dimensions", 1.0, [](const fs::path&) { return from_checks(check_vierer_filter_dims()); }},
        {7, "SU(2) covering, decomposition and Clebsch-Gordan", 30.0,
         [&](const fs::path&) { return from_checks(check_su2(seed)); }},
        {8, "slot equivariance of char-indexed networks", 30.0,
         [&](const fs::path&) { return from_checks(check_slot_equivariance(seed)); }},
        {9, "gradients against finite differences", 60.0, [](const fs::path&) { return gradients(); }},
        {10, "flip classification: ViererNet vs baseline, 5 seeds", 20.0 * 60.0, flip_experiment},
        {11, "spinor regression: squared features vs spinors as scalars", 30.0 * 60.0, spinor_experiment},
        {12, "repeated commands give byte-identical outputs", 600.0, determinism},
    };

    json report = json::array();
    bool all_passed = true;
    for (const Criterion& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run(out);
        } catch (const std::exception& e) {
            o.passed = false;
            o.summary = std::string("threw: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_seconds;
        const bool ok = o.passed && in_time;
        all_passed = all_passed && ok;
        char timing[96];
        std::snprintf(timing, sizeof timing, "%.2f s of %.0f s%s", secs, c.budget_seconds, in_time ? "" : " EXCEEDED");
        std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << " | " << o.summary << " | "
                  << timing << std::endl;
        report.push_back({{"criterion", c.id},
                          {"title", c.title},
                          {"passed", ok},
                          {"seconds", secs},
                          {"budget_seconds", c.budget_seconds},
                          {"summary", o.summary},
                          {"detail", o.detail}});
    }
    std::ofstream(out / "acceptance.json") << dump_json(report);
    return all_passed ? 0 : 1;
}
