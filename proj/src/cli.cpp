#include "projeq/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "projeq/errors.hpp"
#include "projeq/experiments.hpp"
#include "projeq/invariants.hpp"
#include "projeq/serialize.hpp"
#include "projeq/verify.hpp"

namespace projeq {

namespace fs = std::filesystem;

namespace {

/// "cyclic-4" -> ("cyclic", 4); "vierer" -> ("vierer", 0).
std::pair<std::string, std::size_t> split_family(const std::string& s) {
    const auto dash = s.rfind('-');
    if (dash == std::string::npos) return {s, 0};
    std::size_t n = 0;
    const char* first = s.data() + dash + 1;
    const char* last = s.data() + s.size();
    const auto [p, ec] = std::from_chars(first, last, n);
    if (ec != std::errc{} || p != last || first == last) return {s, 0};
    return {s.substr(0, dash), n};
}

std::pair<std::size_t, std::size_t> parse_image_shape(const std::string& s) {
    // "image-HxW"
    const std::string body = s.substr(6);
    const auto x = body.find('x');
    std::size_t h = 0, w = 0;
    if (x == std::string::npos) throw ConfigError("image rep must look like image-HxW");
    const auto r1 = std::from_chars(body.data(), body.data() + x, h);
    const auto r2 = std::from_chars(body.data() + x + 1, body.data() + body.size(), w);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r2.ptr != body.data() + body.size() || h == 0 || w == 0)
        throw ConfigError("image rep must look like image-HxW");
    return {h, w};
}

Field parse_field(const std::string& f, Field fallback) {
    if (f.empty()) return fallback;
    if (f == "real") return Field::Real;
    if (f == "complex") return Field::Complex;
    throw ConfigError("field must be real or complex, got '" + f + "'");
}

LinearRep with_field(LinearRep r, Field f) {
    if (f == r.field()) return r;
    if (f == Field::Complex) return rep_to_complex(r);
    throw ConfigError("this representation is only available over the complex numbers");
}

std::size_t tensor_power(const std::string& rep) {
    if (rep == "perm") return 1;
    if (rep == "tensor") return 2;
    const auto [name, k] = split_family(rep);
    if (name == "tensor" && k >= 1) return k;
    throw ConfigError("unsupported rep '" + rep + "' for a permutation group (use perm, tensor or tensor-K)");
}

bool is_image_rep(const BasisRequest& req) {
    return req.group == "vierer" && (req.rep == "filter3x3" || req.rep.rfind("image-", 0) == 0);
}

std::string format_entry(cd z) {
    char buf[64];
    if (std::abs(z.imag()) < 1e-12)
        std::snprintf(buf, sizeof buf, "%9.5f", z.real() == 0.0 ? 0.0 : z.real());
    else
        std::snprintf(buf, sizeof buf, "%9.5f%+.5fi", z.real(), z.imag());
    return buf;
}

std::string render_grids(const InvariantBasis& b, std::size_t h, std::size_t w) {
    std::ostringstream os;
    os << "# character " << b.character.label() << ", " << b.dim() << " basis vectors, " << h << "x" << w << "\n";
    for (std::size_t k = 0; k < b.dim(); ++k) {
        os << "\n# vector " << k << "\n";
        for (std::size_t i = 0; i < h; ++i) {
            for (std::size_t j = 0; j < w; ++j) os << (j ? " " : "") << format_entry(b.basis[k][i * w + j]);
            os << "\n";
        }
    }
    return os.str();
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    f << s;
    if (!f) throw DataError("failed writing " + p.string());
}

std::string noise_tag(double noise) {
    std::ostringstream os;
    os << noise;
    return os.str();
}

/// Runs count independent jobs on up to jobs threads; rethrows the first failure.
void run_parallel(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::mutex m;
    std::size_t next = 0;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(m);
                if (next >= count || failure) return;
                i = next++;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(m);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, count); ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

void print_epoch(std::ostream& out, const std::string& stem, const EpochMetrics& m) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s epoch %zu train loss %.4f acc %.4f eval loss %.4f acc %.4f\n", stem.c_str(),
                  m.epoch, m.train_loss, m.train_accuracy, m.eval_loss, m.eval_accuracy);
    out << buf << std::flush;
}

struct CommonTrainFlags {
    std::size_t epochs = 0;
    double lr = 0.0;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    std::size_t repeats = 1;
    std::size_t jobs = 1;
    std::string schedule = "constant";
    std::string out = "runs";
    std::string config;
};

void add_common(CLI::App* cmd, CommonTrainFlags& f) {
    cmd->add_option("--epochs", f.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--batch-size", f.batch_size, "Minibatch size")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Seed of the first repeat; repeat r uses seed + r")->capture_default_str();
    cmd->add_option("--repeats", f.repeats, "Independent runs")->capture_default_str();
    cmd->add_option("--jobs", f.jobs, "Runs trained in parallel")->capture_default_str();
    cmd->add_option("--lr-schedule", f.schedule, "constant or cosine")->capture_default_str();
    cmd->add_option("--out", f.out, "Output directory for CSV, checkpoint and JSON files")->capture_default_str();
    // Expanded by expand_config_files before parsing; registered here for --help.
    cmd->add_option("--config", f.config, "key=value file; command-line flags take precedence");
}

/// Later occurrences win, so flags written after the config entries override them.
void take_last(CLI::App* cmd) {
    for (CLI::Option* o : cmd->get_options()) o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/// Lines are key=value (blank lines and # comments skipped); each becomes --key=value.
std::vector<std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::vector<std::string> flags;
    std::string line;
    for (std::size_t no = 1; std::getline(in, line); ++no) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(no) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        if (key.empty() || key[0] == '-') throw ConfigError(path + ":" + std::to_string(no) + ": bad key '" + key + "'");
        flags.push_back("--" + key + "=" + value);
    }
    return flags;
}

/// Replaces --config FILE (or --config=FILE) by the file's entries, placed right after the
/// subcommand name so that explicit flags come later and take precedence.
std::vector<std::string> expand_config_files(const std::vector<std::string>& args) {
    if (args.empty()) return args;
    std::vector<std::string> head{args.front()}, from_files, rest;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        if (a == "--config") {
            if (i + 1 >= args.size()) throw ConfigError("--config needs a file");
            const auto f = read_config_file(args[++i]);
            from_files.insert(from_files.end(), f.begin(), f.end());
        } else if (a.rfind("--config=", 0) == 0) {
            const auto f = read_config_file(a.substr(9));
            from_files.insert(from_files.end(), f.begin(), f.end());
        } else {
            rest.push_back(a);
        }
    }
    head.insert(head.end(), from_files.begin(), from_files.end());
    head.insert(head.end(), rest.begin(), rest.end());
    return head;
}

std::vector<std::size_t> parse_widths(const std::string& s) {
    std::vector<std::size_t> w;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        std::size_t v = 0;
        const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || p != item.data() + item.size() || item.empty())
            throw ConfigError("--widths must be comma-separated integers, got '" + s + "'");
        w.push_back(v);
    }
    return w;
}

void validate_common(const CommonTrainFlags& f) {
    if (f.epochs == 0) throw ConfigError("--epochs must be at least 1");
    if (!(f.lr > 0.0) || !std::isfinite(f.lr)) throw ConfigError("--lr must be a positive finite number");
    if (f.batch_size < 2) throw ConfigError("--batch-size must be at least 2");
    if (f.repeats == 0) throw ConfigError("--repeats must be at least 1");
    if (f.jobs == 0) throw ConfigError("--jobs must be at least 1");
    if (f.out.empty()) throw ConfigError("--out must not be empty");
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir + ": " + ec.message());
}

std::string resolve_data_dir(const std::string& dir) {
    if (dir.empty()) return dir;
    const fs::path p(dir);
    const char* root = std::getenv("PROJEQ_DATA_DIR");
    if (p.is_relative() && root && *root) return (fs::path(root) / p).string();
    return dir;
}

nlohmann::json runs_json(const std::vector<RunResult>& runs) {
    auto arr = nlohmann::json::array();
    for (const RunResult& r : runs) {
        nlohmann::json s = r.summary;
        s.erase("history");
        arr.push_back(std::move(s));
    }
    return arr;
}

}  // namespace

LinearRep build_requested_rep(const BasisRequest& req) {
    const auto [family, n] = split_family(req.group);
    if (req.group == "vierer") {
        const Field f = parse_field(req.field, Field::Real);
        if (req.rep == "filter3x3") return with_field(rep_flip_image(3, 3), f);
        if (req.rep.rfind("image-", 0) == 0) {
            const auto [h, w] = parse_image_shape(req.rep);
            return with_field(rep_flip_image(h, w), f);
        }
        throw ConfigError("unsupported rep '" + req.rep + "' for vierer (use filter3x3 or image-HxW)");
    }
    if (family == "cyclic" && n >= 1) {
        if (req.rep != "shift") throw ConfigError("unsupported rep '" + req.rep + "' for cyclic groups (use shift)");
        return rep_cyclic_shift(n, parse_field(req.field, Field::Complex));
    }
    if ((family == "symmetric" || family == "alternating") && n >= 2) {
        const Field f = parse_field(req.field, Field::Real);
        LinearRep r = with_field(rep_permutation_tensor(n, tensor_power(req.rep)), f);
        if (family == "symmetric") return r;
        return rep_restrict(r, commutator_subgroup(r.group()));
    }
    throw ConfigError("unsupported group '" + req.group + "' (use vierer, cyclic-N, symmetric-N or alternating-N)");
}

std::vector<std::string> export_bases(const BasisRequest& req, const std::string& out_dir) {
    const LinearRep r = build_requested_rep(req);
    const std::vector<InvariantBasis> spaces = projective_invariants(r);
    std::size_t h = 0, w = 0;
    if (is_image_rep(req)) {
        if (req.rep == "filter3x3")
            h = w = 3;
        else
            std::tie(h, w) = parse_image_shape(req.rep);
    }
    ensure_dir(out_dir);
    const std::string stem = req.group + "_" + req.rep;
    std::vector<std::string> written;
    for (std::size_t k = 0; k < spaces.size(); ++k) {
        nlohmann::json j = invariant_basis_json(spaces[k]);
        j["group"] = req.group;
        j["rep"] = req.rep;
        j["rep_dim"] = r.dim();
        j["character_index"] = k;
        const fs::path base = fs::path(out_dir) / (stem + "_char" + std::to_string(k));
        write_text(base.string() + ".json", dump_json(j));
        written.push_back(base.string() + ".json");
        if (h) {
            write_text(base.string() + ".txt", render_grids(spaces[k], h, w));
            written.push_back(base.string() + ".txt");
        }
    }
    return written;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Projectively equivariant networks: verification, basis export and experiments", "projeq"};
    app.require_subcommand(1);
    app.fallthrough(false);

    // verify
    CLI::App* verify = app.add_subcommand("verify", "Run numerical property suites; exit 1 if any check fails");
    std::string scope = "all";
    std::uint64_t verify_seed = 0;
    std::string report_path;
    verify->add_option("--scope", scope, "all, groups, invariants, su2 or network")->capture_default_str();
    verify->add_option("--seed", verify_seed, "Seed of the random samples")->capture_default_str();
    verify->add_option("--out", report_path, "Also write the JSON report to this file");

    // bases
    CLI::App* bases = app.add_subcommand("bases", "Export twisted invariant bases, one file per character");
    BasisRequest breq;
    std::string bases_out = "bases";
    bases->add_option("--group", breq.group, "vierer, cyclic-N, symmetric-N or alternating-N")->required();
    bases->add_option("--rep", breq.rep, "filter3x3, image-HxW, shift, perm, tensor or tensor-K")->required();
    bases->add_option("--field", breq.field, "real or complex (default depends on the group)");
    bases->add_option("--out", bases_out, "Output directory")->capture_default_str();

    // train-vierer
    CLI::App* tv = app.add_subcommand("train-vierer", "Train the flip classifier (ViererNet or baseline CNN)");
    FlipExperimentConfig fcfg;
    CommonTrainFlags tvf;
    tvf.epochs = fcfg.train.epochs;
    tvf.lr = fcfg.train.adam.lr;
    tvf.batch_size = fcfg.train.batch_size;
    tvf.schedule = to_string(fcfg.train.schedule);
    std::string model = to_string(fcfg.net.model);
    std::string mnist_dir;
    bool synthetic = false;
    add_common(tv, tvf);
    tv->add_option("--model", model, "vierer or baseline")->capture_default_str();
    std::string widths;
    for (std::size_t w : fcfg.net.widths) widths += (widths.empty() ? "" : ",") + std::to_string(w);
    tv->add_option("--widths", widths, "Channels of the four conv layers; the last must be 11")->capture_default_str();
    tv->add_option("--train-count", fcfg.train_count, "Training images")->capture_default_str();
    tv->add_option("--eval-count", fcfg.eval_count, "Evaluation images")->capture_default_str();
    tv->add_option("--glyph-noise", fcfg.glyphs.pixel_noise, "Pixel noise std of synthetic glyphs")->capture_default_str();
    tv->add_option("--distractors", fcfg.glyphs.distractors, "Distractor pixels per synthetic glyph")
        ->capture_default_str();
    auto* syn = tv->add_flag("--synthetic", synthetic, "Use synthetic 16x16 glyphs (the default)");
    auto* mn = tv->add_option("--mnist-dir", mnist_dir,
                              "Directory with MNIST IDX files; relative paths resolve against PROJEQ_DATA_DIR");
    syn->excludes(mn);

    // train-spinor
    CLI::App* ts = app.add_subcommand("train-spinor", "Train one spinor field network variant");
    SpinorExperimentConfig scfg;
    CommonTrainFlags tsf;
    tsf.epochs = scfg.train.epochs;
    tsf.lr = scfg.train.adam.lr;
    tsf.batch_size = scfg.train.batch_size;
    tsf.schedule = to_string(scfg.train.schedule);
    std::string variant = to_string(scfg.variant);
    add_common(ts, tsf);
    ts->add_option("--variant", variant,
                   "spinors-as-scalars, spinors-as-features, spinors-as-filters, squared-features or squared-filters")
        ->capture_default_str();
    ts->add_option("--noise", scfg.noise, "Position noise std in [0, 0.4]")->capture_default_str();
    ts->add_flag("--augment", scfg.augment, "Also rotate the training clouds");
    ts->add_option("--train-count", scfg.train_per_epoch, "Training clouds drawn per epoch")->capture_default_str();
    ts->add_option("--eval-count", scfg.eval_count, "Rotated evaluation clouds")->capture_default_str();

    take_last(tv);
    take_last(ts);

    std::vector<std::string> expanded;
    try {
        expanded = expand_config_files(args);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        std::vector<std::string> rev(expanded.rbegin(), expanded.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (verify->parsed()) {
            const VerifyReport rep = run_verify(parse_verify_scope(scope), verify_seed);
            const std::string text = dump_json(rep.to_json());
            out << text;
            if (!report_path.empty()) write_text(report_path, text);
            for (const CheckResult& c : rep.checks)
                if (!c.passed)
                    err << "FAILED [" << c.reference << "] " << c.name << ": deviation " << c.deviation << " > "
                        << c.tolerance << "\n";
            return rep.passed() ? kExitOk : kExitCheckFailed;
        }
        if (bases->parsed()) {
            const LinearRep r = build_requested_rep(breq);
            for (const InvariantBasis& b : projective_invariants(r))
                out << "character " << b.character.label() << ": dim " << b.dim() << "\n";
            for (const std::string& p : export_bases(breq, bases_out)) out << "wrote " << p << "\n";
            return kExitOk;
        }
        if (tv->parsed()) {
            validate_common(tvf);
            fcfg.net.model = parse_vision_model(model);
            fcfg.net.widths = parse_widths(widths);
            if (fcfg.net.widths.size() != 4) throw ConfigError("--widths needs four values");
            for (std::size_t w : fcfg.net.widths)
                if (w == 0) throw ConfigError("--widths entries must be positive");
            if (fcfg.net.widths.back() != kFlipClasses) throw ConfigError("the last width must be 11");
            if (fcfg.train_count < 2 || fcfg.eval_count < 1) throw ConfigError("need at least 2 train and 1 eval image");
            if (!(fcfg.glyphs.pixel_noise >= 0.0) || !std::isfinite(fcfg.glyphs.pixel_noise))
                throw ConfigError("--glyph-noise must be a non-negative number");
            fcfg.mnist_dir = resolve_data_dir(mnist_dir);
            if (!fcfg.mnist_dir.empty() && !fs::is_directory(fcfg.mnist_dir))
                throw DataError("MNIST directory not found: " + fcfg.mnist_dir);
            fcfg.train.epochs = tvf.epochs;
            fcfg.train.adam.lr = tvf.lr;
            fcfg.train.batch_size = tvf.batch_size;
            fcfg.train.schedule = parse_lr_schedule(tvf.schedule);
            ensure_dir(tvf.out);
            std::vector<RunResult> runs(tvf.repeats);
            std::mutex out_mutex;
            run_parallel(tvf.repeats, tvf.jobs, [&](std::size_t r) {
                FlipExperimentConfig c = fcfg;
                c.train.seed = tvf.seed + r;
                const std::string stem = model + "-seed" + std::to_string(c.train.seed);
                c.train.divergence_checkpoint = (fs::path(tvf.out) / (stem + "-last-good.pjeq")).string();
                runs[r] = run_flip_experiment(c, tvf.out, stem, [&](const EpochMetrics& m) {
                    std::lock_guard lock(out_mutex);
                    print_epoch(out, stem, m);
                });
            });
            out << dump_json(runs_json(runs));
            return kExitOk;
        }
        if (ts->parsed()) {
            validate_common(tsf);
            scfg.variant = parse_spinor_variant(variant);
            if (!(scfg.noise >= 0.0 && scfg.noise <= 0.4)) throw ConfigError("--noise must lie in [0, 0.4]");
            if (scfg.train_per_epoch < 2 || scfg.eval_count < 1) throw ConfigError("need at least 2 train and 1 eval cloud");
            scfg.train.epochs = tsf.epochs;
            scfg.train.adam.lr = tsf.lr;
            scfg.train.batch_size = tsf.batch_size;
            scfg.train.schedule = parse_lr_schedule(tsf.schedule);
            ensure_dir(tsf.out);
            std::vector<RunResult> runs(tsf.repeats);
            std::mutex out_mutex;
            run_parallel(tsf.repeats, tsf.jobs, [&](std::size_t r) {
                SpinorExperimentConfig c = scfg;
                c.train.seed = tsf.seed + r;
                const std::string stem = variant + "-noise" + noise_tag(c.noise) + "-seed" + std::to_string(c.train.seed);
                c.train.divergence_checkpoint = (fs::path(tsf.out) / (stem + "-last-good.pjeq")).string();
                runs[r] = run_spinor_experiment(c, tsf.out, stem, [&](const EpochMetrics& m) {
                    std::lock_guard lock(out_mutex);
                    print_epoch(out, stem, m);
                });
            });
            out << dump_json(runs_json(runs));
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "invalid argument: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SizeError& e) {
        err << "request too large: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const DivergenceError& e) {
        err << "training diverged: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitUsage;
}

}  // namespace projeq
