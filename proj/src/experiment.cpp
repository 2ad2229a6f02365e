/*
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#include "shsv/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "shsv/errors.hpp"
#include "shsv/preprocess.hpp"
#include "shsv/rng.hpp"

namespace fs = std::filesystem;

namespace shsv {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_integer(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(fmt::format("config: '{}' expects a non-negative integer, got '{}'", key, value));
    }
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(fmt::format("config: '{}' expects a number, got '{}'", key, value));
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    throw ConfigError(fmt::format("config: '{}' expects true/false, got '{}'", key, value));
}

struct KeySpec {
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

// Keys are listed in the order write_config emits them.
const std::vector<std::pair<std::string, KeySpec>>& key_table() {
    static const std::vector<std::pair<std::string, KeySpec>> table = [] {
        std::vector<std::pair<std::string, KeySpec>> t;
        auto u32 = [&t](const char* name, auto member_of) {
            t.emplace_back(name, KeySpec{[member_of](ExperimentConfig& c, const std::string& k,
                                                     const std::string& v) {
                                             member_of(c) = parse_integer<std::uint32_t>(k, v);
                                         },
                                         [member_of](const ExperimentConfig& c) {
                                             return fmt::format("{}", member_of(const_cast<ExperimentConfig&>(c)));
                                         }});
        };
        auto size = [&t](const char* name, auto member_of) {
            t.emplace_back(name, KeySpec{[member_of](ExperimentConfig& c, const std::string& k,
                                                     const std::string& v) {
                                             member_of(c) = parse_integer<std::size_t>(k, v);
                                         },
                                         [member_of](const ExperimentConfig& c) {
                                             return fmt::format("{}", member_of(const_cast<ExperimentConfig&>(c)));
                                         }});
        };
        auto real = [&t](const char* name, auto member_of) {
            t.emplace_back(name, KeySpec{[member_of](ExperimentConfig& c, const std::string& k,
                                                     const std::string& v) { member_of(c) = parse_real(k, v); },
                                         [member_of](const ExperimentConfig& c) {
                                             return fmt::format("{}", member_of(const_cast<ExperimentConfig&>(c)));
                                         }});
        };
        auto flag = [&t](const char* name, auto member_of) {
            t.emplace_back(name, KeySpec{[member_of](ExperimentConfig& c, const std::string& k,
                                                     const std::string& v) { member_of(c) = parse_bool(k, v); },
                                         [member_of](const ExperimentConfig& c) {
                                             return std::string(member_of(const_cast<ExperimentConfig&>(c))
                                                                    ? "true"
                                                                    : "false");
                                         }});
        };
        auto path = [&t](const char* name, auto member_of) {
            t.emplace_back(name, KeySpec{[member_of](ExperimentConfig& c, const std::string&,
                                                     const std::string& v) { member_of(c) = fs::path(v); },
                                         [member_of](const ExperimentConfig& c) {
                                             return member_of(const_cast<ExperimentConfig&>(c)).string();
                                         }});
        };
        t.emplace_back("seed", KeySpec{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                                           c.master_seed = parse_integer<std::uint64_t>(k, v);
                                       },
                                       [](const ExperimentConfig& c) { return fmt::format("{}", c.master_seed); }});
        size("run_count", [](ExperimentConfig& c) -> std::size_t& { return c.stream.run_count; });
        path("dataset", [](ExperimentConfig& c) -> fs::path& { return c.dataset; });
        path("output_dir", [](ExperimentConfig& c) -> fs::path& { return c.output_dir; });

        u32("writer_count", [](ExperimentConfig& c) -> std::uint32_t& { return c.synth.writer_count; });
        u32("genuine_per_writer", [](ExperimentConfig& c) -> std::uint32_t& { return c.synth.genuine_per_writer; });
        u32("skilled_per_writer", [](ExperimentConfig& c) -> std::uint32_t& { return c.synth.skilled_per_writer; });
        u32("dim", [](ExperimentConfig& c) -> std::uint32_t& { return c.synth.dim; });
        real("genuine_noise_sigma", [](ExperimentConfig& c) -> double& { return c.synth.genuine_noise_sigma; });
        real("skilled_offset_scale", [](ExperimentConfig& c) -> double& { return c.synth.skilled_offset_scale; });
        real("skilled_noise_sigma", [](ExperimentConfig& c) -> double& { return c.synth.skilled_noise_sigma; });
        real("drift_velocity_sigma", [](ExperimentConfig& c) -> double& { return c.synth.drift_velocity_sigma; });

        u32("dev_user_count", [](ExperimentConfig& c) -> std::uint32_t& { return c.split.dev_user_count; });
        u32("dev_genuine_per_user", [](ExperimentConfig& c) -> std::uint32_t& { return c.split.dev_genuine_per_user; });
        u32("exploit_user_count", [](ExperimentConfig& c) -> std::uint32_t& { return c.split.exploit_user_count; });
        u32("refs_per_user", [](ExperimentConfig& c) -> std::uint32_t& { return c.split.refs_per_user; });
        u32("claims_per_user", [](ExperimentConfig& c) -> std::uint32_t& { return c.split.claims_per_user; });

        size("c_size", [](ExperimentConfig& c) -> std::size_t& { return c.stream.c_size; });
        size("w_size", [](ExperimentConfig& c) -> std::size_t& { return c.stream.w_size; });
        size("w_step", [](ExperimentConfig& c) -> std::size_t& { return c.stream.w_step; });
        flag("updates_enabled", [](ExperimentConfig& c) -> bool& { return c.stream.updates_enabled; });

        real("sgd_lr0", [](ExperimentConfig& c) -> double& { return c.sgd.lr0; });
        real("sgd_lr_t0", [](ExperimentConfig& c) -> double& { return c.sgd.lr_t0; });
        real("sgd_C", [](ExperimentConfig& c) -> double& { return c.sgd.reg; });
        t.emplace_back("sgd_epochs", KeySpec{[](ExperimentConfig& c, const std::string& k, const std::string& v) {
                                                 c.sgd_epochs = parse_integer<int>(k, v);
                                             },
                                             [](const ExperimentConfig& c) { return fmt::format("{}", c.sgd_epochs); }});
        real("svm_C", [](ExperimentConfig& c) -> double& { return c.smo.C; });
        real("svm_gamma", [](ExperimentConfig& c) -> double& { return c.smo.gamma; });
        real("svm_tol", [](ExperimentConfig& c) -> double& { return c.smo.tol; });
        size("svm_max_passes", [](ExperimentConfig& c) -> std::size_t& { return c.smo.max_passes; });
        size("svm_cache_mb", [](ExperimentConfig& c) -> std::size_t& { return c.smo.cache_mb; });

        flag("frozen_sgd_baseline", [](ExperimentConfig& c) -> bool& { return c.frozen_sgd_baseline; });
        flag("write_svg", [](ExperimentConfig& c) -> bool& { return c.write_svg; });
        return t;
    }();
    return table;
}

const KeySpec& key_spec(const std::string& key) {
    for (const auto& [name, spec] : key_table()) {
        if (name == key) {
            return spec;
        }
    }
    throw ConfigError(fmt::format("config: unknown key '{}'", key));
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw DataError(fmt::format("cannot create directory {}: {}", dir.string(), ec.message()));
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError(fmt::format("cannot open {} for writing", path.string()));
    }
    return out;
}

std::uint64_t stage_seed(std::uint64_t run_seed_value, std::uint64_t stage) { return derive_seed(run_seed_value, stage); }

enum Stage : std::uint64_t { kSplit = 1, kStream = 2, kSgdFit = 3, kSmoFit = 4, kSgdUpdates = 5 };

struct TrainedModels {
    UserSplit users;
    DevSet dev;
    ExploitSet exploit;
    LinearModel sgd;
    SmoResult svm;
};

TrainedModels train_for_run(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
    TrainedModels t;
    SplitConfig split = cfg.split;
    split.seed = stage_seed(seed, kSplit);
    t.users = split_users(data, split);
    t.dev = gen_dev_set(data, t.users.dev, split);
    t.exploit = gen_exploit_set(data, t.users.exploit, split);
    t.sgd = fit_batch(LinearModel(data.dim(), cfg.sgd), t.dev, cfg.sgd_epochs, stage_seed(seed, kSgdFit));
    SmoParams smo = cfg.smo;
    smo.seed = stage_seed(seed, kSmoFit);
    t.svm = fit_smo(t.dev, smo);
    return t;
}

}  // namespace

void ExperimentConfig::validate() const {
    synth.validate();
    split.validate();
    stream.validate();
    if (!(sgd.reg > 0.0) || !(sgd.lr0 > 0.0) || sgd.lr_t0 < 0.0) {
        throw ConfigError("config: sgd_C and sgd_lr0 must be > 0, sgd_lr_t0 >= 0");
    }
    if (sgd_epochs < 0) {
        throw ConfigError("config: sgd_epochs must be >= 0");
    }
    if (!(smo.C > 0.0) || !(smo.gamma > 0.0) || !(smo.tol > 0.0)) {
        throw ConfigError("config: svm_C, svm_gamma and svm_tol must be > 0");
    }
    if (stream.run_count == 0) {
        throw ConfigError("config: run_count must be >= 1");
    }
}

void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    key_spec(key).set(cfg, key, value);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& entry : key_table()) {
        keys.push_back(entry.first);
    }
    return keys;
}

ExperimentConfig parse_config(std::istream& in, const std::string& source_name) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string body = trim(line);
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("{}:{}: expected 'key = value'", source_name, line_no));
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        try {
            apply_config_value(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("{}:{}: {}", source_name, line_no, e.what()));
        }
    }
    cfg.synth.seed = cfg.master_seed;
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot read config file {}", path.string()));
    }
    return parse_config(in, path.string());
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
    for (const auto& [name, spec] : key_table()) {
        out << name << " = " << spec.get(cfg) << '\n';
    }
}

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run) { return derive_seed(master_seed, run); }

const char* method_name(Method m) noexcept {
    switch (m) {
        case Method::AdaptiveSgd: return "sgd";
        case Method::StaticSvm: return "svm";
        case Method::StaticSgd: return "sgd_static";
    }
    return "?";
}

StreamEvalConfig resolved_stream(const ExperimentConfig& cfg) {
    StreamEvalConfig s = cfg.stream;
    const std::size_t ne = cfg.split.exploit_user_count;
    if (s.c_size == 0) {
        s.c_size = 3 * ne;
    }
    if (s.w_size == 0) {
        s.w_size = 3 * ne;
    }
    if (s.w_step == 0) {
        s.w_step = ne;
    }
    return s;
}

RunResult run_once(const Dataset& data, const ExperimentConfig& cfg, std::size_t run, const fs::path* run_dir) {
    RunResult res;
    res.run = run;
    res.seed = run_seed(cfg.master_seed, run);
    TrainedModels t = train_for_run(data, cfg, res.seed);
    res.split = t.users;
    res.dev_samples = t.dev.samples.size();
    res.svm_converged = t.svm.converged;

    StreamEvalConfig scfg = resolved_stream(cfg);
    scfg.seed = stage_seed(res.seed, kStream);
    const auto stream = build_stream(t.exploit, scfg.seed);

    std::vector<std::pair<Method, std::unique_ptr<Verifier>>> verifiers;
    verifiers.emplace_back(Method::AdaptiveSgd,
                           std::make_unique<LinearVerifier>(t.sgd, stage_seed(res.seed, kSgdUpdates), true));
    verifiers.emplace_back(Method::StaticSvm, std::make_unique<KernelVerifier>(t.svm.model));
    if (cfg.frozen_sgd_baseline) {
        verifiers.emplace_back(Method::StaticSgd,
                               std::make_unique<LinearVerifier>(t.sgd, stage_seed(res.seed, kSgdUpdates), false));
    }
    for (auto& [method, verifier] : verifiers) {
        StreamEvalConfig mcfg = scfg;
        mcfg.updates_enabled = scfg.updates_enabled && verifier->adaptive();
        std::ofstream log;
        if (run_dir != nullptr) {
            log = open_out(*run_dir / fmt::format("events_{}.csv", method_name(method)));
        }
        auto pr = prequential_run(stream, t.exploit, *verifier, mcfg, run_dir != nullptr ? &log : nullptr);
        MethodRun mr;
        mr.method = method;
        mr.updates = pr.updates.size();
        mr.windows = windowed_metrics(pr.events, scfg.w_size, scfg.w_step);
        mr.events = std::move(pr.events);
        res.methods.push_back(std::move(mr));
    }
    return res;
}

ExperimentResult run_experiment(const Dataset& data, const ExperimentConfig& cfg, const fs::path* out_dir) {
    cfg.validate();
    ExperimentResult result;
    if (out_dir != nullptr) {
        ensure_dir(*out_dir);
    }
    // Runs are independent; kernels inside each run are already parallel, so runs go one after another.
    for (std::size_t r = 0; r < cfg.stream.run_count; ++r) {
        std::optional<fs::path> run_dir;
        if (out_dir != nullptr) {
            run_dir = *out_dir / fmt::format("run_{:02}", r);
            ensure_dir(*run_dir);
        }
        result.runs.push_back(run_once(data, cfg, r, run_dir ? &*run_dir : nullptr));
    }
    std::map<Method, std::vector<std::vector<MetricsWindow>>> per_method;
    for (const auto& run : result.runs) {
        for (const auto& m : run.methods) {
            per_method[m.method].push_back(m.windows);
        }
    }
    for (const auto& [method, windows] : per_method) {
        result.aggregates[method] = aggregate_runs(windows);
    }
    if (out_dir != nullptr) {
        for (const auto& [method, agg] : result.aggregates) {
            auto out = open_out(*out_dir / fmt::format("report_{}.csv", method_name(method)));
            write_report_csv(out, agg);
        }
        if (cfg.write_svg) {
            std::vector<ChartSeries> series;
            for (const auto& [method, agg] : result.aggregates) {
                series.push_back({method_name(method), &agg});
            }
            auto out = open_out(*out_dir / "eer_skilled.svg");
            write_svg_chart(out, series, "Mean skilled-forgery EER per window");
        }
    }
    return result;
}

Dataset dataset_for(const ExperimentConfig& cfg) {
    if (cfg.dataset.empty()) {
        SynthConfig synth = cfg.synth;
        synth.seed = cfg.master_seed;
        return generate_synthetic(synth);
    }
    if (cfg.dataset.extension() == ".csv") {
        return import_csv(cfg.dataset);
    }
    return load_dataset(cfg.dataset);
}

void cmd_synth(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    SynthConfig synth = cfg.synth;
    synth.seed = cfg.master_seed;
    synth.validate();
    const Dataset data = generate_synthetic(synth);
    if (out.has_parent_path()) {
        ensure_dir(out.parent_path());
    }
    save_dataset(data, out);
    std::size_t genuine = 0;
    for (const auto& r : data.records()) {
        genuine += r.kind == Kind::Genuine ? 1 : 0;
    }
    log << fmt::format("wrote {} records ({} genuine, {} skilled) of dim {} to {}\n", data.size(), genuine,
                       data.size() - genuine, data.dim(), out.string());
    log << fmt::format("#SUMMARY command=synth writers={} records={} genuine={} skilled={} dim={} seed={}\n",
                       synth.writer_count, data.size(), genuine, data.size() - genuine, data.dim(), synth.seed);
}

void cmd_preprocess(const fs::path& in_dir, const fs::path& out_dir, std::uint32_t canvas_w, std::uint32_t canvas_h,
                    std::ostream& log) {
    if (!fs::is_directory(in_dir)) {
        throw DataError(fmt::format("preprocess: {} is not a directory", in_dir.string()));
    }
    ensure_dir(out_dir);
    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        if (entry.is_regular_file()) {
            inputs.push_back(entry.path());
        }
    }
    std::sort(inputs.begin(), inputs.end());
    PreprocessConfig pcfg;
    pcfg.canvas_w = canvas_w;
    pcfg.canvas_h = canvas_h;
    std::size_t ok = 0, skipped = 0;
    for (const auto& path : inputs) {
        try {
            const auto img = read_pgm(path);
            const auto res = preprocess_signature(img, pcfg);
            write_pgm(res.image, out_dir / path.filename().replace_extension(".pgm"));
            log << fmt::format("{}: otsu threshold {}\n", path.filename().string(), res.otsu);
            ++ok;
        } catch (const Error& e) {
            log << fmt::format("warning: skipping {}: {}\n", path.filename().string(), e.what());
            ++skipped;
        }
    }
    if (inputs.empty()) {
        log << fmt::format("warning: no input files in {}\n", in_dir.string());
    }
    log << fmt::format("#SUMMARY command=preprocess processed={} skipped={}\n", ok, skipped);
    if (ok == 0 && skipped > 0) {
        throw DataError("preprocess: every input file failed");
    }
}

void cmd_import_csv(const fs::path& csv, const fs::path& out, std::ostream& log) {
    const Dataset data = import_csv(csv);
    if (out.has_parent_path()) {
        ensure_dir(out.parent_path());
    }
    save_dataset(data, out);
    log << fmt::format("#SUMMARY command=import-csv records={} writers={} dim={}\n", data.size(),
                       data.writers().size(), data.dim());
}

void cmd_split(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    cfg.validate();
    const Dataset data = dataset_for(cfg);
    SplitConfig split = cfg.split;
    split.seed = stage_seed(run_seed(cfg.master_seed, 0), kSplit);
    const UserSplit users = split_users(data, split);
    const DevSet dev = gen_dev_set(data, users.dev, split);
    ensure_dir(out_dir);
    auto out = open_out(out_dir / "split.txt");
    out << "dev =";
    for (auto w : users.dev) {
        out << ' ' << w;
    }
    out << "\nexploit =";
    for (auto w : users.exploit) {
        out << ' ' << w;
    }
    out << '\n';
    out.close();
    save_dataset(devset_to_dataset(dev), out_dir / "devset.shsv");
    log << fmt::format("#SUMMARY command=split dev_users={} exploit_users={} positives={} negatives={}\n",
                       users.dev.size(), users.exploit.size(), dev.positives_count, dev.negatives_count);
}

void cmd_train(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
    cfg.validate();
    const Dataset data = dataset_for(cfg);
    const TrainedModels t = train_for_run(data, cfg, run_seed(cfg.master_seed, 0));
    ensure_dir(out_dir);
    save_linear_model(t.sgd, out_dir / "sgd.shwm");
    save_kernel_model(t.svm.model, out_dir / "svm.shkm");
    log << fmt::format("SGD objective on development set: {:.6f}\n", objective(t.sgd, t.dev.samples));
    log << fmt::format("SVM: {} support vectors, {} passes, dual objective {:.6f}{}\n",
                       t.svm.model.support_vectors.rows(), t.svm.passes, t.svm.dual_objective,
                       t.svm.converged ? "" : " (pass budget exhausted)");
    log << fmt::format("#SUMMARY command=train dev_samples={} sgd_steps={} svm_support_vectors={} svm_converged={}\n",
                       t.dev.samples.size(), t.sgd.step_count(), t.svm.model.support_vectors.rows(),
                       t.svm.converged ? "true" : "false");
}

void cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const Dataset data = dataset_for(cfg);
    ensure_dir(cfg.output_dir);
    {
        auto out = open_out(cfg.output_dir / "config_used.txt");
        write_config(out, cfg);
    }
    const auto result = run_experiment(data, cfg, &cfg.output_dir);
    for (const auto& run : result.runs) {
        std::string line = fmt::format("run {:02} seed {:#018x}:", run.run, run.seed);
        for (const auto& m : run.methods) {
            if (!m.windows.empty() && m.windows.back().valid()) {
                line += fmt::format(" {} final-window skilled EER {:.4f} ({} updates);", method_name(m.method),
                                    m.windows.back().eer_skilled, m.updates);
            }
        }
        log << line << '\n';
    }
    std::string summary = fmt::format("#SUMMARY command=run runs={} output_dir={}", result.runs.size(),
                                      cfg.output_dir.string());
    for (const auto& [method, agg] : result.aggregates) {
        if (!agg.windows.empty()) {
            summary += fmt::format(" {}_final_eer_skilled={:.6f}", method_name(method),
                                   agg.windows.back().eer_skilled_mean);
        }
    }
    log << summary << '\n';
}

RunAggregate cmd_report(const std::vector<fs::path>& logs, std::size_t w_size, std::size_t w_step,
                        const fs::path& out_csv, std::ostream& log) {
    if (logs.empty()) {
        throw ConfigError("report: no event logs given");
    }
    std::vector<std::vector<MetricsWindow>> runs;
    for (const auto& path : logs) {
        const auto events = read_event_log(path);
        runs.push_back(windowed_metrics(events, w_size, w_step));
        if (runs.size() > 1 && runs.back().size() != runs.front().size()) {
            throw DataError(fmt::format("report: {} yields {} windows but {} yields {}", path.string(),
                                        runs.back().size(), logs.front().string(), runs.front().size()));
        }
    }
    const RunAggregate agg = aggregate_runs(runs);
    if (out_csv.has_parent_path()) {
        ensure_dir(out_csv.parent_path());
    }
    auto out = open_out(out_csv);
    write_report_csv(out, agg);
    log << fmt::format("#SUMMARY command=report logs={} windows={} output={}\n", logs.size(), agg.windows.size(),
                       out_csv.string());
    return agg;
}

}  // namespace shsv
