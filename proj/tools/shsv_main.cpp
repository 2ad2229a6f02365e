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
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "shsv/errors.hpp"
#include "shsv/experiment.hpp"

namespace {

struct ConfigOptions {
    std::string file;
    std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigOptions& opts) {
    cmd->add_option("-c,--config", opts.file, "Experiment config file (key = value lines)");
    cmd->add_option("-s,--set", opts.overrides, "Override a config key, e.g. --set run_count=1")->take_all();
}

shsv::ExperimentConfig resolve_config(const ConfigOptions& opts) {
    shsv::ExperimentConfig cfg = opts.file.empty() ? shsv::ExperimentConfig{} : shsv::load_config(opts.file);
    for (const auto& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw shsv::ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
        }
        shsv::apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.synth.seed = cfg.master_seed;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shsv - writer-independent offline signature verification with stream learning"};
    app.require_subcommand(1);

    ConfigOptions synth_cfg, split_cfg, train_cfg, run_cfg, report_cfg;
    std::string synth_out = "dataset.shsv";
    auto* synth = app.add_subcommand("synth", "Generate a synthetic feature dataset");
    add_config_options(synth, synth_cfg);
    synth->add_option("-o,--out", synth_out, "Output dataset file")->capture_default_str();

    std::string pre_in, pre_out;
    std::uint32_t canvas_w = 1360, canvas_h = 952;
    auto* pre = app.add_subcommand("preprocess", "Preprocess a directory of binary PGM signature images");
    pre->add_option("-i,--in", pre_in, "Input directory")->required();
    pre->add_option("-o,--out", pre_out, "Output directory")->required();
    pre->add_option("--canvas-w", canvas_w, "Canvas width")->capture_default_str();
    pre->add_option("--canvas-h", canvas_h, "Canvas height")->capture_default_str();

    std::string csv_in, csv_out = "dataset.shsv";
    auto* imp = app.add_subcommand("import-csv", "Convert a feature CSV into the binary dataset format");
    imp->add_option("-i,--in", csv_in, "CSV file with header writer_id,kind,seq,f0,...")->required();
    imp->add_option("-o,--out", csv_out, "Output dataset file")->capture_default_str();

    std::string split_out = "split";
    auto* split = app.add_subcommand("split", "Split users and write the development pairs");
    add_config_options(split, split_cfg);
    split->add_option("-o,--out", split_out, "Output directory")->capture_default_str();

    std::string train_out = "models";
    auto* train = app.add_subcommand("train", "Batch-train the SGD and SVM models on the development set");
    add_config_options(train, train_cfg);
    train->add_option("-o,--out", train_out, "Output directory")->capture_default_str();

    std::string run_out;
    auto* run = app.add_subcommand("run", "Run the prequential experiment and write event logs and reports");
    add_config_options(run, run_cfg);
    run->add_option("-o,--out", run_out, "Output directory (overrides output_dir)");

    std::vector<std::string> report_logs;
    std::string report_out = "report.csv";
    std::size_t w_size = 0, w_step = 0;
    auto* report = app.add_subcommand("report", "Recompute an aggregated report from event logs");
    add_config_options(report, report_cfg);
    report->add_option("logs", report_logs, "Event log CSV files, one per run")->required();
    report->add_option("-o,--out", report_out, "Report CSV")->capture_default_str();
    report->add_option("--w-size", w_size, "Window size in events (default from config)");
    report->add_option("--w-step", w_step, "Window step in events (default from config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*synth) {
            shsv::cmd_synth(resolve_config(synth_cfg), synth_out, std::cout);
        } else if (*pre) {
            shsv::cmd_preprocess(pre_in, pre_out, canvas_w, canvas_h, std::cout);
        } else if (*imp) {
            shsv::cmd_import_csv(csv_in, csv_out, std::cout);
        } else if (*split) {
            shsv::cmd_split(resolve_config(split_cfg), split_out, std::cout);
        } else if (*train) {
            shsv::cmd_train(resolve_config(train_cfg), train_out, std::cout);
        } else if (*run) {
            auto cfg = resolve_config(run_cfg);
            if (!run_out.empty()) {
                cfg.output_dir = run_out;
            }
            shsv::cmd_run(cfg, std::cout);
        } else if (*report) {
            auto cfg = resolve_config(report_cfg);
            if (w_size != 0) {
                cfg.stream.w_size = w_size;
            }
            if (w_step != 0) {
                cfg.stream.w_step = w_step;
            }
            const auto s = shsv::resolved_stream(cfg);
            shsv::cmd_report({report_logs.begin(), report_logs.end()}, s.w_size, s.w_step, report_out, std::cout);
        }
    } catch (const shsv::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    std::cout.flush();
    return 0;
}
