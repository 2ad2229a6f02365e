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
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shsv/evaluation.hpp"
#include "shsv/featurestore.hpp"
#include "shsv/linear_sgd.hpp"
#include "shsv/rbf_svm.hpp"
#include "shsv/stream_engine.hpp"

namespace shsv {

/**
 * Every knob of an experiment in one record. Loaded from a flat
 * `key = value` file; `#` starts a comment; unknown keys are rejected.
 * See README.md for the key list.
 */
struct ExperimentConfig {
    SynthConfig synth;
    SplitConfig split;
    StreamEvalConfig stream;
    SgdParams sgd;
    int sgd_epochs = 5;
    SmoParams smo;
    std::filesystem::path dataset;  // empty: synthesise from `synth`
    std::filesystem::path output_dir = "shsv_out";
    std::uint64_t master_seed = 1;
    bool frozen_sgd_baseline = false;
    bool write_svg = true;

    void validate() const;
};

ExperimentConfig parse_config(std::istream& in, const std::string& source_name = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);
/// Apply one `key = value` assignment (also used for command-line overrides).
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();
void write_config(std::ostream& out, const ExperimentConfig& cfg);

/// Seed for run r: derive_seed(master_seed, r). Sub-seeds per stage are derived from it.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t run);

enum class Method { AdaptiveSgd, StaticSvm, StaticSgd };
const char* method_name(Method m) noexcept;  // "sgd", "svm", "sgd_static"

struct MethodRun {
    Method method = Method::AdaptiveSgd;
    std::vector<VerificationEvent> events;
    std::vector<MetricsWindow> windows;
    std::size_t updates = 0;
};

struct RunResult {
    std::size_t run = 0;
    std::uint64_t seed = 0;
    UserSplit split;
    std::size_t dev_samples = 0;
    bool svm_converged = false;
    std::vector<MethodRun> methods;
};

struct ExperimentResult {
    std::vector<RunResult> runs;
    std::map<Method, RunAggregate> aggregates;
};

/// Resolve the 0 ("derived") defaults of the stream settings from the split.
StreamEvalConfig resolved_stream(const ExperimentConfig& cfg);

/// One independent run: split, development pairs, SGD and SVM fits, stream, prequential runs, windows.
/// Event logs go to `run_dir` when given.
RunResult run_once(const Dataset& data, const ExperimentConfig& cfg, std::size_t run,
                   const std::filesystem::path* run_dir = nullptr);

/// All runs plus aggregation. Writes event logs, reports and the chart below `out_dir` when given.
ExperimentResult run_experiment(const Dataset& data, const ExperimentConfig& cfg,
                                const std::filesystem::path* out_dir = nullptr);

/// Dataset named by the config, or the synthetic one it describes.
Dataset dataset_for(const ExperimentConfig& cfg);

// Subcommands. Each writes human-readable progress to `log` and ends with a
// `#SUMMARY` line; errors propagate as shsv::Error.
void cmd_synth(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);
void cmd_preprocess(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir,
                    std::uint32_t canvas_w, std::uint32_t canvas_h, std::ostream& log);
void cmd_import_csv(const std::filesystem::path& csv, const std::filesystem::path& out, std::ostream& log);
void cmd_split(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
void cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);
void cmd_run(const ExperimentConfig& cfg, std::ostream& log);
/// Recompute the aggregated report from per-run event logs of one method.
RunAggregate cmd_report(const std::vector<std::filesystem::path>& logs, std::size_t w_size, std::size_t w_step,
                        const std::filesystem::path& out_csv, std::ostream& log);

}  // namespace shsv
