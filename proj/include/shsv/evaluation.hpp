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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "shsv/events.hpp"

namespace shsv {

/// Max fusion of per-reference scores.
double fuse_max(std::span<const double> scores);

struct ErrorRates {
    double far = 0.0;
    double frr = 0.0;
};

/// Accept iff score >= tau.
ErrorRates far_frr(std::span<const double> genuine, std::span<const double> forgery, double tau);

struct EerResult {
    double eer = 0.0;
    double threshold = 0.0;
    double far = 0.0;
    double frr = 0.0;
};

/**
 * Global-threshold EER. Candidates are -inf, every distinct score and +inf;
 * the threshold minimising |FAR - FRR| wins (smallest tau on ties) and the
 * EER is the FAR/FRR midpoint there.
 */
EerResult eer_global(std::span<const double> genuine, std::span<const double> forgery);

struct MetricsWindow {
    std::uint64_t start = 0;  // position of the first event in the window
    double eer_skilled = 0.0;   // genuine vs skilled
    double eer_random = 0.0;    // genuine vs random
    double eer_combined = 0.0;  // genuine vs random + skilled
    double threshold_at_eer = 0.0;  // threshold of the skilled EER
    bool skilled_valid = false;
    bool random_valid = false;
    bool combined_valid = false;
    std::size_t n_genuine = 0;
    std::size_t n_random = 0;
    std::size_t n_skilled = 0;

    bool valid() const noexcept { return skilled_valid && random_valid && combined_valid; }
};

/// Windows of w_size events starting every w_step events; a trailing partial window is dropped.
std::vector<MetricsWindow> windowed_metrics(std::span<const VerificationEvent> events, std::size_t w_size,
                                            std::size_t w_step);

struct WindowAggregate {
    std::uint64_t start = 0;
    double eer_skilled_mean = 0.0, eer_skilled_std = 0.0;
    double eer_random_mean = 0.0, eer_random_std = 0.0;
    double eer_combined_mean = 0.0, eer_combined_std = 0.0;
    double threshold_mean = 0.0;
    std::size_t n_runs = 0;  // runs whose window was valid
};

struct RunAggregate {
    std::vector<WindowAggregate> windows;
    std::size_t run_count = 0;
};

/// Per-window mean and sample (n-1) standard deviation; a single contributing run has std 0.
/// Invalid windows are left out; a window no run could evaluate is dropped.
RunAggregate aggregate_runs(const std::vector<std::vector<MetricsWindow>>& runs);

/// Sample mean / (n-1) standard deviation helper (std = 0 for n < 2).
std::pair<double, double> mean_std(std::span<const double> values);

inline constexpr const char* kReportHeader =
    "window_start,eer_skilled_mean,eer_skilled_std,eer_random_mean,eer_random_std,eer_combined_mean,"
    "eer_combined_std,threshold_mean,n_runs";

void write_report_csv(std::ostream& out, const RunAggregate& agg);

struct ChartSeries {
    std::string name;
    const RunAggregate* aggregate = nullptr;
};

/// Plain SVG line chart of mean skilled EER against window start.
void write_svg_chart(std::ostream& out, const std::vector<ChartSeries>& series, const std::string& title);

}  // namespace shsv
