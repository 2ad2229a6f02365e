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
#include "shsv/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "shsv/errors.hpp"

namespace shsv {

double fuse_max(std::span<const double> scores) {
    if (scores.empty()) {
        throw DataError("fuse_max: empty score list");
    }
    return *std::max_element(scores.begin(), scores.end());
}

ErrorRates far_frr(std::span<const double> genuine, std::span<const double> forgery, double tau) {
    if (genuine.empty() || forgery.empty()) {
        throw DataError("far_frr: both classes need at least one score");
    }
    const auto accepted = std::count_if(forgery.begin(), forgery.end(), [tau](double s) { return s >= tau; });
    const auto rejected = std::count_if(genuine.begin(), genuine.end(), [tau](double s) { return s < tau; });
    return {static_cast<double>(accepted) / static_cast<double>(forgery.size()),
            static_cast<double>(rejected) / static_cast<double>(genuine.size())};
}

EerResult eer_global(std::span<const double> genuine, std::span<const double> forgery) {
    if (genuine.empty() || forgery.empty()) {
        throw DataError("eer_global: both classes need at least one score");
    }
    std::vector<double> g(genuine.begin(), genuine.end());
    std::vector<double> f(forgery.begin(), forgery.end());
    std::sort(g.begin(), g.end());
    std::sort(f.begin(), f.end());
    std::vector<double> taus;
    taus.reserve(g.size() + f.size() + 2);
    taus.push_back(-std::numeric_limits<double>::infinity());
    std::merge(g.begin(), g.end(), f.begin(), f.end(), std::back_inserter(taus));
    taus.push_back(std::numeric_limits<double>::infinity());
    taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

    const auto n_g = static_cast<std::int64_t>(g.size());
    const auto n_f = static_cast<std::int64_t>(f.size());
    // |FAR - FRR| compared exactly as |accepted * nG - rejected * nF|.
    std::int64_t best_gap = std::numeric_limits<std::int64_t>::max();
    std::int64_t best_acc = 0, best_rej = 0;
    double best_tau = taus.front();
    std::size_t gi = 0, fi = 0;
    for (double tau : taus) {
        while (gi < g.size() && g[gi] < tau) {
            ++gi;
        }
        while (fi < f.size() && f[fi] < tau) {
            ++fi;
        }
        const auto rejected = static_cast<std::int64_t>(gi);
        const auto accepted = n_f - static_cast<std::int64_t>(fi);
        const std::int64_t gap = std::llabs(accepted * n_g - rejected * n_f);
        if (gap < best_gap) {
            best_gap = gap;
            best_acc = accepted;
            best_rej = rejected;
            best_tau = tau;
        }
    }
    EerResult r;
    r.far = static_cast<double>(best_acc) / static_cast<double>(n_f);
    r.frr = static_cast<double>(best_rej) / static_cast<double>(n_g);
    r.eer = 0.5 * (r.far + r.frr);
    r.threshold = best_tau;
    return r;
}

std::vector<MetricsWindow> windowed_metrics(std::span<const VerificationEvent> events, std::size_t w_size,
                                            std::size_t w_step) {
    if (w_size == 0 || w_step == 0 || w_step > w_size) {
        throw ConfigError(fmt::format("windowed_metrics: need 0 < w_step <= w_size (got {} / {})", w_step, w_size));
    }
    std::vector<MetricsWindow> out;
    std::vector<double> gen, rnd, sk, forg;
    for (std::size_t start = 0; start + w_size <= events.size(); start += w_step) {
        gen.clear();
        rnd.clear();
        sk.clear();
        forg.clear();
        for (std::size_t i = start; i < start + w_size; ++i) {
            const auto& e = events[i];
            switch (e.kind) {
                case ClaimKind::Genuine: gen.push_back(e.score); break;
                case ClaimKind::RandomForgery: rnd.push_back(e.score); forg.push_back(e.score); break;
                case ClaimKind::SkilledForgery: sk.push_back(e.score); forg.push_back(e.score); break;
            }
        }
        MetricsWindow w;
        w.start = events[start].position;
        w.n_genuine = gen.size();
        w.n_random = rnd.size();
        w.n_skilled = sk.size();
        if (!gen.empty()) {
            if (!sk.empty()) {
                const auto r = eer_global(gen, sk);
                w.eer_skilled = r.eer;
                w.threshold_at_eer = r.threshold;
                w.skilled_valid = true;
            }
            if (!rnd.empty()) {
                w.eer_random = eer_global(gen, rnd).eer;
                w.random_valid = true;
            }
            if (!forg.empty()) {
                w.eer_combined = eer_global(gen, forg).eer;
                w.combined_valid = true;
            }
        }
        out.push_back(w);
    }
    return out;
}

std::pair<double, double> mean_std(std::span<const double> values) {
    if (values.empty()) {
        return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    const double mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

RunAggregate aggregate_runs(const std::vector<std::vector<MetricsWindow>>& runs) {
    if (runs.empty()) {
        throw DataError("aggregate_runs: no runs");
    }
    const std::size_t n_windows = runs.front().size();
    for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].size() != n_windows) {
            throw DataError(fmt::format("aggregate_runs: run {} has {} windows, run 0 has {}", r, runs[r].size(),
                                        n_windows));
        }
    }
    RunAggregate agg;
    agg.run_count = runs.size();
    std::vector<double> sk, rnd, comb, thr;
    for (std::size_t w = 0; w < n_windows; ++w) {
        sk.clear();
        rnd.clear();
        comb.clear();
        thr.clear();
        for (const auto& run : runs) {
            const auto& m = run[w];
            if (!m.valid()) {
                continue;
            }
            sk.push_back(m.eer_skilled);
            rnd.push_back(m.eer_random);
            comb.push_back(m.eer_combined);
            thr.push_back(m.threshold_at_eer);
        }
        if (sk.empty()) {
            continue;
        }
        WindowAggregate a;
        a.start = runs.front()[w].start;
        std::tie(a.eer_skilled_mean, a.eer_skilled_std) = mean_std(sk);
        std::tie(a.eer_random_mean, a.eer_random_std) = mean_std(rnd);
        std::tie(a.eer_combined_mean, a.eer_combined_std) = mean_std(comb);
        a.threshold_mean = mean_std(thr).first;
        a.n_runs = sk.size();
        agg.windows.push_back(a);
    }
    return agg;
}

void write_report_csv(std::ostream& out, const RunAggregate& agg) {
    out << kReportHeader << '\n';
    for (const auto& w : agg.windows) {
        out << fmt::format("{},{:.8f},{:.8f},{:.8f},{:.8f},{:.8f},{:.8f},{:.8f},{}\n", w.start, w.eer_skilled_mean,
                           w.eer_skilled_std, w.eer_random_mean, w.eer_random_std, w.eer_combined_mean,
                           w.eer_combined_std, w.threshold_mean, w.n_runs);
    }
}

void write_svg_chart(std::ostream& out, const std::vector<ChartSeries>& series, const std::string& title) {
    constexpr double width = 720, height = 420, left = 60, right = 20, top = 40, bottom = 50;
    static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    double x_max = 1.0, y_max = 0.05;
    for (const auto& s : series) {
        for (const auto& w : s.aggregate->windows) {
            x_max = std::max(x_max, static_cast<double>(w.start));
            y_max = std::max(y_max, w.eer_skilled_mean + w.eer_skilled_std);
        }
    }
    y_max = std::ceil(y_max * 20.0) / 20.0;
    auto px = [&](double x) { return left + (width - left - right) * x / x_max; };
    auto py = [&](double y) { return height - bottom - (height - top - bottom) * y / y_max; };

    out << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
                       "font-family=\"sans-serif\" font-size=\"12\">\n",
                       width, height);
    out << fmt::format("<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", width / 2,
                       title);
    out << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", left,
                       height - bottom, width - right);
    out << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", left, top,
                       height - bottom);
    for (int i = 0; i <= 5; ++i) {
        const double y = y_max * i / 5.0;
        out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n", left - 6,
                           py(y) + 4, y);
        const double x = x_max * i / 5.0;
        out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.0f}</text>\n", px(x),
                           height - bottom + 18, x);
    }
    out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">window start (events)</text>\n",
                       (left + width - right) / 2, height - 12);
    out << fmt::format("<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">"
                       "EER (skilled, global threshold)</text>\n",
                       (top + height - bottom) / 2, (top + height - bottom) / 2);
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = colors[s % std::size(colors)];
        std::string path;
        for (const auto& w : series[s].aggregate->windows) {
            path += fmt::format("{}{:.1f},{:.1f}", path.empty() ? "M" : " L", px(static_cast<double>(w.start)),
                                py(w.eer_skilled_mean));
        }
        out << fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", path, color);
        out << fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", width - right - 140,
                           top + 16 * (s + 1), color, series[s].name);
    }
    out << "</svg>\n";
}

}  // namespace shsv
