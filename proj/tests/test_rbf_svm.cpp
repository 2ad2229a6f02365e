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
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles/oracles.hpp"
#include "shsv/errors.hpp"
#include "shsv/rbf_svm.hpp"
#include "shsv/rng.hpp"
#include "test_util.hpp"

namespace {

struct Problem {
    shsv::DenseRows x;
    std::vector<double> y;
    std::vector<std::vector<double>> x_plain;
};

Problem make_problem(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys) {
    Problem p{shsv::DenseRows(xs.front().size()), ys, xs};
    for (const auto& r : xs) {
        p.x.push_back(std::span<const double>(r));
    }
    return p;
}

Problem random_problem(shsv::Rng& rng, std::size_t n, std::size_t dim) {
    std::vector<std::vector<double>> xs(n, std::vector<double>(dim));
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        ys[i] = i % 2 == 0 ? 1.0 : -1.0;  // both classes always present
        for (auto& v : xs[i]) {
            v = rng.normal() + (ys[i] > 0 ? 0.0 : 0.7);
        }
    }
    return make_problem(xs, ys);
}

TEST(Rbf, Basics) {
    const std::vector<double> a{0, 0}, b{1, 0};
    EXPECT_EQ(shsv::rbf(a, a, 0.3), 1.0);
    EXPECT_NEAR(shsv::rbf(a, b, 1.0), std::exp(-1.0), 1e-15);
    shsv::Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> p(3), q(3);
        for (int k = 0; k < 3; ++k) {
            p[k] = rng.normal();
            q[k] = rng.normal();
        }
        EXPECT_EQ(shsv::rbf(p, q, 0.5), shsv::rbf(q, p, 0.5));
    }
    EXPECT_THROW(shsv::rbf(a, std::vector<double>{1.0}, 1.0), shsv::DataError);
}

TEST(KernelDecision, EmptySupportIsBias) {
    shsv::KernelModel m;
    m.support_vectors = shsv::DenseRows(3);
    m.b = 0.3;
    EXPECT_EQ(m.decision(std::vector<double>{1, 2, 3}), 0.3);
}

TEST(Smo, TwoPointSymmetry) {
    const auto p = make_problem({{0.0}, {2.0}}, {1.0, -1.0});
    const auto res = shsv::fit_smo(p.x, p.y, {});
    ASSERT_EQ(res.alpha.size(), 2u);
    EXPECT_NEAR(res.alpha[0], res.alpha[1], 1e-12);
    EXPECT_NEAR(res.model.decision(std::vector<double>{1.0}), 0.0, 1e-6);
    const auto oracle_sol = oracle::svm_dual_pg(p.x_plain, p.y, 1.0, shsv::kDefaultRbfGamma);
    EXPECT_NEAR(res.dual_objective, oracle_sol.objective, 1e-6);
    // Hand expansion at the first support vector.
    const double k12 = std::exp(-shsv::kDefaultRbfGamma * 4.0);
    const double expected = res.alpha[0] * 1.0 - res.alpha[1] * k12 + res.model.b;
    EXPECT_NEAR(res.model.decision(std::vector<double>{0.0}), expected, 1e-12);
}

TEST(Smo, XorMatchesQpOracle) {
    const auto p = make_problem({{0, 0}, {1, 1}, {0, 1}, {1, 0}}, {1, 1, -1, -1});
    shsv::SmoParams params;
    params.C = 10;
    params.gamma = 1;
    const auto res = shsv::fit_smo(p.x, p.y, params);
    const auto ref = oracle::svm_dual_pg(p.x_plain, p.y, 10, 1);
    EXPECT_NEAR(res.dual_objective, ref.objective, 1e-3);
    EXPECT_TRUE(shsv::kkt_audit(p.x, p.y, res.alpha, res.model.b, 1, 10, params.tol).ok);
}

TEST(Smo, DuplicatePointOfBothClasses) {
    const auto p = make_problem({{0.5, 0.5}, {0.5, 0.5}}, {1, -1});
    const auto res = shsv::fit_smo(p.x, p.y, {});
    EXPECT_NEAR(res.alpha[0], 1.0, 1e-12);
    EXPECT_NEAR(res.alpha[1], 1.0, 1e-12);
    EXPECT_NEAR(res.model.decision(std::vector<double>{0.5, 0.5}), 0.0, 1e-9);
    const auto ref = oracle::svm_dual_pg(p.x_plain, p.y, 1, shsv::kDefaultRbfGamma);
    EXPECT_NEAR(res.dual_objective, ref.objective, 1e-6);
}

TEST(Smo, RandomSmallInstancesMatchOracle) {
    shsv::Rng rng(2718);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.below(7), dim = 1 + rng.below(4);
        const auto p = random_problem(rng, n, dim);
        shsv::SmoParams params;
        params.C = std::pow(10.0, -1.0 + 2.0 * rng.uniform());
        params.gamma = std::pow(10.0, -1.5 + 2.0 * rng.uniform());
        params.seed = rng.next();
        const auto res = shsv::fit_smo(p.x, p.y, params);
        const auto ref = oracle::svm_dual_pg(p.x_plain, p.y, params.C, params.gamma);
        EXPECT_NEAR(res.dual_objective, ref.objective, 1e-3) << "trial " << trial;
        EXPECT_TRUE(res.converged);
        const auto kkt = shsv::kkt_audit(p.x, p.y, res.alpha, res.model.b, params.gamma, params.C, params.tol);
        EXPECT_TRUE(kkt.ok) << "trial " << trial << " max violation " << kkt.max_violation;
        EXPECT_LE(kkt.equality_residual, 1e-8);
        for (double a : res.alpha) {
            EXPECT_GE(a, 0.0);
            EXPECT_LE(a, params.C);
        }
    }
}

TEST(Smo, DualObjectiveNeverDecreases) {
    shsv::Rng rng(5);
    const auto p = random_problem(rng, 120, 3);
    shsv::SmoParams params;
    params.gamma = 0.5;
    params.record_dual_trace = true;
    const auto res = shsv::fit_smo(p.x, p.y, params);
    ASSERT_FALSE(res.dual_trace.empty());
    for (std::size_t i = 1; i < res.dual_trace.size(); ++i) {
        EXPECT_GE(res.dual_trace[i], res.dual_trace[i - 1] - 1e-12) << "update " << i;
    }
    EXPECT_NEAR(res.dual_trace.back(), shsv::dual_objective(p.x, p.y, res.alpha, params.gamma), 1e-8);
}

TEST(Smo, MarginSupportVectorsSitOnTheMargin) {
    shsv::Rng rng(6);
    const auto p = random_problem(rng, 80, 2);
    shsv::SmoParams params;
    params.gamma = 1;
    params.C = 5;
    const auto res = shsv::fit_smo(p.x, p.y, params);
    for (std::size_t i = 0; i < p.y.size(); ++i) {
        if (res.alpha[i] > 0 && res.alpha[i] < params.C) {
            EXPECT_LE(std::fabs(p.y[i] * res.model.decision(p.x.row(i)) - 1.0), params.tol);
        }
    }
}

TEST(Smo, PermutationInvariance) {
    shsv::Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const auto p = random_problem(rng, 60, 3);
        std::vector<std::size_t> perm(p.y.size());
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        shsv::DenseRows xp(3);
        std::vector<double> yp;
        for (auto i : perm) {
            xp.push_back(p.x.row(i));
            yp.push_back(p.y[i]);
        }
        shsv::SmoParams params;
        params.gamma = 0.7;
        params.tol = 1e-6;  // the invariance bounds are tighter than the default stopping tolerance
        const auto a = shsv::fit_smo(p.x, p.y, params);
        const auto b = shsv::fit_smo(xp, yp, params);
        EXPECT_NEAR(a.dual_objective, b.dual_objective, 1e-6) << "trial " << trial;
        for (std::size_t i = 0; i < p.y.size(); ++i) {
            EXPECT_NEAR(a.model.decision(p.x.row(i)), b.model.decision(p.x.row(i)), 1e-4);
        }
    }
}

TEST(Smo, Errors) {
    const auto one_class = make_problem({{0.0}, {1.0}}, {1.0, 1.0});
    EXPECT_THROW(shsv::fit_smo(one_class.x, one_class.y, {}), shsv::DataError);
    const auto bad_label = make_problem({{0.0}, {1.0}}, {1.0, 0.0});
    EXPECT_THROW(shsv::fit_smo(bad_label.x, bad_label.y, {}), shsv::DataError);
    shsv::DenseRows empty(2);
    EXPECT_THROW(shsv::fit_smo(empty, std::vector<double>{}, {}), shsv::DataError);
}

TEST(Smo, PassBudgetExhaustionIsFlagged) {
    shsv::Rng rng(8);
    const auto p = random_problem(rng, 200, 2);
    shsv::SmoParams params;
    params.gamma = 2;
    params.C = 100;
    params.max_passes = 1;
    const auto res = shsv::fit_smo(p.x, p.y, params);
    EXPECT_FALSE(res.converged);
    EXPECT_EQ(res.passes, 1u);
}

TEST(KernelCache, LruEvictionAndCounts) {
    shsv::Rng rng(9);
    const auto p = random_problem(rng, 10, 2);
    shsv::KernelRowCache cache(p.x, 0.5, 3 * 10 * sizeof(double));
    EXPECT_EQ(cache.capacity_rows(), 3u);
    cache.row(0);
    cache.row(1);
    cache.row(2);
    cache.row(0);  // hit, 0 becomes most recent
    cache.row(3);  // evicts 1
    cache.row(1);  // miss
    EXPECT_EQ(cache.hits(), 1u);
    EXPECT_EQ(cache.misses(), 5u);
    const auto r = cache.row(2);  // 2 was evicted by the reload of 1
    for (std::size_t j = 0; j < 10; ++j) {
        EXPECT_EQ(r[j], shsv::rbf(p.x.row(2), p.x.row(j), 0.5));
    }
    EXPECT_EQ(cache.misses(), 6u);
}

TEST(KernelCache, TinyBudgetStillTrainsIdentically) {
    shsv::Rng rng(10);
    const auto p = random_problem(rng, 90, 3);
    shsv::SmoParams big, tiny;
    big.gamma = tiny.gamma = 0.4;
    tiny.cache_mb = 0;
    const auto a = shsv::fit_smo(p.x, p.y, big);
    const auto b = shsv::fit_smo(p.x, p.y, tiny);
    EXPECT_EQ(a.alpha, b.alpha);
    EXPECT_EQ(a.model.b, b.model.b);
}

TEST(Checkpoint, RoundTripAndLayout) {
    testutil::TempDir dir;
    shsv::Rng rng(11);
    const auto p = random_problem(rng, 30, 4);
    const auto res = shsv::fit_smo(p.x, p.y, {});
    shsv::save_kernel_model(res.model, dir / "m.shkm");
    const auto sv = res.model.support_vectors.rows();
    EXPECT_EQ(testutil::read_bytes(dir / "m.shkm").size(), 40u + sv * (8 + 4 * 4));
    const auto back = shsv::load_kernel_model(dir / "m.shkm");
    EXPECT_EQ(back.alpha_y, res.model.alpha_y);
    EXPECT_EQ(back.b, res.model.b);
    for (std::size_t i = 0; i < 30; ++i) {
        // Support vectors are stored as f32.
        EXPECT_NEAR(back.decision(p.x.row(i)), res.model.decision(p.x.row(i)), 1e-5);
    }
}

}  // namespace
