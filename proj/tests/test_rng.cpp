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

#include <algorithm>
#include <cmath>
#include <set>

#include "shsv/rng.hpp"

namespace {

// SplitMix64 reference values for seed 0 (widely published test vector).
TEST(Rng, SplitMixReferenceSequence) {
    shsv::Rng rng(0);
    EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ULL);
    EXPECT_EQ(rng.next(), 0x06C45D188009454FULL);
}

TEST(Rng, UniformIsInUnitInterval) {
    shsv::Rng rng(42);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, BelowIsUnbiasedEnough) {
    shsv::Rng rng(3);
    std::vector<int> counts(7, 0);
    const int draws = 70000;
    for (int i = 0; i < draws; ++i) {
        const auto v = rng.below(7);
        ASSERT_LT(v, 7u);
        ++counts[v];
    }
    // chi-square with 6 dof; 22.46 is the 0.999 quantile.
    double chi2 = 0;
    for (int c : counts) {
        chi2 += (c - draws / 7.0) * (c - draws / 7.0) / (draws / 7.0);
    }
    EXPECT_LT(chi2, 22.46);
}

TEST(Rng, NormalMoments) {
    shsv::Rng rng(11);
    const int n = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(Rng, ShuffleIsPermutationAndDeterministic) {
    std::vector<int> a(50), b;
    for (int i = 0; i < 50; ++i) {
        a[i] = i;
    }
    b = a;
    shsv::Rng r1(9), r2(9);
    r1.shuffle(a);
    r2.shuffle(b);
    EXPECT_EQ(a, b);
    std::vector<int> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) {
        EXPECT_EQ(sorted[i], i);
    }
}

TEST(Rng, SampleIndicesDistinct) {
    shsv::Rng rng(5);
    for (std::size_t k = 0; k <= 20; ++k) {
        const auto idx = rng.sample_indices(20, k);
        ASSERT_EQ(idx.size(), k);
        std::set<std::size_t> uniq(idx.begin(), idx.end());
        EXPECT_EQ(uniq.size(), k);
        for (auto i : idx) {
            EXPECT_LT(i, 20u);
        }
    }
}

TEST(Rng, DerivedSeedsDiffer) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t r = 0; r < 1000; ++r) {
        seen.insert(shsv::derive_seed(1, r));
    }
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(shsv::derive_seed(1, 2), shsv::derive_seed(2, 1));
}

}  // namespace
