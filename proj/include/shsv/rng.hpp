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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace shsv {

/**
 * SplitMix64 generator with hand-written distributions.
 *
 * The standard library distributions are implementation-defined, so every
 * draw used by the toolkit goes through this class to keep selections,
 * synthetic data and shuffles reproducible across platforms:
 *
 *  - next():        state += 0x9E3779B97F4A7C15, then the SplitMix64 finalizer.
 *  - uniform():     top 53 bits of next() scaled by 2^-53, in [0, 1).
 *  - below(n):      rejection sampling on next() to remove modulo bias.
 *  - normal():      Box-Muller, both variates used (cosine first).
 *  - shuffle():     Fisher-Yates from the back, j = below(i + 1).
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept;
    double uniform() noexcept;
    std::uint64_t below(std::uint64_t n) noexcept;
    double normal() noexcept;

    template <typename T>
    void shuffle(std::vector<T>& v) noexcept {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct indices from [0, n) in draw order (partial Fisher-Yates). Requires k <= n.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for an independent sub-stream, e.g. derive_seed(master, run) or derive_seed(seed, writer_id).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

}  // namespace shsv
