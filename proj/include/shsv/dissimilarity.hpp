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
#include <span>
#include <vector>

#include "shsv/featurestore.hpp"

namespace shsv {

/// What a claim is with respect to the identity it claims.
enum class ClaimKind : std::uint8_t { Genuine = 0, RandomForgery = 1, SkilledForgery = 2 };

const char* claim_kind_code(ClaimKind k) noexcept;  // "G", "RF", "SK"
ClaimKind parse_claim_kind(const std::string& code);

enum class Label : std::int8_t { Positive = 1, Negative = -1 };

inline double label_sign(Label l) noexcept { return l == Label::Positive ? 1.0 : -1.0; }

/// Where one dissimilarity vector came from.
struct SampleMeta {
    std::uint32_t claimant = 0;          // identity being verified
    std::uint32_t reference_writer = 0;  // writer of the reference signature
    std::uint32_t source_writer = 0;     // writer who actually produced the claim signature
    ClaimKind claim_kind = ClaimKind::Genuine;
    std::uint32_t reference_seq = 0;
    std::uint32_t claim_seq = 0;
    std::int64_t chunk = -1;
};

struct DissimilaritySample {
    std::vector<double> dvec;
    Label label = Label::Negative;
    SampleMeta meta;
};

/// Positive iff the reference and claimant are the same writer and the claim is genuine.
Label label_for(const SampleMeta& meta) noexcept;

/// Dichotomy transformation |x1 - x2|, elementwise, in double precision.
std::vector<double> dt(std::span<const float> x1, std::span<const float> x2);
std::vector<double> dt(std::span<const double> x1, std::span<const double> x2);

struct DevSet {
    std::uint32_t dim = 0;
    std::vector<DissimilaritySample> samples;
    std::size_t positives_count = 0;
    std::size_t negatives_count = 0;
};

/**
 * Development pairs. Per user: nD_G genuine records drawn at random give all
 * nD_G(nD_G-1)/2 unordered positive pairs; nD_G/2 random forgeries (genuine
 * records of other development users, without replacement while the pool
 * allows) are paired with the first nD_G-1 drawn genuines. Users are visited
 * in ascending id order, each with its own derive_seed(seed, writer) stream.
 */
DevSet gen_dev_set(const Dataset& dataset, std::span<const std::uint32_t> dev_users, const SplitConfig& cfg);

struct ExploitUser {
    std::uint32_t writer_id = 0;
    std::vector<SignatureRecord> references;
    // nE_C claims of each kind; claim j of every kind arrives in chunk j.
    std::vector<SignatureRecord> genuine;
    std::vector<SignatureRecord> random;
    std::vector<SignatureRecord> skilled;

    const std::vector<SignatureRecord>& claims(ClaimKind k) const;
};

struct ExploitSet {
    std::uint32_t dim = 0;
    std::vector<ExploitUser> users;

    const ExploitUser& user(std::uint32_t writer_id) const;
    std::size_t claims_per_user() const { return users.empty() ? 0 : users.front().genuine.size(); }
};

/**
 * Exploitation selections. Per user: nE_R references and nE_C genuine claims
 * drawn without overlap from the user's genuine records, nE_C skilled claims,
 * and nE_C random forgeries from other exploitation users' genuine records.
 * Genuine and skilled claims are ordered by seq_index so the stream follows
 * each writer's own timeline.
 */
ExploitSet gen_exploit_set(const Dataset& dataset, std::span<const std::uint32_t> exploit_users,
                           const SplitConfig& cfg);

/// Every reference x claim dissimilarity: nE * nE_R * nE_C * 3 samples.
std::vector<DissimilaritySample> materialize(const ExploitSet& exploit);

/// DT of every reference of `user` against one claim.
std::vector<DissimilaritySample> claim_dissimilarities(const ExploitUser& user, const SignatureRecord& claim,
                                                       ClaimKind kind, std::int64_t chunk = -1);

/// Joins exploitation sets from different sources; writer ids must not collide.
ExploitSet merge_exploit_sets(const std::vector<ExploitSet>& sets);

/// Dev set as a feature file: writer = claimant, kind byte 0 = positive, 1 = negative, seq = sample index.
Dataset devset_to_dataset(const DevSet& dev);
DevSet devset_from_dataset(const Dataset& data);

}  // namespace shsv
