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
#include <map>
#include <span>
#include <vector>

namespace shsv {

/// Stored signature kinds. Random forgeries are realised at pairing time from
/// another writer's genuine records and never appear here.
enum class Kind : std::uint8_t { Genuine = 0, Skilled = 1 };

/// One embedded signature. Features are kept in single precision; every
/// computation downstream widens to double.
struct SignatureRecord {
    std::uint32_t writer_id = 0;
    Kind kind = Kind::Genuine;
    std::uint32_t seq_index = 0;
    std::vector<float> features;

    bool operator==(const SignatureRecord&) const = default;
};

/**
 * Immutable collection of signature records sharing one feature dimension.
 *
 * Construction validates the invariants: dim >= 1, finite values, unique
 * (writer, kind, seq) keys and at least one genuine record per writer.
 * Per-writer views are ordered by seq_index.
 */
class Dataset {
public:
    Dataset() = default;
    Dataset(std::uint32_t dim, std::vector<SignatureRecord> records);

    std::uint32_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return records_.size(); }
    const std::vector<SignatureRecord>& records() const noexcept { return records_; }
    const SignatureRecord& record(std::size_t i) const { return records_.at(i); }

    /// Writer ids in ascending order.
    std::vector<std::uint32_t> writers() const;
    bool has_writer(std::uint32_t writer) const { return index_.count(writer) != 0; }

    /// Record indices of one writer's genuine / skilled signatures, seq-ordered.
    std::span<const std::size_t> genuine_of(std::uint32_t writer) const;
    std::span<const std::size_t> skilled_of(std::uint32_t writer) const;

    bool operator==(const Dataset& other) const {
        return dim_ == other.dim_ && records_ == other.records_;
    }

private:
    struct WriterEntry {
        std::vector<std::size_t> genuine;
        std::vector<std::size_t> skilled;
    };
    const WriterEntry& entry(std::uint32_t writer) const;

    std::uint32_t dim_ = 1;
    std::vector<SignatureRecord> records_;
    std::map<std::uint32_t, WriterEntry> index_;
};

// Binary feature file: "SHSV" | version u32 | dim u32 | count u32 | records
// (writer u32, kind u8, seq u32, dim x f32), all little-endian.
inline constexpr std::uint32_t kFeatureFormatVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 16;

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Header `writer_id,kind,seq,f0,...,f{K-1}`; kind is 0/1 or genuine/skilled.
Dataset import_csv(const std::filesystem::path& path);

struct SynthConfig {
    std::uint32_t writer_count = 100;
    std::uint32_t genuine_per_writer = 24;
    std::uint32_t skilled_per_writer = 24;
    std::uint32_t dim = 64;
    double genuine_noise_sigma = 0.35;
    double skilled_offset_scale = 1.5;
    double skilled_noise_sigma = 0.5;
    /// Per-coordinate velocity scale of the embedding drift along seq_index; 0 disables drift.
    double drift_velocity_sigma = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

/**
 * Synthetic stand-in for the feature extractor.
 *
 * Writer i gets a mean mu_i ~ N(0, I), a unit offset direction u_i and a drift
 * velocity v_i with coordinates N(0, drift_velocity_sigma^2). The record with
 * sequence index s is
 *
 *     genuine:  mu_i + s * v_i + N(0, genuine_noise_sigma^2 I)
 *     skilled:  mu_i + s * v_i + skilled_offset_scale * u_i + N(0, skilled_noise_sigma^2 I)
 *
 * Each writer draws from its own derive_seed(seed, i) stream.
 */
Dataset generate_synthetic(const SynthConfig& cfg);

struct SplitConfig {
    std::uint32_t dev_user_count = 10;       // nD
    std::uint32_t dev_genuine_per_user = 12; // nD_G, even
    std::uint32_t exploit_user_count = 20;   // nE
    std::uint32_t refs_per_user = 12;        // nE_R
    std::uint32_t claims_per_user = 10;      // nE_C
    std::uint64_t seed = 1;

    void validate() const;
};

struct UserSplit {
    std::vector<std::uint32_t> dev;      // ascending
    std::vector<std::uint32_t> exploit;  // ascending
};

/// Seeded disjoint split into development and exploitation writers, each
/// drawn only from writers with enough records for its role.
UserSplit split_users(const Dataset& dataset, const SplitConfig& cfg);

}  // namespace shsv
