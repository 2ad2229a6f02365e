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
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "shsv/dissimilarity.hpp"
#include "shsv/events.hpp"
#include "shsv/kernels.hpp"
#include "shsv/linear_sgd.hpp"
#include "shsv/rbf_svm.hpp"

namespace shsv {

struct StreamClaim {
    std::uint32_t chunk = 0;  // 1-based
    std::uint32_t user = 0;   // claimed identity
    ClaimKind kind = ClaimKind::Genuine;
    SignatureRecord record;   // the presented signature

    bool operator==(const StreamClaim&) const = default;
};

struct StreamChunk {
    std::uint32_t index = 0;
    std::vector<StreamClaim> claims;
};

/// nE_C chunks; chunk j carries claim j of each kind for every user, in a seeded arrival order.
std::vector<StreamChunk> build_stream(const ExploitSet& exploit, std::uint64_t seed);

/// Interleaves whole chunks, drawing the next source with probability proportional to
/// its remaining chunk count. Order within a source is preserved; chunks are re-indexed 1..n.
std::vector<StreamChunk> mixed_stream(const std::vector<std::vector<StreamChunk>>& streams, std::uint64_t seed);

/// A writer-independent classifier as the stream engine sees it.
class Verifier {
public:
    virtual ~Verifier() = default;

    virtual std::size_t dim() const = 0;
    virtual void decisions(const DenseRows& x, std::span<double> out) const = 0;
    virtual bool adaptive() const { return false; }
    virtual void update(std::span<const DissimilaritySample> batch);
    virtual std::unique_ptr<Verifier> clone() const = 0;
    virtual void save(const std::filesystem::path& path) const = 0;
};

/// SGD model; each update is one partial_fit pass seeded by derive_seed(seed, update index).
class LinearVerifier final : public Verifier {
public:
    LinearVerifier(LinearModel model, std::uint64_t seed, bool adaptive = true)
        : model_(std::move(model)), seed_(seed), adaptive_(adaptive) {}

    std::size_t dim() const override { return model_.dim(); }
    void decisions(const DenseRows& x, std::span<double> out) const override { model_.decisions(x, out); }
    bool adaptive() const override { return adaptive_; }
    void update(std::span<const DissimilaritySample> batch) override;
    std::unique_ptr<Verifier> clone() const override { return std::make_unique<LinearVerifier>(*this); }
    void save(const std::filesystem::path& path) const override { save_linear_model(model_, path); }

    const LinearModel& model() const { return model_; }

private:
    LinearModel model_;
    std::uint64_t seed_;
    bool adaptive_;
    std::uint64_t updates_ = 0;
};

/// Frozen RBF-SVM baseline.
class KernelVerifier final : public Verifier {
public:
    explicit KernelVerifier(KernelModel model) : model_(std::move(model)) {}

    std::size_t dim() const override { return model_.dim(); }
    void decisions(const DenseRows& x, std::span<double> out) const override { model_.decisions(x, out); }
    std::unique_ptr<Verifier> clone() const override { return std::make_unique<KernelVerifier>(*this); }
    void save(const std::filesystem::path& path) const override { save_kernel_model(model_, path); }

    const KernelModel& model() const { return model_; }

private:
    KernelModel model_;
};

/// Scores one claim against every reference of the claimed user and fuses with max.
VerificationEvent test_claim(const Verifier& model, std::span<const SignatureRecord> refs, const StreamClaim& claim,
                             std::uint64_t position = 0, std::uint32_t model_version = 0);

struct StreamEvalConfig {
    std::size_t c_size = 0;  // claims per update; 0 means 3 * nE (one update per chunk)
    std::size_t w_size = 0;  // 0 means 3 * nE
    std::size_t w_step = 0;  // 0 means nE
    std::size_t run_count = 5;
    std::uint64_t seed = 1;
    bool updates_enabled = true;
    /// Most recent model versions kept in the history (the initial version counts).
    std::size_t checkpoint_retention = std::numeric_limits<std::size_t>::max();

    void validate() const;
};

struct UpdateRecord {
    std::uint32_t version_before = 0;
    std::uint32_t version_after = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::vector<std::uint64_t> event_positions;  // claims whose dissimilarities were used
};

struct ModelSnapshot {
    std::uint32_t version = 0;
    std::uint64_t events_seen = 0;  // number of events tested before this version took over
    std::unique_ptr<Verifier> model;
};

struct PrequentialResult {
    std::vector<VerificationEvent> events;
    std::vector<UpdateRecord> updates;
    std::vector<ModelSnapshot> history;
    std::uint32_t final_version = 0;
};

/**
 * Test-then-train over the stream. Claims are consumed in blocks of c_size:
 * the whole block is scored by the frozen current model, then (if the block
 * is full and updates are enabled) the model is updated with the
 * dissimilarities of matched genuine / random-forgery claim pairs, so every
 * update batch is class-balanced. Unmatched claims wait for the next update.
 * Skilled forgeries are never used for training.
 *
 * If `event_log` is given, each scored block is written and flushed before
 * the update that follows it.
 */
PrequentialResult prequential_run(const std::vector<StreamChunk>& stream, const ExploitSet& exploit, Verifier& model,
                                  const StreamEvalConfig& cfg, std::ostream* event_log = nullptr);

}  // namespace shsv
