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
#include "shsv/stream_engine.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

#include <fmt/format.h>

#include "shsv/errors.hpp"
#include "shsv/evaluation.hpp"
#include "shsv/rng.hpp"

namespace shsv {

namespace {

constexpr ClaimKind kKinds[] = {ClaimKind::Genuine, ClaimKind::RandomForgery, ClaimKind::SkilledForgery};

// Scores a block of claims with one frozen model: all reference/claim
// dissimilarities go through a single data-parallel decision call.
std::vector<double> fused_scores(const Verifier& model, const ExploitSet& exploit,
                                 std::span<const StreamClaim* const> claims) {
    std::vector<std::span<const float>> left, right;
    std::vector<std::size_t> group_end;
    for (const auto* c : claims) {
        const auto& refs = exploit.user(c->user).references;
        if (refs.empty()) {
            throw DataError(fmt::format("user {} has no reference signatures", c->user));
        }
        for (const auto& r : refs) {
            left.emplace_back(r.features);
            right.emplace_back(c->record.features);
        }
        group_end.push_back(left.size());
    }
    DenseRows rows(left.size(), exploit.dim);
    kernels::dissimilarity_rows(left, right, rows);
    std::vector<double> scores(rows.rows());
    if (!rows.empty()) {
        model.decisions(rows, scores);
    }
    std::vector<double> fused;
    fused.reserve(claims.size());
    std::size_t begin = 0;
    for (auto end : group_end) {
        fused.push_back(fuse_max(std::span<const double>(scores).subspan(begin, end - begin)));
        begin = end;
    }
    return fused;
}

}  // namespace

std::vector<StreamChunk> build_stream(const ExploitSet& exploit, std::uint64_t seed) {
    if (exploit.users.empty()) {
        throw DataError("build_stream: empty exploitation set");
    }
    const std::size_t n_c = exploit.claims_per_user();
    for (const auto& u : exploit.users) {
        if (u.genuine.size() != n_c || u.random.size() != n_c || u.skilled.size() != n_c) {
            throw DataError(fmt::format("build_stream: user {} does not hold {} claims of each kind", u.writer_id, n_c));
        }
    }
    Rng rng(seed);
    std::vector<StreamChunk> stream;
    stream.reserve(n_c);
    for (std::size_t j = 0; j < n_c; ++j) {
        StreamChunk chunk;
        chunk.index = static_cast<std::uint32_t>(j + 1);
        for (const auto& u : exploit.users) {
            for (auto kind : kKinds) {
                chunk.claims.push_back(StreamClaim{chunk.index, u.writer_id, kind, u.claims(kind)[j]});
            }
        }
        rng.shuffle(chunk.claims);
        stream.push_back(std::move(chunk));
    }
    return stream;
}

std::vector<StreamChunk> mixed_stream(const std::vector<std::vector<StreamChunk>>& streams, std::uint64_t seed) {
    std::size_t dim = 0;
    std::size_t total = 0;
    for (const auto& s : streams) {
        total += s.size();
        for (const auto& chunk : s) {
            for (const auto& c : chunk.claims) {
                if (dim == 0) {
                    dim = c.record.features.size();
                } else if (c.record.features.size() != dim) {
                    throw DataError(fmt::format("mixed_stream: feature dim {} does not match {}",
                                                c.record.features.size(), dim));
                }
            }
        }
    }
    if (streams.size() == 1) {
        return streams.front();
    }
    Rng rng(seed);
    std::vector<std::size_t> next(streams.size(), 0);
    std::vector<StreamChunk> out;
    out.reserve(total);
    for (std::size_t remaining = total; remaining > 0; --remaining) {
        auto draw = rng.below(remaining);
        std::size_t src = 0;
        for (; src < streams.size(); ++src) {
            const std::size_t left = streams[src].size() - next[src];
            if (draw < left) {
                break;
            }
            draw -= left;
        }
        StreamChunk chunk = streams[src][next[src]++];
        chunk.index = static_cast<std::uint32_t>(out.size() + 1);
        for (auto& c : chunk.claims) {
            c.chunk = chunk.index;
        }
        out.push_back(std::move(chunk));
    }
    return out;
}

void Verifier::update(std::span<const DissimilaritySample>) {
    throw DataError("this classifier is static and cannot be updated");
}

void LinearVerifier::update(std::span<const DissimilaritySample> batch) {
    model_ = partial_fit(std::move(model_), batch, derive_seed(seed_, updates_++));
}

VerificationEvent test_claim(const Verifier& model, std::span<const SignatureRecord> refs, const StreamClaim& claim,
                             std::uint64_t position, std::uint32_t model_version) {
    if (refs.empty()) {
        throw DataError(fmt::format("test_claim: user {} has an empty reference set", claim.user));
    }
    std::vector<std::span<const float>> left, right;
    for (const auto& r : refs) {
        left.emplace_back(r.features);
        right.emplace_back(claim.record.features);
    }
    DenseRows rows(refs.size(), claim.record.features.size());
    kernels::dissimilarity_rows(left, right, rows);
    std::vector<double> scores(rows.rows());
    model.decisions(rows, scores);
    VerificationEvent e;
    e.position = position;
    e.chunk = claim.chunk;
    e.user = claim.user;
    e.kind = claim.kind;
    e.score = fuse_max(scores);
    e.genuine = claim.kind == ClaimKind::Genuine;
    e.model_version = model_version;
    return e;
}

void StreamEvalConfig::validate() const {
    if (w_size > 0 && w_step > w_size) {
        throw ConfigError(fmt::format("stream config: w_step ({}) must not exceed w_size ({})", w_step, w_size));
    }
    if (run_count == 0) {
        throw ConfigError("stream config: run_count must be >= 1");
    }
    if (checkpoint_retention == 0) {
        throw ConfigError("stream config: checkpoint_retention must be >= 1");
    }
}

PrequentialResult prequential_run(const std::vector<StreamChunk>& stream, const ExploitSet& exploit, Verifier& model,
                                  const StreamEvalConfig& cfg, std::ostream* event_log) {
    cfg.validate();
    if (model.dim() != exploit.dim) {
        throw DataError(fmt::format("model dim {} does not match exploitation dim {}", model.dim(), exploit.dim));
    }
    std::vector<const StreamClaim*> claims;
    for (const auto& chunk : stream) {
        for (const auto& c : chunk.claims) {
            claims.push_back(&c);
        }
    }
    const std::size_t c_size = cfg.c_size > 0 ? cfg.c_size : 3 * exploit.users.size();
    const bool updating = cfg.updates_enabled && model.adaptive();

    PrequentialResult res;
    auto remember = [&](std::uint32_t version, std::uint64_t seen) {
        res.history.push_back(ModelSnapshot{version, seen, model.clone()});
        if (res.history.size() > cfg.checkpoint_retention) {
            res.history.erase(res.history.begin());
        }
    };
    remember(0, 0);
    if (event_log != nullptr) {
        write_event_header(*event_log);
    }

    std::deque<std::pair<std::uint64_t, const StreamClaim*>> pending_genuine, pending_random;
    std::uint32_t version = 0;
    res.events.reserve(claims.size());
    for (std::size_t begin = 0; begin < claims.size(); begin += c_size) {
        const std::size_t end = std::min(claims.size(), begin + c_size);
        const auto block = std::span<const StreamClaim* const>(claims).subspan(begin, end - begin);
        const auto scores = fused_scores(model, exploit, block);
        for (std::size_t k = 0; k < block.size(); ++k) {
            const auto* c = block[k];
            VerificationEvent e;
            e.position = begin + k;
            e.chunk = c->chunk;
            e.user = c->user;
            e.kind = c->kind;
            e.score = scores[k];
            e.genuine = c->kind == ClaimKind::Genuine;
            e.model_version = version;
            res.events.push_back(e);
            if (event_log != nullptr) {
                write_event_row(*event_log, e);
            }
            if (c->kind == ClaimKind::Genuine) {
                pending_genuine.emplace_back(e.position, c);
            } else if (c->kind == ClaimKind::RandomForgery) {
                pending_random.emplace_back(e.position, c);
            }
        }
        if (event_log != nullptr) {
            event_log->flush();
        }
        if (!updating || block.size() < c_size) {
            continue;
        }
        const std::size_t pairs = std::min(pending_genuine.size(), pending_random.size());
        if (pairs == 0) {
            continue;
        }
        UpdateRecord rec;
        rec.version_before = version;
        std::vector<DissimilaritySample> batch;
        for (std::size_t p = 0; p < pairs; ++p) {
            for (auto* queue : {&pending_genuine, &pending_random}) {
                const auto [pos, c] = queue->front();
                queue->pop_front();
                auto part = claim_dissimilarities(exploit.user(c->user), c->record, c->kind, c->chunk);
                for (auto& s : part) {
                    (s.label == Label::Positive ? rec.positives : rec.negatives) += 1;
                    batch.push_back(std::move(s));
                }
                rec.event_positions.push_back(pos);
            }
        }
        model.update(batch);
        rec.version_after = ++version;
        res.updates.push_back(std::move(rec));
        remember(version, end);
    }
    res.final_version = version;
    return res;
}

}  // namespace shsv
