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
#include "shsv/dissimilarity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "shsv/errors.hpp"
#include "shsv/kernels.hpp"
#include "shsv/rng.hpp"

namespace shsv {

namespace {

constexpr std::uint64_t kExploitSalt = 0x45585031;  // "EXP1"

std::vector<std::size_t> records_of_others(const Dataset& data, std::span<const std::uint32_t> users,
                                           std::uint32_t self) {
    std::vector<std::size_t> pool;
    for (auto u : users) {
        if (u != self) {
            const auto g = data.genuine_of(u);
            pool.insert(pool.end(), g.begin(), g.end());
        }
    }
    return pool;
}

// `count` draws from the pool; without replacement while the pool is large enough.
std::vector<std::size_t> draw_from_pool(Rng& rng, const std::vector<std::size_t>& pool, std::size_t count) {
    std::vector<std::size_t> out;
    if (pool.size() >= count) {
        for (auto i : rng.sample_indices(pool.size(), count)) {
            out.push_back(pool[i]);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(pool[rng.below(pool.size())]);
        }
    }
    return out;
}

DissimilaritySample make_sample(const SignatureRecord& ref, const SignatureRecord& claim, std::uint32_t claimant,
                                ClaimKind kind, std::int64_t chunk) {
    DissimilaritySample s;
    s.dvec = dt(ref.features, claim.features);
    s.meta = SampleMeta{claimant, ref.writer_id, claim.writer_id, kind, ref.seq_index, claim.seq_index, chunk};
    s.label = label_for(s.meta);
    return s;
}

void check_users(const Dataset& data, std::span<const std::uint32_t> users) {
    std::set<std::uint32_t> seen;
    for (auto u : users) {
        if (!data.has_writer(u)) {
            throw DataError(fmt::format("writer {} is not in the dataset", u));
        }
        if (!seen.insert(u).second) {
            throw DataError(fmt::format("writer {} listed twice", u));
        }
    }
}

}  // namespace

const char* claim_kind_code(ClaimKind k) noexcept {
    switch (k) {
        case ClaimKind::Genuine: return "G";
        case ClaimKind::RandomForgery: return "RF";
        case ClaimKind::SkilledForgery: return "SK";
    }
    return "?";
}

ClaimKind parse_claim_kind(const std::string& code) {
    if (code == "G") return ClaimKind::Genuine;
    if (code == "RF") return ClaimKind::RandomForgery;
    if (code == "SK") return ClaimKind::SkilledForgery;
    throw DataError("unknown claim kind '" + code + "'");
}

Label label_for(const SampleMeta& meta) noexcept {
    return meta.reference_writer == meta.claimant && meta.claim_kind == ClaimKind::Genuine ? Label::Positive
                                                                                            : Label::Negative;
}

std::vector<double> dt(std::span<const float> x1, std::span<const float> x2) {
    if (x1.size() != x2.size()) {
        throw DataError(fmt::format("dt: dimension mismatch ({} vs {})", x1.size(), x2.size()));
    }
    std::vector<double> out(x1.size());
    kernels::absolute_difference(x1, x2, out);
    return out;
}

std::vector<double> dt(std::span<const double> x1, std::span<const double> x2) {
    if (x1.size() != x2.size()) {
        throw DataError(fmt::format("dt: dimension mismatch ({} vs {})", x1.size(), x2.size()));
    }
    std::vector<double> out(x1.size());
    for (std::size_t k = 0; k < x1.size(); ++k) {
        out[k] = std::fabs(x1[k] - x2[k]);
    }
    return out;
}

DevSet gen_dev_set(const Dataset& dataset, std::span<const std::uint32_t> dev_users, const SplitConfig& cfg) {
    cfg.validate();
    check_users(dataset, dev_users);
    if (dev_users.size() < 2) {
        throw DataError("development set needs at least 2 users to source random forgeries");
    }
    std::vector<std::uint32_t> users(dev_users.begin(), dev_users.end());
    std::sort(users.begin(), users.end());
    const std::size_t n_g = cfg.dev_genuine_per_user;
    for (auto u : users) {
        if (dataset.genuine_of(u).size() < n_g) {
            throw DataError(fmt::format("development writer {} has {} genuine records, {} required", u,
                                        dataset.genuine_of(u).size(), n_g));
        }
    }

    std::vector<std::vector<DissimilaritySample>> per_user(users.size());
    const auto n_users = static_cast<std::ptrdiff_t>(users.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t ui = 0; ui < n_users; ++ui) {
        const auto user = users[ui];
        Rng rng(derive_seed(cfg.seed, user));
        const auto genuine = dataset.genuine_of(user);
        std::vector<const SignatureRecord*> chosen;
        for (auto i : rng.sample_indices(genuine.size(), n_g)) {
            chosen.push_back(&dataset.record(genuine[i]));
        }
        const auto rf = draw_from_pool(rng, records_of_others(dataset, users, user), n_g / 2);

        auto& out = per_user[ui];
        out.reserve(n_g * (n_g - 1));
        for (std::size_t k = 0; k + 1 < n_g; ++k) {
            for (std::size_t j = k + 1; j < n_g; ++j) {
                out.push_back(make_sample(*chosen[k], *chosen[j], user, ClaimKind::Genuine, -1));
            }
        }
        for (std::size_t k = 0; k + 1 < n_g; ++k) {
            for (auto r : rf) {
                out.push_back(make_sample(*chosen[k], dataset.record(r), user, ClaimKind::RandomForgery, -1));
            }
        }
    }

    DevSet dev;
    dev.dim = dataset.dim();
    for (auto& part : per_user) {
        for (auto& s : part) {
            (s.label == Label::Positive ? dev.positives_count : dev.negatives_count) += 1;
            dev.samples.push_back(std::move(s));
        }
    }
    return dev;
}

const std::vector<SignatureRecord>& ExploitUser::claims(ClaimKind k) const {
    switch (k) {
        case ClaimKind::Genuine: return genuine;
        case ClaimKind::RandomForgery: return random;
        case ClaimKind::SkilledForgery: return skilled;
    }
    return genuine;
}

const ExploitUser& ExploitSet::user(std::uint32_t writer_id) const {
    for (const auto& u : users) {
        if (u.writer_id == writer_id) {
            return u;
        }
    }
    throw DataError(fmt::format("writer {} is not an exploitation user", writer_id));
}

ExploitSet gen_exploit_set(const Dataset& dataset, std::span<const std::uint32_t> exploit_users,
                           const SplitConfig& cfg) {
    cfg.validate();
    check_users(dataset, exploit_users);
    if (exploit_users.size() < 2) {
        throw DataError("exploitation set needs at least 2 users to source random forgeries");
    }
    std::vector<std::uint32_t> users(exploit_users.begin(), exploit_users.end());
    std::sort(users.begin(), users.end());
    const std::size_t n_r = cfg.refs_per_user;
    const std::size_t n_c = cfg.claims_per_user;

    ExploitSet out;
    out.dim = dataset.dim();
    for (auto user : users) {
        const auto genuine = dataset.genuine_of(user);
        const auto skilled = dataset.skilled_of(user);
        if (genuine.size() < n_r + n_c || skilled.size() < n_c) {
            throw DataError(fmt::format(
                "exploitation writer {} has {} genuine / {} skilled records, needs {} / {}", user, genuine.size(),
                skilled.size(), n_r + n_c, n_c));
        }
        Rng rng(derive_seed(derive_seed(cfg.seed, kExploitSalt), user));
        ExploitUser eu;
        eu.writer_id = user;

        const auto picks = rng.sample_indices(genuine.size(), n_r + n_c);
        std::vector<std::size_t> refs(picks.begin(), picks.begin() + static_cast<std::ptrdiff_t>(n_r));
        std::vector<std::size_t> claims(picks.begin() + static_cast<std::ptrdiff_t>(n_r), picks.end());
        std::sort(refs.begin(), refs.end());
        std::sort(claims.begin(), claims.end());
        for (auto i : refs) {
            eu.references.push_back(dataset.record(genuine[i]));
        }
        for (auto i : claims) {
            eu.genuine.push_back(dataset.record(genuine[i]));
        }
        auto sk = rng.sample_indices(skilled.size(), n_c);
        std::sort(sk.begin(), sk.end());
        for (auto i : sk) {
            eu.skilled.push_back(dataset.record(skilled[i]));
        }
        for (auto r : draw_from_pool(rng, records_of_others(dataset, users, user), n_c)) {
            eu.random.push_back(dataset.record(r));
        }
        out.users.push_back(std::move(eu));
    }
    return out;
}

std::vector<DissimilaritySample> claim_dissimilarities(const ExploitUser& user, const SignatureRecord& claim,
                                                       ClaimKind kind, std::int64_t chunk) {
    std::vector<DissimilaritySample> out;
    out.reserve(user.references.size());
    for (const auto& ref : user.references) {
        out.push_back(make_sample(ref, claim, user.writer_id, kind, chunk));
    }
    return out;
}

std::vector<DissimilaritySample> materialize(const ExploitSet& exploit) {
    std::vector<DissimilaritySample> out;
    constexpr ClaimKind kinds[] = {ClaimKind::Genuine, ClaimKind::RandomForgery, ClaimKind::SkilledForgery};
    for (const auto& u : exploit.users) {
        for (const auto& ref : u.references) {
            for (std::size_t j = 0; j < u.genuine.size(); ++j) {
                for (auto kind : kinds) {
                    out.push_back(make_sample(ref, u.claims(kind)[j], u.writer_id, kind,
                                              static_cast<std::int64_t>(j + 1)));
                }
            }
        }
    }
    return out;
}

ExploitSet merge_exploit_sets(const std::vector<ExploitSet>& sets) {
    ExploitSet out;
    std::set<std::uint32_t> ids;
    for (const auto& s : sets) {
        if (out.dim == 0) {
            out.dim = s.dim;
        } else if (s.dim != out.dim) {
            throw DataError(fmt::format("cannot merge exploitation sets of dim {} and {}", out.dim, s.dim));
        }
        for (const auto& u : s.users) {
            if (!ids.insert(u.writer_id).second) {
                throw DataError(fmt::format("writer id {} appears in more than one exploitation set", u.writer_id));
            }
            out.users.push_back(u);
        }
    }
    return out;
}

Dataset devset_to_dataset(const DevSet& dev) {
    std::vector<SignatureRecord> records;
    records.reserve(dev.samples.size());
    for (std::size_t i = 0; i < dev.samples.size(); ++i) {
        const auto& s = dev.samples[i];
        SignatureRecord r;
        r.writer_id = s.meta.claimant;
        r.kind = s.label == Label::Positive ? Kind::Genuine : Kind::Skilled;
        r.seq_index = static_cast<std::uint32_t>(i);
        r.features.assign(s.dvec.begin(), s.dvec.end());
        records.push_back(std::move(r));
    }
    return Dataset(dev.dim == 0 ? 1 : dev.dim, std::move(records));
}

DevSet devset_from_dataset(const Dataset& data) {
    DevSet dev;
    dev.dim = data.dim();
    for (const auto& r : data.records()) {
        DissimilaritySample s;
        s.dvec.assign(r.features.begin(), r.features.end());
        s.label = r.kind == Kind::Genuine ? Label::Positive : Label::Negative;
        s.meta.claimant = r.writer_id;
        s.meta.reference_writer = r.writer_id;
        s.meta.claim_kind = s.label == Label::Positive ? ClaimKind::Genuine : ClaimKind::RandomForgery;
        s.meta.claim_seq = r.seq_index;
        (s.label == Label::Positive ? dev.positives_count : dev.negatives_count) += 1;
        dev.samples.push_back(std::move(s));
    }
    return dev;
}

}  // namespace shsv
