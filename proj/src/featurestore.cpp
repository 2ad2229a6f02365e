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
#include "shsv/featurestore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "binio.hpp"
#include "shsv/errors.hpp"
#include "shsv/rng.hpp"

namespace shsv {

namespace {

const char* kind_name(Kind k) { return k == Kind::Genuine ? "genuine" : "skilled"; }

}  // namespace

Dataset::Dataset(std::uint32_t dim, std::vector<SignatureRecord> records)
    : dim_(dim), records_(std::move(records)) {
    if (dim_ == 0) {
        throw DataError("dataset dim must be >= 1");
    }
    std::set<std::tuple<std::uint32_t, std::uint8_t, std::uint32_t>> keys;
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.features.size() != dim_) {
            throw DataError(fmt::format("record {} has dim {}, dataset dim is {}", i, r.features.size(), dim_));
        }
        for (float v : r.features) {
            if (!std::isfinite(v)) {
                throw DataError(fmt::format("record {} (writer {}) holds a non-finite value", i, r.writer_id));
            }
        }
        if (!keys.emplace(r.writer_id, static_cast<std::uint8_t>(r.kind), r.seq_index).second) {
            throw DataError(fmt::format("duplicate record (writer {}, {}, seq {})", r.writer_id,
                                        kind_name(r.kind), r.seq_index));
        }
        auto& e = index_[r.writer_id];
        (r.kind == Kind::Genuine ? e.genuine : e.skilled).push_back(i);
    }
    for (auto& [writer, e] : index_) {
        if (e.genuine.empty()) {
            throw DataError(fmt::format("writer {} has no genuine records", writer));
        }
        auto by_seq = [this](std::size_t a, std::size_t b) {
            return records_[a].seq_index < records_[b].seq_index;
        };
        std::sort(e.genuine.begin(), e.genuine.end(), by_seq);
        std::sort(e.skilled.begin(), e.skilled.end(), by_seq);
    }
}

std::vector<std::uint32_t> Dataset::writers() const {
    std::vector<std::uint32_t> out;
    out.reserve(index_.size());
    for (const auto& kv : index_) {
        out.push_back(kv.first);
    }
    return out;
}

const Dataset::WriterEntry& Dataset::entry(std::uint32_t writer) const {
    auto it = index_.find(writer);
    if (it == index_.end()) {
        throw DataError(fmt::format("unknown writer {}", writer));
    }
    return it->second;
}

std::span<const std::size_t> Dataset::genuine_of(std::uint32_t writer) const { return entry(writer).genuine; }

std::span<const std::size_t> Dataset::skilled_of(std::uint32_t writer) const { return entry(writer).skilled; }

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    if (dataset.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw DataError("record count exceeds the u32 count field");
    }
    detail::ByteWriter w;
    w.bytes("SHSV", 4);
    w.put<std::uint32_t>(kFeatureFormatVersion);
    w.put<std::uint32_t>(dataset.dim());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(dataset.size()));
    for (const auto& r : dataset.records()) {
        w.put<std::uint32_t>(r.writer_id);
        w.put<std::uint8_t>(static_cast<std::uint8_t>(r.kind));
        w.put<std::uint32_t>(r.seq_index);
        w.bytes(r.features.data(), r.features.size() * sizeof(float));
    }
    w.write_to(path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    detail::ByteReader in(path.string());
    char magic[4];
    in.bytes(magic, 4, "magic");
    if (std::memcmp(magic, "SHSV", 4) != 0) {
        throw DataError("'" + path.string() + "' is not a feature file (bad magic)");
    }
    const auto version = in.get<std::uint32_t>("version");
    if (version != kFeatureFormatVersion) {
        throw DataError(fmt::format("'{}': unsupported feature format version {}", path.string(), version));
    }
    const auto dim = in.get<std::uint32_t>("dim");
    const auto count = in.get<std::uint32_t>("record count");
    if (dim == 0) {
        throw DataError("'" + path.string() + "': dim field is zero");
    }
    std::vector<SignatureRecord> records;
    records.reserve(std::min<std::size_t>(count, in.remaining() / (9 + 4ull * dim) + 1));
    for (std::uint32_t i = 0; i < count; ++i) {
        SignatureRecord r;
        r.writer_id = in.get<std::uint32_t>("writer_id");
        const auto kind = in.get<std::uint8_t>("kind");
        if (kind > 1) {
            throw DataError(fmt::format("'{}': invalid kind byte {} at offset {}", path.string(), kind,
                                        in.offset() - 1));
        }
        r.kind = static_cast<Kind>(kind);
        r.seq_index = in.get<std::uint32_t>("seq_index");
        r.features.resize(dim);
        in.bytes(r.features.data(), dim * sizeof(float), "feature values");
        records.push_back(std::move(r));
    }
    if (in.remaining() != 0) {
        throw DataError(fmt::format("'{}': {} trailing bytes after the last record", path.string(), in.remaining()));
    }
    return Dataset(dim, std::move(records));
}

Dataset import_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
                cell.pop_back();
            }
            cells.push_back(cell);
        }
        return cells;
    };
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("'" + path.string() + "' is empty");
    }
    const auto header = split(line);
    if (header.size() < 4 || header[0] != "writer_id" || header[1] != "kind" || header[2] != "seq") {
        throw DataError("'" + path.string() + "': header must be writer_id,kind,seq,f0,...");
    }
    const std::size_t dim = header.size() - 3;
    for (std::size_t k = 0; k < dim; ++k) {
        if (header[3 + k] != "f" + std::to_string(k)) {
            throw DataError(fmt::format("'{}': expected column f{}, found '{}'", path.string(), k, header[3 + k]));
        }
    }
    std::vector<SignatureRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw DataError(fmt::format("'{}' line {}: {} columns, expected {}", path.string(), line_no,
                                        cells.size(), header.size()));
        }
        try {
            SignatureRecord r;
            r.writer_id = static_cast<std::uint32_t>(std::stoul(cells[0]));
            const auto& k = cells[1];
            if (k == "0" || k == "genuine" || k == "G") {
                r.kind = Kind::Genuine;
            } else if (k == "1" || k == "skilled" || k == "SK") {
                r.kind = Kind::Skilled;
            } else {
                throw DataError(fmt::format("'{}' line {}: unknown kind '{}'", path.string(), line_no, k));
            }
            r.seq_index = static_cast<std::uint32_t>(std::stoul(cells[2]));
            r.features.resize(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                r.features[j] = std::stof(cells[3 + j]);
            }
            records.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw DataError(fmt::format("'{}' line {}: unparsable value", path.string(), line_no));
        }
    }
    return Dataset(static_cast<std::uint32_t>(dim), std::move(records));
}

void SynthConfig::validate() const {
    if (writer_count == 0 || genuine_per_writer == 0 || dim == 0) {
        throw ConfigError("synthetic config: writer_count, genuine_per_writer and dim must be positive");
    }
    if (!(genuine_noise_sigma >= 0) || !(skilled_noise_sigma >= 0) || !(skilled_offset_scale >= 0) ||
        !(drift_velocity_sigma >= 0)) {
        throw ConfigError("synthetic config: sigma and scale values must be >= 0");
    }
    if (skilled_noise_sigma < genuine_noise_sigma) {
        throw ConfigError("synthetic config: skilled_noise_sigma must be >= genuine_noise_sigma");
    }
}

Dataset generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t dim = cfg.dim;
    std::vector<SignatureRecord> records;
    records.reserve(std::size_t{cfg.writer_count} * (cfg.genuine_per_writer + cfg.skilled_per_writer));
    std::vector<double> mean(dim), offset(dim), velocity(dim);
    for (std::uint32_t w = 0; w < cfg.writer_count; ++w) {
        Rng rng(derive_seed(cfg.seed, w));
        for (auto& m : mean) {
            m = rng.normal();
        }
        double norm = 0.0;
        for (auto& u : offset) {
            u = rng.normal();
            norm += u * u;
        }
        norm = std::sqrt(norm);
        for (auto& u : offset) {
            u = norm > 0 ? u / norm : 0.0;
        }
        for (auto& v : velocity) {
            v = cfg.drift_velocity_sigma * rng.normal();
        }
        auto sample = [&](Kind kind, std::uint32_t s, double offset_scale, double sigma) {
            SignatureRecord r{w, kind, s, std::vector<float>(dim)};
            for (std::size_t k = 0; k < dim; ++k) {
                const double x = mean[k] + s * velocity[k] + offset_scale * offset[k] + sigma * rng.normal();
                r.features[k] = static_cast<float>(x);
            }
            records.push_back(std::move(r));
        };
        for (std::uint32_t s = 0; s < cfg.genuine_per_writer; ++s) {
            sample(Kind::Genuine, s, 0.0, cfg.genuine_noise_sigma);
        }
        for (std::uint32_t s = 0; s < cfg.skilled_per_writer; ++s) {
            sample(Kind::Skilled, s, cfg.skilled_offset_scale, cfg.skilled_noise_sigma);
        }
    }
    return Dataset(cfg.dim, std::move(records));
}

void SplitConfig::validate() const {
    if (dev_user_count == 0 || exploit_user_count == 0) {
        throw ConfigError("split config: dev and exploitation user counts must be positive");
    }
    if (dev_genuine_per_user < 2 || dev_genuine_per_user % 2 != 0) {
        throw ConfigError(fmt::format("split config: dev_genuine_per_user must be even and >= 2 (got {})",
                                      dev_genuine_per_user));
    }
    if (refs_per_user == 0 || claims_per_user == 0) {
        throw ConfigError("split config: refs_per_user and claims_per_user must be positive");
    }
}

UserSplit split_users(const Dataset& dataset, const SplitConfig& cfg) {
    cfg.validate();
    auto writers = dataset.writers();
    const std::size_t needed = std::size_t{cfg.dev_user_count} + cfg.exploit_user_count;
    if (writers.size() < needed) {
        throw DataError(fmt::format("insufficient writers: need {} (dev {} + exploitation {}), dataset has {}",
                                    needed, cfg.dev_user_count, cfg.exploit_user_count, writers.size()));
    }
    Rng rng(cfg.seed);
    rng.shuffle(writers);

    auto exploit_ok = [&](std::uint32_t w) {
        return dataset.genuine_of(w).size() >= std::size_t{cfg.refs_per_user} + cfg.claims_per_user &&
               dataset.skilled_of(w).size() >= cfg.claims_per_user;
    };
    auto dev_ok = [&](std::uint32_t w) { return dataset.genuine_of(w).size() >= cfg.dev_genuine_per_user; };

    UserSplit split;
    std::vector<bool> taken(writers.size(), false);
    for (std::size_t i = 0; i < writers.size() && split.exploit.size() < cfg.exploit_user_count; ++i) {
        if (exploit_ok(writers[i])) {
            split.exploit.push_back(writers[i]);
            taken[i] = true;
        }
    }
    for (std::size_t i = 0; i < writers.size() && split.dev.size() < cfg.dev_user_count; ++i) {
        if (!taken[i] && dev_ok(writers[i])) {
            split.dev.push_back(writers[i]);
        }
    }
    if (split.exploit.size() < cfg.exploit_user_count || split.dev.size() < cfg.dev_user_count) {
        throw DataError(fmt::format(
            "insufficient signatures per writer: found {}/{} exploitation writers with >= {} genuine and >= {} "
            "skilled, {}/{} development writers with >= {} genuine",
            split.exploit.size(), cfg.exploit_user_count, cfg.refs_per_user + cfg.claims_per_user,
            cfg.claims_per_user, split.dev.size(), cfg.dev_user_count, cfg.dev_genuine_per_user));
    }
    std::sort(split.dev.begin(), split.dev.end());
    std::sort(split.exploit.begin(), split.exploit.end());
    return split;
}

}  // namespace shsv
