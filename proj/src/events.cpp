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
#include "shsv/events.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "shsv/errors.hpp"

namespace shsv {

namespace {

constexpr const char* kHeader = "position,chunk,user,kind,score,label,model_version";

}  // namespace

void write_event_header(std::ostream& out) { out << kHeader << '\n'; }

void write_event_row(std::ostream& out, const VerificationEvent& e) {
    out << fmt::format("{},{},{},{},{:.17g},{},{}\n", e.position, e.chunk, e.user, claim_kind_code(e.kind), e.score,
                       e.genuine ? 1 : 0, e.model_version);
}

void write_event_log(std::ostream& out, const std::vector<VerificationEvent>& events) {
    write_event_header(out);
    for (const auto& e : events) {
        write_event_row(out, e);
    }
}

void write_event_log(const std::filesystem::path& path, const std::vector<VerificationEvent>& events) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot open '" + path.string() + "' for writing");
    }
    write_event_log(out, events);
}

std::vector<VerificationEvent> read_event_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open event log '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("event log '" + path.string() + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kHeader) {
        throw DataError("event log '" + path.string() + "': unexpected header '" + line + "'");
    }
    std::vector<VerificationEvent> events;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 7) {
            throw DataError(fmt::format("event log '{}' line {}: expected 7 columns", path.string(), line_no));
        }
        try {
            VerificationEvent e;
            e.position = std::stoull(cells[0]);
            e.chunk = static_cast<std::uint32_t>(std::stoul(cells[1]));
            e.user = static_cast<std::uint32_t>(std::stoul(cells[2]));
            e.kind = parse_claim_kind(cells[3]);
            // strtod rather than stod: subnormal scores are valid and must round-trip.
            char* end = nullptr;
            e.score = std::strtod(cells[4].c_str(), &end);
            if (cells[4].empty() || end != cells[4].c_str() + cells[4].size()) {
                throw std::invalid_argument("score");
            }
            e.genuine = std::stoi(cells[5]) != 0;
            e.model_version = static_cast<std::uint32_t>(std::stoul(cells[6]));
            events.push_back(e);
        } catch (const std::logic_error&) {
            throw DataError(fmt::format("event log '{}' line {}: unparsable value", path.string(), line_no));
        }
    }
    if (events.empty()) {
        throw DataError("event log '" + path.string() + "' holds no events");
    }
    return events;
}

}  // namespace shsv
