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
#include <vector>

#include "shsv/dissimilarity.hpp"

namespace shsv {

/// One verification request as seen by the evaluator.
struct VerificationEvent {
    std::uint64_t position = 0;  // arrival index in the stream
    std::uint32_t chunk = 0;     // 1-based chunk index
    std::uint32_t user = 0;      // claimed identity
    ClaimKind kind = ClaimKind::Genuine;
    double score = 0.0;          // fused decision
    bool genuine = false;        // true label
    std::uint32_t model_version = 0;

    bool operator==(const VerificationEvent&) const = default;
};

// CSV: position,chunk,user,kind,score,label,model_version
// kind is G/RF/SK, label 1 for genuine and 0 for forgery, score in %.17g.
void write_event_header(std::ostream& out);
void write_event_row(std::ostream& out, const VerificationEvent& e);
void write_event_log(std::ostream& out, const std::vector<VerificationEvent>& events);
void write_event_log(const std::filesystem::path& path, const std::vector<VerificationEvent>& events);
std::vector<VerificationEvent> read_event_log(const std::filesystem::path& path);

}  // namespace shsv
