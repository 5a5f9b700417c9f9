// Copyright 2026 The lsk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lsk/interchange.hpp"

namespace lsk {

// --- WER -----------------------------------------------------------------

struct WerReport {
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::size_t ref_words = 0;
    double wer = 0.0;
    bool undefined = false;  // empty reference with a non-empty hypothesis; wer is +inf

    std::size_t total_edits() const { return substitutions + deletions + insertions; }
};

/// Levenshtein alignment with unit costs. Among minimum-cost alignments the
/// one with the fewest substitutions is reported.
WerReport wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

/// Word-weighted pooling of several reports.
WerReport pool(const std::vector<WerReport>& reports);

// --- DER -----------------------------------------------------------------

struct DerConfig {
    double collar_s = 0.25;
    bool score_overlap = true;
};

void validate(const DerConfig& cfg);

struct DerReport {
    double missed = 0.0;
    double false_alarm = 0.0;
    double confusion = 0.0;
    double total_ref_speech = 0.0;
    double der = 0.0;
    double collar_s = 0.0;
    bool score_overlap = true;

    double total_error() const { return missed + false_alarm + confusion; }
};

/// Diarization error rate on the exact timeline.
///
/// The timeline is cut at every turn and collar boundary. A +-collar_s band
/// around each reference boundary is not scored; with score_overlap off,
/// time where the reference has two or more speakers is not scored either.
/// On each scored piece with R reference and H hypothesis speakers active:
///   missed      += max(0, R - H) * dt
///   false_alarm += max(0, H - R) * dt
///   confusion   += (min(R, H) - correct) * dt
/// where `correct` counts reference speakers whose mapped hypothesis speaker
/// is also active. The one-to-one mapping maximizes total correctly
/// attributed time (Hungarian assignment on the overlap matrix).
///
/// Throws ValidationError when no reference speech is scored.
DerReport der(const Diarization& ref, const Diarization& hyp, const DerConfig& cfg = {});

/// Time-weighted pooling of several reports.
DerReport pool(const std::vector<DerReport>& reports);

/// Frame-sampled DER with exhaustive search over speaker injections.
/// Exists to validate der(); at most 6 speakers per side.
DerReport der_frame_oracle(const Diarization& ref, const Diarization& hyp,
                           double frame_s = 0.01, const DerConfig& cfg = {});

/// Number of distinct turn boundaries (starts and ends) across both inputs.
std::size_t boundary_count(const Diarization& ref, const Diarization& hyp);

/// Maximum-weight one-to-one assignment of rows to columns of a
/// non-negative weight matrix (rows x cols, row-major). Returns, for each
/// row, the assigned column or -1.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weight);

} // namespace lsk
