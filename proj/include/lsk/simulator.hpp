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


// Synthetic conversations with planted speakers, for exercising clustering,
// resegmentation and scoring without any model or corpus. Randomness comes
// from lsk::Rng (mt19937_64), so a seed gives the same output everywhere.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lsk/interchange.hpp"

namespace lsk {

struct SimConfig {
    int n_speakers = 3;
    double duration_s = 120.0;
    double turn_min_s = 2.0;
    double turn_max_s = 12.0;
    double gap_min_s = 0.0;
    double gap_max_s = 8.0;
    int dim = 32;
    double intra_spread = 0.05;    // per-component noise sd before renormalizing
    double inter_min_dist = 0.5;   // minimum cosine distance between centroids
    std::uint64_t seed = 0;
};

void validate(const SimConfig& cfg);

/// "easy" (the defaults) or "hard" (inter_min_dist 0.25, intra_spread 0.15).
SimConfig sim_preset(std::string_view name, std::uint64_t seed = 0);

struct SimResult {
    Diarization ref;
    EmbeddingSet embeddings;          // one entry per turn
    std::vector<SpeechRegion> regions;
    std::vector<std::vector<double>> centroids;
    std::vector<int> labels;          // planted speaker index per entry
};

/// Throws ValidationError when centroid rejection sampling needs more than
/// 1e5 draws.
SimResult simulate(const SimConfig& cfg);

struct PerturbResult {
    std::vector<std::string> tokens;
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;

    std::size_t total_edits() const { return substitutions + deletions + insertions; }
};

/// Independent per-token edits. Each reference token is deleted with
/// probability del_rate, otherwise substituted with probability sub_rate;
/// after each position a vocabulary word is inserted with probability
/// ins_rate. Counts are the edits actually applied.
PerturbResult perturb_transcript(const std::vector<std::string>& ref, double sub_rate,
                                 double del_rate, double ins_rate, std::uint64_t seed);

} // namespace lsk
