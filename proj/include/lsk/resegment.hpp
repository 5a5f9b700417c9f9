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


// Cosine-emission Viterbi smoothing of segment labels ("vbx-lite"). A
// lightweight stand-in for VBx resegmentation: it smooths the label sequence
// in time but has no Bayesian speaker posteriors.

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lsk/interchange.hpp"

namespace lsk {

struct HmmConfig {
    double loop_prob = 0.9;
    double emission_scale = 10.0;
    int max_iters = 5;
};

void validate(const HmmConfig& cfg);

/// Most likely state path for per-step log emissions (steps x states) under
/// a uniform initial distribution and fixed stay/switch log transitions.
/// Ties keep the lowest state index.
std::vector<int> viterbi_decode(const Eigen::MatrixXd& log_emission, double log_stay,
                                double log_switch);

/// Joint log score of one path, accumulated in the same order as
/// viterbi_decode so the two compare exactly.
double path_score(const Eigen::MatrixXd& log_emission, const std::vector<int>& path,
                  double log_stay, double log_switch);

/// Iterated resegmentation: centroids from the current labels, emission
/// emission_scale * cosine(e_i, centroid), Viterbi decode, relabel. Stops when
/// labels stop changing or after max_iters rounds. States left empty are
/// dropped. Output labels are a subset of the input label values.
std::vector<int> viterbi_resegment(const EmbeddingSet& set, const std::vector<int>& init_labels,
                                   const HmmConfig& cfg = {});

} // namespace lsk
