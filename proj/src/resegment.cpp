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


#include "lsk/resegment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "lsk/clustering.hpp"
#include "lsk/errors.hpp"

namespace lsk {

void validate(const HmmConfig& cfg) {
    if (!(cfg.loop_prob > 0.0 && cfg.loop_prob < 1.0)) {
        throw ValidationError("hmm: loop_prob must be in (0, 1)");
    }
    if (!(cfg.emission_scale > 0.0) || !std::isfinite(cfg.emission_scale)) {
        throw ValidationError("hmm: emission_scale must be positive");
    }
    if (cfg.max_iters < 1) throw ValidationError("hmm: max_iters must be >= 1");
}

std::vector<int> viterbi_decode(const Eigen::MatrixXd& log_emission, double log_stay,
                                double log_switch) {
    const Eigen::Index n = log_emission.rows();
    const Eigen::Index k = log_emission.cols();
    if (n == 0) return {};
    if (k == 0) throw ValidationError("viterbi: no states");

    Eigen::MatrixXd delta(n, k);
    Eigen::MatrixXi back(n, k);
    delta.row(0) = log_emission.row(0);
    back.row(0).setZero();
    for (Eigen::Index t = 1; t < n; ++t) {
        for (Eigen::Index s = 0; s < k; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            Eigen::Index arg = 0;
            for (Eigen::Index p = 0; p < k; ++p) {
                const double v = delta(t - 1, p) + (p == s ? log_stay : log_switch);
                if (v > best) {
                    best = v;
                    arg = p;
                }
            }
            delta(t, s) = best + log_emission(t, s);
            back(t, s) = static_cast<int>(arg);
        }
    }

    std::vector<int> path(static_cast<std::size_t>(n));
    Eigen::Index last = 0;
    delta.row(n - 1).maxCoeff(&last);
    path.back() = static_cast<int>(last);
    for (Eigen::Index t = n - 1; t > 0; --t) {
        path[static_cast<std::size_t>(t - 1)] = back(t, path[static_cast<std::size_t>(t)]);
    }
    return path;
}

double path_score(const Eigen::MatrixXd& log_emission, const std::vector<int>& path,
                  double log_stay, double log_switch) {
    if (static_cast<Eigen::Index>(path.size()) != log_emission.rows()) {
        throw ValidationError("path_score: path length mismatch");
    }
    if (path.empty()) return 0.0;
    double score = log_emission(0, path[0]);
    for (std::size_t t = 1; t < path.size(); ++t) {
        score = score + (path[t] == path[t - 1] ? log_stay : log_switch);
        score = score + log_emission(static_cast<Eigen::Index>(t), path[t]);
    }
    return score;
}

std::vector<int> viterbi_resegment(const EmbeddingSet& set, const std::vector<int>& init_labels,
                                   const HmmConfig& cfg) {
    validate(cfg);
    if (init_labels.size() != set.size()) {
        throw ValidationError("resegment: " + std::to_string(init_labels.size()) + " labels for " +
                              std::to_string(set.size()) + " entries");
    }
    for (int l : init_labels) {
        if (l < 0) throw ValidationError("resegment: negative label");
    }
    if (set.empty()) return {};

    Eigen::MatrixXd x = embedding_matrix(set);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double norm = x.row(i).norm();
        if (!(norm > 0.0)) {
            throw ValidationError("resegment: entry " + std::to_string(i) + " is a zero vector");
        }
        x.row(i) /= norm;
    }

    std::vector<int> labels = init_labels;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        std::map<int, Eigen::Index> state_of;
        for (int l : labels) state_of.try_emplace(l, 0);
        std::vector<int> values;
        for (auto& [label, idx] : state_of) {
            idx = static_cast<Eigen::Index>(values.size());
            values.push_back(label);
        }
        const auto k = static_cast<Eigen::Index>(values.size());
        if (k == 1) break;

        Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(k, x.cols());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            centroids.row(state_of[labels[i]]) += x.row(static_cast<Eigen::Index>(i));
        }
        for (Eigen::Index s = 0; s < k; ++s) {
            const double norm = centroids.row(s).norm();
            if (norm > 0.0) centroids.row(s) /= norm;
        }
        const Eigen::MatrixXd emission = cfg.emission_scale * (x * centroids.transpose());
        const double log_stay = std::log(cfg.loop_prob);
        const double log_switch = std::log((1.0 - cfg.loop_prob) / static_cast<double>(k - 1));

        const std::vector<int> path = viterbi_decode(emission, log_stay, log_switch);
        std::vector<int> next(labels.size());
        for (std::size_t i = 0; i < path.size(); ++i) next[i] = values[static_cast<std::size_t>(path[i])];
        if (next == labels) break;
        labels = std::move(next);
    }
    return labels;
}

} // namespace lsk
