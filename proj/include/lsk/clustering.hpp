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

// Training-free speaker attribution over segment embeddings: cosine or PLDA
// affinities, spectral clustering with eigengap model selection, DBSCAN.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lsk/errors.hpp"
#include "lsk/interchange.hpp"

namespace lsk {

/// Symmetric pairwise similarity; the diagonal holds each row's maximum.
struct AffinityMatrix {
    Eigen::MatrixXd values;

    Eigen::Index size() const { return values.rows(); }
};

void validate(const AffinityMatrix& a);

/// Row-major embedding matrix (one row per entry).
Eigen::MatrixXd embedding_matrix(const EmbeddingSet& set);

AffinityMatrix cosine_affinity(const EmbeddingSet& set);

struct SpectralConfig {
    int k_min = 1;
    int k_max = 8;
    double binarize_p = 1.0;  // keep the top-p fraction of each row; 1 keeps all
    int kmeans_restarts = 10;
    std::uint64_t seed = 0;
    int max_kmeans_iters = 300;
};

void validate(const SpectralConfig& cfg);

struct SpectralResult {
    std::vector<int> labels;
    int k = 1;
    Eigen::VectorXd eigenvalues;  // ascending, of the normalized Laplacian
};

/// Normalized-Laplacian spectral clustering. The cluster count maximizes the
/// eigengap lambda_{k+1} - lambda_k over [k_min, k_max]; ties within 1e-9
/// resolve to the smaller k. Labels are renumbered by first appearance.
SpectralResult spectral_cluster(const AffinityMatrix& a, const SpectralConfig& cfg = {},
                                const WarningSink& warn = {});

struct KMeansResult {
    std::vector<int> labels;
    double inertia = 0.0;
};

/// k-means++ seeding plus Lloyd iterations; best inertia over restarts.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, int restarts, int max_iters,
                    std::uint64_t seed);

enum class NoisePolicy { nearest_cluster, own_cluster };

struct DbscanConfig {
    double eps = 0.35;  // cosine distance
    int min_samples = 3;
    NoisePolicy noise_policy = NoisePolicy::nearest_cluster;
};

void validate(const DbscanConfig& cfg);

/// DBSCAN on cosine distance 1 - A[i][j]. A point is core when at least
/// min_samples points (itself included) lie within eps. Noise points join the
/// cluster of their nearest core point (nearest_cluster) or get a singleton
/// label (own_cluster). With no core point at all, every point is a singleton.
std::vector<int> dbscan_cluster(const AffinityMatrix& a, const DbscanConfig& cfg = {});
std::vector<int> dbscan_cluster(const EmbeddingSet& set, const DbscanConfig& cfg = {});

/// Two-covariance PLDA: x = y + e, y ~ N(mean, between), e ~ N(0, within).
struct PldaModel {
    Eigen::VectorXd mean;
    Eigen::MatrixXd between_cov;
    Eigen::MatrixXd within_cov;

    Eigen::Index dim() const { return mean.size(); }
};

void validate(const PldaModel& m);

/// Closed-form fit. between = sample covariance of speaker means about the
/// global mean; within = pooled covariance about speaker means, plus eps*I
/// with eps = 1e-6 * trace(between + within) / dim.
PldaModel plda_fit(const std::vector<std::pair<std::vector<double>, std::string>>& labeled);

/// Pairwise log-likelihood ratio, same speaker vs different speakers.
class PldaScorer {
public:
    explicit PldaScorer(const PldaModel& model);

    double llr(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) const;

    /// All pairwise scores of the rows of `x`.
    Eigen::MatrixXd llr_matrix(const Eigen::MatrixXd& x) const;

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd quad_;   // weight of x1'Qx1 and x2'Qx2 (times 1/2)
    Eigen::MatrixXd cross_;  // weight of x1'Px2
    double offset_ = 0.0;
};

/// PLDA scores min-max scaled to [0, 1] over the off-diagonal entries; the
/// diagonal is then set to each row's maximum.
AffinityMatrix plda_affinity(const EmbeddingSet& set, const PldaModel& model);

/// One turn per entry labelled spk<label>; same-label turns with a gap of
/// at most 0.1 s (or overlapping) are merged.
Diarization labels_to_diarization(const EmbeddingSet& set, const std::vector<int>& labels);

/// Renumbers labels 0..k-1 in order of first appearance.
std::vector<int> canonical_labels(const std::vector<int>& labels);

/// Adjusted Rand index between two partitions of the same items.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

} // namespace lsk
