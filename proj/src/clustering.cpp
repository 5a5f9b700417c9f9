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

#include "lsk/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "lsk/random.hpp"

namespace lsk {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kEigengapTieTol = 1e-9;
constexpr double kTurnMergeGap = 0.1;

} // namespace

void validate(const AffinityMatrix& a) {
    const auto& m = a.values;
    if (m.rows() != m.cols()) throw ValidationError("affinity: matrix must be square");
    if (!m.allFinite()) throw ValidationError("affinity: non-finite entry");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - m(j, i)) > kSymmetryTol) {
                throw ValidationError("affinity: matrix is not symmetric");
            }
            if (m(i, j) > m(i, i) + kSymmetryTol) {
                throw ValidationError("affinity: diagonal must be the row maximum");
            }
        }
    }
}

Eigen::MatrixXd embedding_matrix(const EmbeddingSet& set) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(set.dim));
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& v = set.entries[i].vector;
        if (v.size() != set.dim) throw ValidationError("embedding dimension mismatch");
        for (std::size_t j = 0; j < v.size(); ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
        }
    }
    return x;
}

AffinityMatrix cosine_affinity(const EmbeddingSet& set) {
    if (set.empty()) throw ValidationError("cosine affinity: empty embedding set");
    Eigen::MatrixXd x = embedding_matrix(set);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double norm = x.row(i).norm();
        if (!(norm > 0.0)) {
            throw ValidationError("cosine affinity: entry " + std::to_string(i) +
                                  " is a zero vector");
        }
        x.row(i) /= norm;
    }
    const Eigen::Index n = x.rows();
    AffinityMatrix a{Eigen::MatrixXd::Identity(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double c = std::clamp(x.row(i).dot(x.row(j)), -1.0, 1.0);
            a.values(i, j) = c;
            a.values(j, i) = c;
        }
    }
    return a;
}

// --- spectral ------------------------------------------------------------

void validate(const SpectralConfig& cfg) {
    if (cfg.k_min < 1 || cfg.k_max < cfg.k_min) {
        throw ValidationError("spectral: need 1 <= k_min <= k_max");
    }
    if (!(cfg.binarize_p > 0.0 && cfg.binarize_p <= 1.0)) {
        throw ValidationError("spectral: binarize_p must be in (0, 1]");
    }
    if (cfg.kmeans_restarts < 1) throw ValidationError("spectral: kmeans_restarts must be >= 1");
    if (cfg.max_kmeans_iters < 1) throw ValidationError("spectral: max_kmeans_iters must be >= 1");
}

namespace {

Eigen::MatrixXd prune_rows(const Eigen::MatrixXd& a, double p) {
    const Eigen::Index n = a.rows();
    const auto keep = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::ceil(p * static_cast<double>(n))));
    Eigen::MatrixXd pruned = Eigen::MatrixXd::Zero(n, n);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
            return a(i, x) > a(i, y);
        });
        for (Eigen::Index r = 0; r < keep; ++r) {
            const Eigen::Index j = order[static_cast<std::size_t>(r)];
            pruned(i, j) = a(i, j);
        }
    }
    return 0.5 * (pruned + pruned.transpose());
}

double squared_distance(const Eigen::MatrixXd& pts, Eigen::Index i, const Eigen::MatrixXd& centers,
                        Eigen::Index c) {
    return (pts.row(i) - centers.row(c)).squaredNorm();
}

} // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, int restarts, int max_iters,
                    std::uint64_t seed) {
    const Eigen::Index n = points.rows();
    if (k < 1 || k > n) throw ValidationError("kmeans: k must be in [1, n]");
    Rng rng(seed);

    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < std::max(1, restarts); ++attempt) {
        // k-means++ seeding
        Eigen::MatrixXd centers(k, points.cols());
        centers.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
        std::vector<double> d2(static_cast<std::size_t>(n));
        for (int c = 1; c < k; ++c) {
            double total = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                double m = std::numeric_limits<double>::infinity();
                for (int prev = 0; prev < c; ++prev) m = std::min(m, squared_distance(points, i, centers, prev));
                d2[static_cast<std::size_t>(i)] = m;
                total += m;
            }
            Eigen::Index pick = 0;
            if (total > 0.0) {
                double target = rng.uniform() * total;
                pick = n - 1;
                for (Eigen::Index i = 0; i < n; ++i) {
                    target -= d2[static_cast<std::size_t>(i)];
                    if (target < 0.0) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
            }
            centers.row(c) = points.row(pick);
        }

        std::vector<int> labels(static_cast<std::size_t>(n), -1);
        for (int iter = 0; iter < max_iters; ++iter) {
            bool changed = false;
            for (Eigen::Index i = 0; i < n; ++i) {
                int arg = 0;
                double m = squared_distance(points, i, centers, 0);
                for (int c = 1; c < k; ++c) {
                    const double d = squared_distance(points, i, centers, c);
                    if (d < m) {
                        m = d;
                        arg = c;
                    }
                }
                if (labels[static_cast<std::size_t>(i)] != arg) {
                    labels[static_cast<std::size_t>(i)] = arg;
                    changed = true;
                }
            }
            if (!changed) break;
            Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
            std::vector<int> counts(static_cast<std::size_t>(k), 0);
            for (Eigen::Index i = 0; i < n; ++i) {
                const int c = labels[static_cast<std::size_t>(i)];
                sums.row(c) += points.row(i);
                ++counts[static_cast<std::size_t>(c)];
            }
            for (int c = 0; c < k; ++c) {
                if (counts[static_cast<std::size_t>(c)] > 0) {
                    centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
                }
            }
        }

        double inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            inertia += squared_distance(points, i, centers, labels[static_cast<std::size_t>(i)]);
        }
        if (inertia < best.inertia) {
            best.inertia = inertia;
            best.labels = std::move(labels);
        }
    }
    return best;
}

SpectralResult spectral_cluster(const AffinityMatrix& a, const SpectralConfig& cfg,
                                const WarningSink& warn) {
    validate(cfg);
    validate(a);
    const Eigen::Index n = a.size();
    if (n == 0) throw ValidationError("spectral: empty affinity matrix");

    SpectralResult result;
    if (n == 1) {
        result.labels = {0};
        result.k = 1;
        result.eigenvalues = Eigen::VectorXd::Zero(1);
        return result;
    }

    Eigen::MatrixXd w = cfg.binarize_p < 1.0 ? prune_rows(a.values, cfg.binarize_p) : a.values;
    w = w.cwiseMax(0.0);

    Eigen::VectorXd inv_sqrt_deg(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = w.row(i).sum();
        inv_sqrt_deg(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    Eigen::MatrixXd lap = -(inv_sqrt_deg.asDiagonal() * w * inv_sqrt_deg.asDiagonal());
    lap.diagonal().array() += 1.0;
    lap = 0.5 * (lap + lap.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    if (solver.info() != Eigen::Success) {
        throw NumericError("spectral: eigensolver did not converge");
    }
    result.eigenvalues = solver.eigenvalues();
    const Eigen::VectorXd& ev = result.eigenvalues;

    int k_lo = cfg.k_min;
    int k_hi = std::min<int>(cfg.k_max, static_cast<int>(n));
    if (k_lo > n) {
        emit_warning(warn, "spectral: k_min " + std::to_string(cfg.k_min) +
                               " exceeds the number of segments; using k = " + std::to_string(n));
        k_lo = k_hi = static_cast<int>(n);
    }

    // gap(k) = lambda_{k+1} - lambda_k (1-based), defined for k < n.
    int k = k_lo;
    if (k_lo < n) {
        const int last = std::min(k_hi, static_cast<int>(n) - 1);
        double best_gap = -std::numeric_limits<double>::infinity();
        for (int cand = k_lo; cand <= last; ++cand) {
            const double gap = ev(cand) - ev(cand - 1);
            if (gap > best_gap + kEigengapTieTol) {
                best_gap = gap;
                k = cand;
            }
        }
    }
    result.k = k;

    if (k == 1) {
        result.labels.assign(static_cast<std::size_t>(n), 0);
        return result;
    }

    Eigen::MatrixXd u = solver.eigenvectors().leftCols(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = u.row(i).norm();
        if (norm > 0.0) u.row(i) /= norm;
    }
    const KMeansResult km = kmeans(u, k, cfg.kmeans_restarts, cfg.max_kmeans_iters, cfg.seed);
    result.labels = canonical_labels(km.labels);
    return result;
}

// --- DBSCAN --------------------------------------------------------------

void validate(const DbscanConfig& cfg) {
    if (!(cfg.eps > 0.0)) throw ValidationError("dbscan: eps must be positive");
    if (cfg.min_samples < 1) throw ValidationError("dbscan: min_samples must be >= 1");
}

std::vector<int> dbscan_cluster(const AffinityMatrix& a, const DbscanConfig& cfg) {
    validate(cfg);
    validate(a);
    const Eigen::Index n = a.size();
    auto dist = [&](Eigen::Index i, Eigen::Index j) { return std::max(0.0, 1.0 - a.values(i, j)); };

    std::vector<std::vector<Eigen::Index>> neighbors(static_cast<std::size_t>(n));
    std::vector<char> core(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || dist(i, j) <= cfg.eps) neighbors[static_cast<std::size_t>(i)].push_back(j);
        }
        core[static_cast<std::size_t>(i)] =
            neighbors[static_cast<std::size_t>(i)].size() >= static_cast<std::size_t>(cfg.min_samples);
    }

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    int next = 0;
    for (Eigen::Index seed = 0; seed < n; ++seed) {
        if (labels[static_cast<std::size_t>(seed)] >= 0 || !core[static_cast<std::size_t>(seed)]) continue;
        const int c = next++;
        labels[static_cast<std::size_t>(seed)] = c;
        std::deque<Eigen::Index> queue{seed};
        while (!queue.empty()) {
            const Eigen::Index q = queue.front();
            queue.pop_front();
            if (!core[static_cast<std::size_t>(q)]) continue;
            for (Eigen::Index r : neighbors[static_cast<std::size_t>(q)]) {
                if (labels[static_cast<std::size_t>(r)] >= 0) continue;
                labels[static_cast<std::size_t>(r)] = c;
                queue.push_back(r);
            }
        }
    }

    const bool any_cluster = next > 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (labels[static_cast<std::size_t>(i)] >= 0) continue;
        if (cfg.noise_policy == NoisePolicy::own_cluster || !any_cluster) {
            labels[static_cast<std::size_t>(i)] = next++;
            continue;
        }
        Eigen::Index nearest = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (core[static_cast<std::size_t>(j)] && dist(i, j) < best) {
                best = dist(i, j);
                nearest = j;
            }
        }
        labels[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(nearest)];
    }
    return canonical_labels(labels);
}

std::vector<int> dbscan_cluster(const EmbeddingSet& set, const DbscanConfig& cfg) {
    return dbscan_cluster(cosine_affinity(set), cfg);
}

// --- PLDA ----------------------------------------------------------------

void validate(const PldaModel& m) {
    const Eigen::Index d = m.mean.size();
    if (d == 0) throw ValidationError("plda: empty model");
    if (m.between_cov.rows() != d || m.between_cov.cols() != d || m.within_cov.rows() != d ||
        m.within_cov.cols() != d) {
        throw ValidationError("plda: inconsistent dimensions");
    }
    if (!m.between_cov.isApprox(m.between_cov.transpose(), 1e-9) ||
        !m.within_cov.isApprox(m.within_cov.transpose(), 1e-9)) {
        throw ValidationError("plda: covariances must be symmetric");
    }
    if (Eigen::LLT<Eigen::MatrixXd>(m.within_cov).info() != Eigen::Success) {
        throw ValidationError("plda: within-class covariance is not positive definite");
    }
}

PldaModel plda_fit(const std::vector<std::pair<std::vector<double>, std::string>>& labeled) {
    if (labeled.empty()) throw ValidationError("plda: no training samples");
    const std::size_t dim = labeled.front().first.size();
    if (dim == 0) throw ValidationError("plda: zero-dimensional samples");

    std::map<std::string, std::vector<const std::vector<double>*>> groups;
    for (const auto& [vec, spk] : labeled) {
        if (vec.size() != dim) throw ValidationError("plda: dimension mismatch in training data");
        groups[spk].push_back(&vec);
    }
    if (groups.size() < 2) throw ValidationError("plda: need at least 2 speakers");
    for (const auto& [spk, members] : groups) {
        if (members.size() < 2) {
            throw ValidationError("plda: speaker " + spk + " has fewer than 2 samples");
        }
    }

    const auto d = static_cast<Eigen::Index>(dim);
    auto as_vec = [&](const std::vector<double>& v) {
        return Eigen::Map<const Eigen::VectorXd>(v.data(), d);
    };

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& [vec, spk] : labeled) mean += as_vec(vec);
    mean /= static_cast<double>(labeled.size());

    Eigen::MatrixXd between = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd within = Eigen::MatrixXd::Zero(d, d);
    for (const auto& [spk, members] : groups) {
        Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
        for (const auto* v : members) m += as_vec(*v);
        m /= static_cast<double>(members.size());
        const Eigen::VectorXd dm = m - mean;
        between += dm * dm.transpose();
        for (const auto* v : members) {
            const Eigen::VectorXd dx = as_vec(*v) - m;
            within += dx * dx.transpose();
        }
    }
    between /= static_cast<double>(groups.size() - 1);
    within /= static_cast<double>(labeled.size() - groups.size());

    const double eps = 1e-6 * (between.trace() + within.trace()) / static_cast<double>(dim);
    within.diagonal().array() += eps;

    PldaModel model{mean, 0.5 * (between + between.transpose()), 0.5 * (within + within.transpose())};
    if (!(eps > 0.0) || Eigen::LLT<Eigen::MatrixXd>(model.within_cov).info() != Eigen::Success) {
        throw ValidationError("plda: within-class covariance is singular after regularization");
    }
    return model;
}

namespace {

double log_det_spd(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw NumericError("plda: matrix is not positive definite");
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::MatrixXd inverse_spd(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw NumericError("plda: matrix is not positive definite");
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

} // namespace

// With T = B + W, the same-speaker joint covariance is [[T, B], [B, T]].
// Its inverse has diagonal block A = (T - B T^-1 B)^-1 and off-diagonal block
// -T^-1 B A, which gives
//   llr = 1/2 x1'Q x1 + 1/2 x2'Q x2 + x1'P x2 + 1/2 log|T| - 1/2 log|T - B T^-1 B|
// with Q = T^-1 - A and P = T^-1 B A (all on mean-centred vectors).
PldaScorer::PldaScorer(const PldaModel& model) : mean_(model.mean) {
    validate(model);
    const Eigen::MatrixXd& b = model.between_cov;
    const Eigen::MatrixXd t = b + model.within_cov;
    const Eigen::MatrixXd t_inv = inverse_spd(t);
    Eigen::MatrixXd schur = t - b * t_inv * b;
    schur = 0.5 * (schur + schur.transpose()).eval();
    const Eigen::MatrixXd a = inverse_spd(schur);
    quad_ = t_inv - a;
    quad_ = 0.5 * (quad_ + quad_.transpose()).eval();
    cross_ = t_inv * b * a;
    cross_ = 0.5 * (cross_ + cross_.transpose()).eval();
    offset_ = 0.5 * log_det_spd(t) - 0.5 * log_det_spd(schur);
}

double PldaScorer::llr(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2) const {
    if (x1.size() != mean_.size() || x2.size() != mean_.size()) {
        throw ValidationError("plda: dimension mismatch");
    }
    const Eigen::VectorXd a = x1 - mean_;
    const Eigen::VectorXd c = x2 - mean_;
    return 0.5 * a.dot(quad_ * a) + 0.5 * c.dot(quad_ * c) + a.dot(cross_ * c) + offset_;
}

Eigen::MatrixXd PldaScorer::llr_matrix(const Eigen::MatrixXd& x) const {
    if (x.cols() != mean_.size()) throw ValidationError("plda: dimension mismatch");
    const Eigen::MatrixXd xc = x.rowwise() - mean_.transpose();
    const Eigen::VectorXd self = 0.5 * (xc * quad_).cwiseProduct(xc).rowwise().sum();
    Eigen::MatrixXd s = xc * cross_ * xc.transpose();
    s = 0.5 * (s + s.transpose()).eval();
    s.colwise() += self;
    s.rowwise() += self.transpose();
    s.array() += offset_;
    return s;
}

AffinityMatrix plda_affinity(const EmbeddingSet& set, const PldaModel& model) {
    if (set.empty()) throw ValidationError("plda affinity: empty embedding set");
    if (static_cast<Eigen::Index>(set.dim) != model.dim()) {
        throw ValidationError("plda affinity: embedding dim " + std::to_string(set.dim) +
                              " does not match model dim " + std::to_string(model.dim()));
    }
    const PldaScorer scorer(model);
    Eigen::MatrixXd s = scorer.llr_matrix(embedding_matrix(set));
    const Eigen::Index n = s.rows();
    if (n == 1) return AffinityMatrix{Eigen::MatrixXd::Ones(1, 1)};

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            lo = std::min(lo, s(i, j));
            hi = std::max(hi, s(i, j));
        }
    }
    const double span = hi - lo;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            a(i, j) = span > 0.0 ? (s(i, j) - lo) / span : 1.0;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_max = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) row_max = std::max(row_max, a(i, j));
        }
        a(i, i) = row_max;
    }
    return AffinityMatrix{a};
}

// --- output --------------------------------------------------------------

Diarization labels_to_diarization(const EmbeddingSet& set, const std::vector<int>& labels) {
    if (labels.size() != set.size()) {
        throw ValidationError("labels_to_diarization: " + std::to_string(labels.size()) +
                              " labels for " + std::to_string(set.size()) + " entries");
    }
    std::map<int, std::vector<SpeechRegion>> by_label;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw ValidationError("labels_to_diarization: negative label");
        by_label[labels[i]].push_back(set.entries[i].region);
    }

    Diarization d;
    d.audio_id = set.audio_id;
    for (auto& [label, regions] : by_label) {
        sort_regions(regions);
        SpeechRegion cur = regions.front();
        const std::string name = "spk" + std::to_string(label);
        for (std::size_t i = 1; i < regions.size(); ++i) {
            if (regions[i].start - cur.end <= kTurnMergeGap) {
                cur.end = std::max(cur.end, regions[i].end);
            } else {
                d.turns.push_back({cur.start, cur.end, name});
                cur = regions[i];
            }
        }
        d.turns.push_back({cur.start, cur.end, name});
    }
    return canonicalize(std::move(d));
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
    std::unordered_map<int, int> remap;
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
        out.push_back(it->second);
    }
    return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw ValidationError("ari: partitions of different sizes");
    const auto n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [key, c] : joint) index += pairs(c);
    for (const auto& [key, c] : rows) sum_rows += pairs(c);
    for (const auto& [key, c] : cols) sum_cols += pairs(c);
    const double total = pairs(n);
    if (total == 0.0) return 1.0;
    const double expected = sum_rows * sum_cols / total;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

} // namespace lsk
