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


#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "lsk/clustering.hpp"
#include "lsk/resegment.hpp"
#include "lsk/simulator.hpp"
#include "test_support.hpp"

using namespace lsk;

namespace {

EmbeddingSet sequence(const std::vector<std::vector<double>>& vecs) {
    EmbeddingSet set{"rec", vecs.front().size(), {}};
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        set.entries.push_back({{static_cast<double>(i), static_cast<double>(i) + 1.0}, vecs[i]});
    }
    return set;
}

std::size_t changes(const std::vector<int>& path) {
    std::size_t c = 0;
    for (std::size_t i = 1; i < path.size(); ++i) c += path[i] != path[i - 1];
    return c;
}

// Best joint score over all K^n state paths.
double exhaustive_best(const Eigen::MatrixXd& emit, double stay, double sw) {
    const auto n = static_cast<std::size_t>(emit.rows());
    const auto k = static_cast<std::size_t>(emit.cols());
    std::vector<int> path(n, 0);
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
        best = std::max(best, path_score(emit, path, stay, sw));
        std::size_t i = 0;
        while (i < n && static_cast<std::size_t>(++path[i]) == k) path[i++] = 0;
        if (i == n) break;
    }
    return best;
}

} // namespace

TEST(Resegment, SingleStateUnchanged) {
    const auto set = sequence({{1, 0}, {0, 1}, {1, 1}});
    EXPECT_EQ(viterbi_resegment(set, {4, 4, 4}), (std::vector<int>{4, 4, 4}));
}

TEST(Resegment, LoneOutlierSmoothedAway) {
    const double c = 0.9, s = std::sqrt(1 - c * c);
    const auto set = sequence({{1, 0}, {1, 0}, {1, 0}, {c, s}, {1, 0}, {1, 0}, {1, 0}});
    const std::vector<int> init{0, 0, 0, 1, 0, 0, 0};
    EXPECT_EQ(viterbi_resegment(set, init), std::vector<int>(7, 0));

    // hand lattice: keeping B costs 10 * (1 - 0.9) = 1 in emission but two
    // switches at log(0.9 / 0.1) each
    const double stay = std::log(0.9), sw = std::log(0.1);
    Eigen::MatrixXd emit(7, 2);
    for (int i = 0; i < 7; ++i) {
        emit(i, 0) = 10.0 * (i == 3 ? c : 1.0);
        emit(i, 1) = 10.0 * (i == 3 ? 1.0 : c);
    }
    const std::vector<int> keep{0, 0, 0, 1, 0, 0, 0}, flip(7, 0);
    EXPECT_GT(path_score(emit, flip, stay, sw), path_score(emit, keep, stay, sw));
    EXPECT_EQ(viterbi_decode(emit, stay, sw), flip);
}

TEST(Resegment, PlantedLabelsAreFixedPoint) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto sim = simulate(sim_preset("easy", seed));
        EXPECT_EQ(viterbi_resegment(sim.embeddings, sim.labels), sim.labels) << seed;
    }
}

TEST(Resegment, NeverSplitsStatesAndConvergesToFixedPoint) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto sim = simulate(sim_preset("hard", seed));
        const auto init = spectral_cluster(cosine_affinity(sim.embeddings)).labels;
        HmmConfig cfg;
        cfg.max_iters = 100;
        const auto out = viterbi_resegment(sim.embeddings, init, cfg);
        const std::set<int> before(init.begin(), init.end()), after(out.begin(), out.end());
        EXPECT_LE(after.size(), before.size());
        for (int l : after) EXPECT_TRUE(before.count(l));
        EXPECT_EQ(viterbi_resegment(sim.embeddings, out, cfg), out) << seed;
    }
}

TEST(Viterbi, MatchesExhaustiveSearch) {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<Eigen::Index>(1 + rng.below(8));
        const auto k = static_cast<Eigen::Index>(1 + rng.below(3));
        Eigen::MatrixXd emit(n, k);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index s = 0; s < k; ++s) emit(i, s) = rng.uniform(-10.0, 10.0);
        }
        const double p = rng.uniform(0.05, 0.99);
        const double stay = std::log(p);
        const double sw = k > 1 ? std::log((1 - p) / static_cast<double>(k - 1)) : 0.0;
        const auto path = viterbi_decode(emit, stay, sw);
        EXPECT_EQ(path_score(emit, path, stay, sw), exhaustive_best(emit, stay, sw)) << trial;
    }
}

TEST(Viterbi, HigherLoopProbNeverAddsChanges) {
    Rng rng(78);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<Eigen::Index>(2 + rng.below(30));
        const Eigen::Index k = 3;
        Eigen::MatrixXd emit(n, k);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index s = 0; s < k; ++s) emit(i, s) = 10.0 * rng.uniform(-1.0, 1.0);
        }
        std::size_t prev = std::numeric_limits<std::size_t>::max();
        for (double p : {0.4, 0.6, 0.8, 0.9, 0.95, 0.99, 0.999}) {
            const auto path = viterbi_decode(emit, std::log(p), std::log((1 - p) / 2));
            EXPECT_LE(changes(path), prev) << trial << " p=" << p;
            prev = changes(path);
        }
    }
}

TEST(Resegment, Errors) {
    const auto set = sequence({{1, 0}, {0, 1}});
    EXPECT_THROW(viterbi_resegment(set, {0}), ValidationError);
    EXPECT_THROW(viterbi_resegment(set, {0, -1}), ValidationError);
    HmmConfig cfg;
    cfg.loop_prob = 1.0;
    EXPECT_THROW(viterbi_resegment(set, {0, 1}, cfg), ValidationError);
    cfg = {};
    cfg.emission_scale = 0.0;
    EXPECT_THROW(validate(cfg), ValidationError);
}
