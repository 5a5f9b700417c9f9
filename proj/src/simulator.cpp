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


#include "lsk/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "lsk/errors.hpp"
#include "lsk/random.hpp"

namespace lsk {

namespace {

constexpr long kMaxCentroidDraws = 100000;
constexpr double kMinTurn = 0.01;

const std::vector<std::string>& vocabulary() {
    static const std::vector<std::string> words = {
        "আমি",  "তুমি", "সে",    "আমরা", "ভালো", "খারাপ", "বাড়ি", "পথ",
        "জল",   "আকাশ", "মানুষ", "কথা",  "দিন",  "রাত",   "আজ",   "কাল",
        "alpha", "beta", "gamma", "delta", "omega", "river", "stone", "light",
    };
    return words;
}

std::vector<double> unit_normal_vector(Rng& rng, int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    double norm = 0.0;
    do {
        norm = 0.0;
        for (auto& c : v) {
            c = rng.normal();
            norm += c * c;
        }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (auto& c : v) c /= norm;
    return v;
}

double cosine_distance_unit(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return 1.0 - dot;
}

} // namespace

void validate(const SimConfig& cfg) {
    if (cfg.n_speakers < 1) throw ValidationError("sim: n_speakers must be >= 1");
    if (!(cfg.duration_s > 0.0)) throw ValidationError("sim: duration_s must be positive");
    if (!(cfg.turn_min_s > 0.0 && cfg.turn_min_s <= cfg.turn_max_s)) {
        throw ValidationError("sim: need 0 < turn_min_s <= turn_max_s");
    }
    if (!(cfg.gap_min_s >= 0.0 && cfg.gap_min_s <= cfg.gap_max_s)) {
        throw ValidationError("sim: need 0 <= gap_min_s <= gap_max_s");
    }
    if (cfg.dim < 2) throw ValidationError("sim: dim must be >= 2");
    if (!(cfg.intra_spread >= 0.0)) throw ValidationError("sim: intra_spread must be >= 0");
    if (!(cfg.inter_min_dist >= 0.0 && cfg.inter_min_dist <= 2.0)) {
        throw ValidationError("sim: inter_min_dist must be in [0, 2]");
    }
}

SimConfig sim_preset(std::string_view name, std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    if (name == "easy") return cfg;
    if (name == "hard") {
        cfg.inter_min_dist = 0.25;
        cfg.intra_spread = 0.15;
        return cfg;
    }
    throw UsageError("unknown preset '" + std::string(name) + "' (expected easy or hard)");
}

SimResult simulate(const SimConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);
    SimResult out;

    long draws = 0;
    while (static_cast<int>(out.centroids.size()) < cfg.n_speakers) {
        if (++draws > kMaxCentroidDraws) {
            throw ValidationError("sim: centroid rejection sampling exceeded 1e5 draws");
        }
        auto c = unit_normal_vector(rng, cfg.dim);
        const bool ok = std::all_of(out.centroids.begin(), out.centroids.end(), [&](const auto& other) {
            return cosine_distance_unit(c, other) >= cfg.inter_min_dist;
        });
        if (ok) out.centroids.push_back(std::move(c));
    }

    const std::string id = "sim" + std::to_string(cfg.seed);
    out.ref.audio_id = id;
    out.embeddings.audio_id = id;
    out.embeddings.dim = static_cast<std::size_t>(cfg.dim);

    double t = rng.uniform(cfg.gap_min_s, cfg.gap_max_s);
    int speaker = -1;
    while (t < cfg.duration_s) {
        const double end = std::min(cfg.duration_s, t + rng.uniform(cfg.turn_min_s, cfg.turn_max_s));
        if (end - t < kMinTurn) break;
        if (speaker < 0 || cfg.n_speakers == 1) {
            speaker = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n_speakers)));
        } else {
            const int step = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n_speakers - 1)));
            speaker = (speaker + step) % cfg.n_speakers;
        }

        const auto& c = out.centroids[static_cast<std::size_t>(speaker)];
        std::vector<double> e(c.size());
        double norm = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            e[i] = c[i] + rng.normal(0.0, cfg.intra_spread);
            norm += e[i] * e[i];
        }
        norm = std::sqrt(norm);
        for (auto& v : e) v /= norm;

        const SpeechRegion region{t, end};
        out.regions.push_back(region);
        out.embeddings.entries.push_back({region, std::move(e)});
        out.labels.push_back(speaker);
        out.ref.turns.push_back({t, end, "spk" + std::to_string(speaker)});
        t = end + rng.uniform(cfg.gap_min_s, cfg.gap_max_s);
    }
    return out;
}

PerturbResult perturb_transcript(const std::vector<std::string>& ref, double sub_rate,
                                 double del_rate, double ins_rate, std::uint64_t seed) {
    for (double r : {sub_rate, del_rate, ins_rate}) {
        if (!(r >= 0.0 && r < 1.0)) throw ValidationError("perturb: rates must be in [0, 1)");
    }
    if (!(sub_rate + del_rate + ins_rate < 1.0)) {
        throw ValidationError("perturb: rates must sum to less than 1");
    }
    const auto& vocab = vocabulary();
    Rng rng(seed);
    PerturbResult out;
    auto random_word = [&] { return vocab[rng.below(vocab.size())]; };

    for (const auto& tok : ref) {
        const double u = rng.uniform();
        if (u < del_rate) {
            ++out.deletions;
        } else if (u < del_rate + sub_rate) {
            std::string w = random_word();
            while (w == tok) w = random_word();
            out.tokens.push_back(std::move(w));
            ++out.substitutions;
        } else {
            out.tokens.push_back(tok);
        }
        if (rng.uniform() < ins_rate) {
            out.tokens.push_back(random_word());
            ++out.insertions;
        }
    }
    return out;
}

} // namespace lsk
