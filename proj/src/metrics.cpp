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

#include "lsk/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <utility>

namespace lsk {

// --- WER -----------------------------------------------------------------

namespace {

struct EditCost {
    std::size_t cost = 0;
    std::size_t subs = 0;

    friend bool operator<(const EditCost& a, const EditCost& b) {
        return a.cost != b.cost ? a.cost < b.cost : a.subs < b.subs;
    }
};

void finish(WerReport& r) {
    if (r.ref_words == 0) {
        r.undefined = r.total_edits() > 0;
        r.wer = r.undefined ? std::numeric_limits<double>::infinity() : 0.0;
    } else {
        r.undefined = false;
        r.wer = static_cast<double>(r.total_edits()) / static_cast<double>(r.ref_words);
    }
}

} // namespace

WerReport wer(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
    const std::size_t n = ref.size();
    const std::size_t m = hyp.size();

    // Lexicographic (edits, substitutions) fixes the whole triple: with
    // H hits, n = H+S+D and m = H+S+I, so D-I = n-m and D+I = edits-S.
    std::vector<EditCost> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = {j, 0};
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = {i, 0};
        for (std::size_t j = 1; j <= m; ++j) {
            EditCost diag = prev[j - 1];
            if (ref[i - 1] != hyp[j - 1]) {
                diag.cost += 1;
                diag.subs += 1;
            }
            EditCost del = prev[j];
            del.cost += 1;
            EditCost ins = cur[j - 1];
            ins.cost += 1;
            cur[j] = std::min({diag, del, ins});
        }
        std::swap(prev, cur);
    }

    const EditCost best = prev[m];
    WerReport r;
    r.ref_words = n;
    r.substitutions = best.subs;
    const std::size_t indels = best.cost - best.subs;
    const auto diff = static_cast<long long>(n) - static_cast<long long>(m);
    r.deletions = static_cast<std::size_t>((static_cast<long long>(indels) + diff) / 2);
    r.insertions = indels - r.deletions;
    finish(r);
    return r;
}

WerReport pool(const std::vector<WerReport>& reports) {
    WerReport total;
    for (const auto& r : reports) {
        total.substitutions += r.substitutions;
        total.deletions += r.deletions;
        total.insertions += r.insertions;
        total.ref_words += r.ref_words;
    }
    finish(total);
    return total;
}

// --- assignment ----------------------------------------------------------

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weight) {
    const std::size_t rows = weight.size();
    const std::size_t cols = rows == 0 ? 0 : weight.front().size();
    std::vector<int> result(rows, -1);
    if (rows == 0 || cols == 0) return result;

    double top = 0.0;
    for (const auto& row : weight) {
        if (row.size() != cols) throw ValidationError("assignment: ragged weight matrix");
        for (double w : row) top = std::max(top, w);
    }

    // Square Hungarian (potentials form) on cost = top - weight; padding
    // cells carry weight 0.
    const std::size_t n = std::max(rows, cols);
    auto cost = [&](std::size_t i, std::size_t j) {
        const double w = (i < rows && j < cols) ? weight[i][j] : 0.0;
        return top - w;
    };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double c = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (c < minv[j]) {
                    minv[j] = c;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t i = match[j];
        if (i >= 1 && i <= rows && j <= cols) result[i - 1] = static_cast<int>(j - 1);
    }
    return result;
}

// --- DER -----------------------------------------------------------------

void validate(const DerConfig& cfg) {
    if (!(cfg.collar_s >= 0.0) || !std::isfinite(cfg.collar_s)) {
        throw ValidationError("der: collar_s must be finite and >= 0");
    }
}

namespace {

// Turns of one speaker, sorted and pairwise disjoint.
struct SpeakerTrack {
    std::string label;
    std::vector<std::pair<double, double>> spans;
};

// Speakers ordered by their timelines, not their names, so a bijective
// relabeling leaves every accumulation order (and hence every rounding)
// unchanged.
std::vector<SpeakerTrack> tracks_of(const Diarization& d) {
    std::map<std::string, SpeakerTrack> by_label;
    for (const auto& t : d.turns) {
        auto& tr = by_label[t.speaker];
        tr.label = t.speaker;
        tr.spans.emplace_back(t.start, t.end);
    }
    std::vector<SpeakerTrack> out;
    for (auto& [label, tr] : by_label) out.push_back(std::move(tr));
    std::stable_sort(out.begin(), out.end(), [](const SpeakerTrack& a, const SpeakerTrack& b) {
        return a.spans < b.spans;
    });
    return out;
}

std::vector<double> ref_boundaries(const Diarization& ref) {
    std::vector<double> b;
    for (const auto& t : ref.turns) {
        b.push_back(t.start);
        b.push_back(t.end);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

bool in_collar(double t, const std::vector<double>& bounds, double collar) {
    if (collar <= 0.0 || bounds.empty()) return false;
    auto it = std::lower_bound(bounds.begin(), bounds.end(), t);
    if (it != bounds.end() && std::abs(*it - t) < collar) return true;
    if (it != bounds.begin() && std::abs(*std::prev(it) - t) < collar) return true;
    return false;
}

// Walks elementary pieces left to right and reports activity per speaker.
class ActivityCursor {
public:
    explicit ActivityCursor(const std::vector<SpeakerTrack>& tracks)
        : tracks_(tracks), next_(tracks.size(), 0) {}

    // Midpoints must be visited in increasing order.
    bool active(std::size_t s, double t) {
        const auto& spans = tracks_[s].spans;
        std::size_t& k = next_[s];
        while (k < spans.size() && spans[k].second <= t) ++k;
        return k < spans.size() && spans[k].first <= t;
    }

private:
    const std::vector<SpeakerTrack>& tracks_;
    std::vector<std::size_t> next_;
};

void check_pair(const Diarization& ref, const Diarization& hyp) {
    validate(ref);
    validate(hyp);
    if (!ref.audio_id.empty() && !hyp.audio_id.empty() && ref.audio_id != hyp.audio_id) {
        throw ValidationError("der: audio ids differ (" + ref.audio_id + " vs " +
                              hyp.audio_id + ")");
    }
}

void finish(DerReport& r) {
    if (!(r.total_ref_speech > 0.0)) {
        throw ValidationError("der undefined: no scored reference speech");
    }
    r.der = r.total_error() / r.total_ref_speech;
}

} // namespace

DerReport der(const Diarization& ref, const Diarization& hyp, const DerConfig& cfg) {
    validate(cfg);
    check_pair(ref, hyp);

    const auto ref_tracks = tracks_of(ref);
    const auto hyp_tracks = tracks_of(hyp);
    const auto rb = ref_boundaries(ref);

    std::vector<double> cuts = rb;
    for (const auto& t : hyp.turns) {
        cuts.push_back(t.start);
        cuts.push_back(t.end);
    }
    if (cfg.collar_s > 0.0) {
        for (double b : rb) {
            cuts.push_back(std::max(0.0, b - cfg.collar_s));
            cuts.push_back(b + cfg.collar_s);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    struct Piece {
        double dt;
        std::vector<std::size_t> ref_on;
        std::vector<std::size_t> hyp_on;
    };
    std::vector<Piece> pieces;
    ActivityCursor rc(ref_tracks), hc(hyp_tracks);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        Piece p{cuts[k + 1] - cuts[k], {}, {}};
        for (std::size_t s = 0; s < ref_tracks.size(); ++s) {
            if (rc.active(s, mid)) p.ref_on.push_back(s);
        }
        for (std::size_t s = 0; s < hyp_tracks.size(); ++s) {
            if (hc.active(s, mid)) p.hyp_on.push_back(s);
        }
        if (p.ref_on.empty() && p.hyp_on.empty()) continue;
        if (in_collar(mid, rb, cfg.collar_s)) continue;
        if (!cfg.score_overlap && p.ref_on.size() > 1) continue;
        pieces.push_back(std::move(p));
    }

    DerReport r;
    r.collar_s = cfg.collar_s;
    r.score_overlap = cfg.score_overlap;
    std::vector<std::vector<double>> overlap(ref_tracks.size(),
                                             std::vector<double>(hyp_tracks.size(), 0.0));
    for (const auto& p : pieces) {
        const auto nr = static_cast<double>(p.ref_on.size());
        const auto nh = static_cast<double>(p.hyp_on.size());
        r.total_ref_speech += nr * p.dt;
        r.missed += std::max(0.0, nr - nh) * p.dt;
        r.false_alarm += std::max(0.0, nh - nr) * p.dt;
        for (std::size_t a : p.ref_on) {
            for (std::size_t b : p.hyp_on) overlap[a][b] += p.dt;
        }
    }

    const std::vector<int> mapping = max_weight_assignment(overlap);
    for (const auto& p : pieces) {
        std::size_t correct = 0;
        for (std::size_t a : p.ref_on) {
            const int b = mapping[a];
            if (b >= 0 && std::binary_search(p.hyp_on.begin(), p.hyp_on.end(),
                                             static_cast<std::size_t>(b))) {
                ++correct;
            }
        }
        const std::size_t matched = std::min(p.ref_on.size(), p.hyp_on.size());
        r.confusion += static_cast<double>(matched - correct) * p.dt;
    }
    finish(r);
    return r;
}

DerReport pool(const std::vector<DerReport>& reports) {
    DerReport total;
    for (const auto& r : reports) {
        total.missed += r.missed;
        total.false_alarm += r.false_alarm;
        total.confusion += r.confusion;
        total.total_ref_speech += r.total_ref_speech;
        total.collar_s = r.collar_s;
        total.score_overlap = r.score_overlap;
    }
    finish(total);
    return total;
}

std::size_t boundary_count(const Diarization& ref, const Diarization& hyp) {
    std::vector<double> b;
    for (const auto* d : {&ref, &hyp}) {
        for (const auto& t : d->turns) {
            b.push_back(t.start);
            b.push_back(t.end);
        }
    }
    std::sort(b.begin(), b.end());
    return static_cast<std::size_t>(std::unique(b.begin(), b.end()) - b.begin());
}

DerReport der_frame_oracle(const Diarization& ref, const Diarization& hyp, double frame_s,
                           const DerConfig& cfg) {
    validate(cfg);
    check_pair(ref, hyp);
    if (!(frame_s > 0.0)) throw ValidationError("der oracle: frame_s must be positive");

    const auto ref_tracks = tracks_of(ref);
    const auto hyp_tracks = tracks_of(hyp);
    constexpr std::size_t kMaxSpeakers = 6;
    if (ref_tracks.size() > kMaxSpeakers || hyp_tracks.size() > kMaxSpeakers) {
        throw ValidationError("der oracle: at most 6 speakers per side");
    }
    const auto rb = ref_boundaries(ref);

    double horizon = 0.0;
    for (const auto* d : {&ref, &hyp}) {
        for (const auto& t : d->turns) horizon = std::max(horizon, t.end);
    }
    const auto frames = static_cast<std::size_t>(std::ceil(horizon / frame_s));

    auto mask_at = [](const std::vector<SpeakerTrack>& tracks, double t) {
        std::uint32_t mask = 0;
        for (std::size_t s = 0; s < tracks.size(); ++s) {
            for (const auto& [a, b] : tracks[s].spans) {
                if (a <= t && t < b) {
                    mask |= 1u << s;
                    break;
                }
            }
        }
        return mask;
    };

    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> tally;
    for (std::size_t i = 0; i < frames; ++i) {
        const double c = (static_cast<double>(i) + 0.5) * frame_s;
        if (in_collar(c, rb, cfg.collar_s)) continue;
        const std::uint32_t rm = mask_at(ref_tracks, c);
        const std::uint32_t hm = mask_at(hyp_tracks, c);
        if (!cfg.score_overlap && std::popcount(rm) > 1) continue;
        if (rm == 0 && hm == 0) continue;
        ++tally[{rm, hm}];
    }

    DerReport best;
    best.collar_s = cfg.collar_s;
    best.score_overlap = cfg.score_overlap;
    double best_error = std::numeric_limits<double>::infinity();

    // Every injection ref speaker -> hyp speaker or unmapped (-1).
    std::vector<int> map(ref_tracks.size(), -1);
    std::vector<char> taken(hyp_tracks.size(), 0);
    auto evaluate = [&] {
        std::size_t miss = 0, fa = 0, conf = 0, total = 0;
        for (const auto& [masks, count] : tally) {
            const auto [rm, hm] = masks;
            const auto nr = static_cast<std::size_t>(std::popcount(rm));
            const auto nh = static_cast<std::size_t>(std::popcount(hm));
            std::size_t correct = 0;
            for (std::size_t s = 0; s < map.size(); ++s) {
                if ((rm >> s & 1u) && map[s] >= 0 && (hm >> map[s] & 1u)) ++correct;
            }
            total += nr * count;
            miss += (nr > nh ? nr - nh : 0) * count;
            fa += (nh > nr ? nh - nr : 0) * count;
            conf += (std::min(nr, nh) - correct) * count;
        }
        const double err = static_cast<double>(miss + fa + conf) * frame_s;
        if (err < best_error) {
            best_error = err;
            best.missed = static_cast<double>(miss) * frame_s;
            best.false_alarm = static_cast<double>(fa) * frame_s;
            best.confusion = static_cast<double>(conf) * frame_s;
            best.total_ref_speech = static_cast<double>(total) * frame_s;
        }
    };
    auto recurse = [&](auto&& self, std::size_t s) -> void {
        if (s == map.size()) {
            evaluate();
            return;
        }
        map[s] = -1;
        self(self, s + 1);
        for (std::size_t h = 0; h < hyp_tracks.size(); ++h) {
            if (taken[h]) continue;
            taken[h] = 1;
            map[s] = static_cast<int>(h);
            self(self, s + 1);
            taken[h] = 0;
        }
        map[s] = -1;
    };
    recurse(recurse, 0);
    finish(best);
    return best;
}

} // namespace lsk
