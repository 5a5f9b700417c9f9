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

#include "lsk/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lsk {

void validate(const WindowingConfig& cfg) {
    if (!(cfg.max_window_s > 0.0) || !std::isfinite(cfg.max_window_s)) {
        throw ValidationError("windowing: max_window_s must be positive");
    }
    if (!(cfg.gap_threshold_s >= 0.0)) {
        throw ValidationError("windowing: gap_threshold_s must be >= 0");
    }
    if (!(cfg.pad_s >= 0.0) || !std::isfinite(cfg.pad_s)) {
        throw ValidationError("windowing: pad_s must be >= 0");
    }
}

namespace {

void check_regions(const std::vector<SpeechRegion>& regions, double duration) {
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const auto& r = regions[i];
        const std::string ctx = "region " + std::to_string(i);
        if (!(r.start >= 0.0 && r.start < r.end)) {
            throw ValidationError(ctx + ": must satisfy 0 <= start < end");
        }
        if (r.end > duration) throw ValidationError(ctx + ": ends after the audio duration");
        if (i > 0 && r.start < regions[i - 1].end) {
            throw ValidationError(ctx + ": overlaps the previous region");
        }
    }
}

DecodingWindow core_window(double core_start, double core_end) {
    DecodingWindow w;
    w.core_start = core_start;
    w.core_end = core_end;
    return w;
}

// Pieces of [start, end] no longer than max_len. The piece count absorbs
// rounding noise so a 40.000000000001 s region does not yield a sliver.
void split_region(const SpeechRegion& r, double max_len, std::vector<DecodingWindow>& out) {
    const double pieces = std::max(1.0, std::ceil(r.length() / max_len - 1e-9));
    const auto n = static_cast<std::size_t>(pieces);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = r.start + static_cast<double>(k) * max_len;
        const double e = (k + 1 == n) ? r.end : r.start + static_cast<double>(k + 1) * max_len;
        out.push_back(core_window(s, e));
    }
}

} // namespace

std::vector<DecodingWindow> build_windows(std::vector<SpeechRegion> regions, double duration,
                                          const WindowingConfig& cfg) {
    validate(cfg);
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw ValidationError("windowing: duration must be finite and non-negative");
    }
    sort_regions(regions);
    check_regions(regions, duration);

    std::vector<DecodingWindow> windows;
    bool open = false;
    double prev_end = 0.0;
    for (const auto& r : regions) {
        if (r.length() > cfg.max_window_s) {
            split_region(r, cfg.max_window_s, windows);
            open = false;
        } else if (open && r.start - prev_end <= cfg.gap_threshold_s &&
                   r.end - windows.back().core_start <= cfg.max_window_s) {
            windows.back().core_end = r.end;
        } else {
            windows.push_back(core_window(r.start, r.end));
            open = true;
        }
        prev_end = r.end;
    }

    for (auto& w : windows) {
        w.start = std::max(0.0, w.core_start - cfg.pad_s);
        w.end = std::min(duration, w.core_end + cfg.pad_s);
    }
    return assign_region_indices(std::move(windows), regions);
}

std::vector<DecodingWindow> assign_region_indices(std::vector<DecodingWindow> windows,
                                                  const std::vector<SpeechRegion>& regions) {
    std::size_t first = 0;
    for (auto& w : windows) {
        w.region_indices.clear();
        while (first < regions.size() && regions[first].end <= w.core_start) ++first;
        for (std::size_t i = first; i < regions.size() && regions[i].start < w.core_end; ++i) {
            const double overlap = std::min(w.core_end, regions[i].end) -
                                   std::max(w.core_start, regions[i].start);
            if (overlap > 0.0) w.region_indices.push_back(i);
        }
    }
    return windows;
}

} // namespace lsk
