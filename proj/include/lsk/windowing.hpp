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

#include <vector>

#include "lsk/interchange.hpp"

namespace lsk {

struct WindowingConfig {
    double max_window_s = 20.0;
    double gap_threshold_s = 5.0;
    double pad_s = 1.0;
};

void validate(const WindowingConfig& cfg);

/// Gap-aware merging of speech regions into decoding windows.
///
/// Regions are visited left to right. A region extends the open window when
/// the silence since the previous region (next.start - prev.end) is at most
/// gap_threshold_s and the extended core span stays within max_window_s;
/// otherwise it opens a new window. A region longer than max_window_s is cut
/// into consecutive pieces of at most max_window_s, each a window of its own.
///
/// Cores are then padded by pad_s on both sides and clamped to
/// [0, duration]. Padded windows of neighbours may overlap.
///
/// Input is sorted first; overlapping regions or regions outside
/// [0, duration] raise ValidationError. Returned windows carry their
/// region_indices (indices into the sorted region list).
std::vector<DecodingWindow> build_windows(std::vector<SpeechRegion> regions, double duration,
                                          const WindowingConfig& cfg = {});

/// Fills region_indices of each window with every region that overlaps its
/// core by a positive amount. Both lists must be sorted by time.
std::vector<DecodingWindow> assign_region_indices(std::vector<DecodingWindow> windows,
                                                  const std::vector<SpeechRegion>& regions);

} // namespace lsk
