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

// Shared domain types and the file formats exchanged between the core
// stages, the scorers, and external model adapters.
//
//   Segments-JSON    {"audio_id", "sample_rate", "duration", "regions": [{"start","end"}]}
//   Embeddings-JSON  {"audio_id", "dim", "entries": [{"start","end","vector"}]}
//   Transcripts-JSON {"audio_id", "windows": [{"start","end","core_start","core_end","text"}]}
//   RTTM             SPEAKER <id> 1 <onset %.3f> <dur %.3f> <NA> <NA> <spk> <NA> <NA>
//
// All times are seconds.

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lsk/errors.hpp"

namespace lsk {

struct AudioMeta {
    std::string audio_id;
    int sample_rate = 16000;
    double duration = 0.0;
    int channels = 1;
};

bool is_supported_sample_rate(int rate);
void validate(const AudioMeta& meta);

struct SpeechRegion {
    double start = 0.0;
    double end = 0.0;

    double length() const { return end - start; }
    friend bool operator==(const SpeechRegion&, const SpeechRegion&) = default;
};

/// Sort by (start, end).
void sort_regions(std::vector<SpeechRegion>& regions);

struct DecodingWindow {
    double start = 0.0;       // padded
    double end = 0.0;         // padded
    double core_start = 0.0;  // pre-padding
    double core_end = 0.0;    // pre-padding
    std::vector<std::size_t> region_indices;

    double core_length() const { return core_end - core_start; }
};

struct EmbeddingEntry {
    SpeechRegion region;
    std::vector<double> vector;
};

struct EmbeddingSet {
    std::string audio_id;
    std::size_t dim = 0;
    std::vector<EmbeddingEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
};

/// Checks dim agreement, finiteness and region validity. Does not check order.
void validate(const EmbeddingSet& set);

struct SpeakerTurn {
    double start = 0.0;
    double end = 0.0;
    std::string speaker;

    friend bool operator==(const SpeakerTurn&, const SpeakerTurn&) = default;
};

struct Diarization {
    std::string audio_id;
    std::vector<SpeakerTurn> turns;

    /// Distinct labels in lexicographic order.
    std::vector<std::string> speakers() const;
};

/// Sorts turns by (start, end, speaker) and merges overlapping turns that
/// share a label. Throws ValidationError for empty labels or start >= end.
Diarization canonicalize(Diarization d);

/// Throws ValidationError unless every Diarization invariant holds.
void validate(const Diarization& d);

struct WindowTranscript {
    DecodingWindow window;
    std::string text;
};

struct TranscriptSet {
    std::string audio_id;
    std::vector<WindowTranscript> windows;
};

void validate(const DecodingWindow& w);

// --- Segments-JSON -------------------------------------------------------

struct SegmentsFile {
    AudioMeta meta;
    std::vector<SpeechRegion> regions;
};

SegmentsFile parse_segments_json(std::string_view text);
SegmentsFile read_segments_json(const std::filesystem::path& path);
std::string format_segments_json(const AudioMeta& meta,
                                 const std::vector<SpeechRegion>& regions);

// --- Embeddings-JSON -----------------------------------------------------

EmbeddingSet parse_embeddings_json(std::string_view text, const WarningSink& warn = {});
EmbeddingSet read_embeddings_json(const std::filesystem::path& path,
                                  const WarningSink& warn = {});
std::string format_embeddings_json(const EmbeddingSet& set);

/// Embeddings-JSON whose entries additionally carry a "speaker" string.
/// Used as PLDA training input.
struct LabeledEmbeddings {
    std::size_t dim = 0;
    std::vector<std::pair<std::vector<double>, std::string>> samples;
};

LabeledEmbeddings parse_labeled_embeddings_json(std::string_view text);
LabeledEmbeddings read_labeled_embeddings_json(const std::filesystem::path& path);

// --- Transcripts-JSON ----------------------------------------------------

TranscriptSet parse_transcripts_json(std::string_view text);
TranscriptSet read_transcripts_json(const std::filesystem::path& path);
std::string format_transcripts_json(const TranscriptSet& set);

// --- RTTM ----------------------------------------------------------------

std::string format_rttm(const Diarization& d);
void write_rttm(const Diarization& d, const std::filesystem::path& path);

/// Parses a single-recording RTTM. Throws ValidationError when the file
/// mixes several audio ids; use parse_rttm_multi for those.
Diarization parse_rttm(std::string_view text);
Diarization read_rttm(const std::filesystem::path& path);

/// All recordings of an RTTM file keyed by audio id.
std::map<std::string, Diarization> parse_rttm_multi(std::string_view text);
std::map<std::string, Diarization> read_rttm_multi(const std::filesystem::path& path);

// --- file helpers --------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace lsk
