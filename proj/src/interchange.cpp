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

#include "lsk/interchange.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lsk {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void emit_warning(const WarningSink& sink, std::string_view message) {
    if (sink) {
        sink(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

namespace {

constexpr double kDurationSlack = 0.01;

bool has_whitespace(std::string_view s) {
    return std::any_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

constexpr const char* kNonFinite = "\x01nonfinite";

// Python's json module writes NaN, Infinity and -Infinity, and a literal such
// as 1e999 overflows to inf. Those tokens become a sentinel string so the
// typed readers can report which entry carried them.
std::string mark_non_finite(std::string_view text) {
    static const std::string sentinel = std::string("\"") + "\\u0001nonfinite" + "\"";
    std::string out;
    out.reserve(text.size());
    bool in_string = false;
    for (std::size_t i = 0; i < text.size();) {
        const char c = text[i];
        if (in_string) {
            out += c;
            if (c == '\\' && i + 1 < text.size()) {
                out += text[i + 1];
                i += 2;
                continue;
            }
            if (c == '"') in_string = false;
            ++i;
            continue;
        }
        if (c == '"') {
            in_string = true;
            out += c;
            ++i;
            continue;
        }
        const std::string_view rest = text.substr(i);
        bool matched = false;
        for (std::string_view tok : {"NaN", "Infinity", "-Infinity"}) {
            if (rest.substr(0, tok.size()) == tok) {
                out += sentinel;
                i += tok.size();
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (c == '-' || (c >= '0' && c <= '9')) {
            std::size_t j = i + 1;
            while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) ||
                                       text[j] == '.' || text[j] == 'e' || text[j] == 'E' ||
                                       text[j] == '+' || text[j] == '-')) {
                ++j;
            }
            const std::string number(text.substr(i, j - i));
            const double v = std::strtod(number.c_str(), nullptr);
            out += std::isinf(v) ? sentinel : number;
            i = j;
            continue;
        }
        out += c;
        ++i;
    }
    return out;
}

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(mark_non_finite(text));
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": malformed JSON: " + e.what());
    }
}

const json& require(const json& obj, const char* key, std::string_view ctx) {
    if (!obj.is_object()) {
        throw ParseError(std::string(ctx) + ": expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(std::string(ctx) + ": missing key \"" + key + "\"");
    }
    return *it;
}

double require_number(const json& obj, const char* key, std::string_view ctx) {
    const json& v = require(obj, key, ctx);
    if (!v.is_number()) {
        throw ParseError(std::string(ctx) + ": \"" + key + "\" must be a number");
    }
    return v.get<double>();
}

std::string require_string(const json& obj, const char* key, std::string_view ctx) {
    const json& v = require(obj, key, ctx);
    if (!v.is_string()) {
        throw ParseError(std::string(ctx) + ": \"" + key + "\" must be a string");
    }
    return v.get<std::string>();
}

const json& require_array(const json& obj, const char* key, std::string_view ctx) {
    const json& v = require(obj, key, ctx);
    if (!v.is_array()) {
        throw ParseError(std::string(ctx) + ": \"" + key + "\" must be an array");
    }
    return v;
}

long long require_integer(const json& obj, const char* key, std::string_view ctx) {
    const json& v = require(obj, key, ctx);
    if (!v.is_number_integer()) {
        throw ParseError(std::string(ctx) + ": \"" + key + "\" must be an integer");
    }
    return v.get<long long>();
}

void check_audio_id(const std::string& id, std::string_view ctx) {
    if (id.empty() || has_whitespace(id)) {
        throw ValidationError(std::string(ctx) +
                              ": audio_id must be non-empty without whitespace");
    }
}

std::vector<double> read_vector(const json& entry, std::size_t index, std::size_t dim) {
    const std::string ctx = "entry " + std::to_string(index);
    const json& arr = require_array(entry, "vector", ctx);
    if (arr.size() != dim) {
        throw ValidationError(ctx + ": vector has " + std::to_string(arr.size()) +
                              " components, expected dim " + std::to_string(dim));
    }
    std::vector<double> v;
    v.reserve(dim);
    for (std::size_t j = 0; j < arr.size(); ++j) {
        if (arr[j].is_string() && arr[j].get_ref<const std::string&>() == kNonFinite) {
            throw ValidationError(ctx + ": component " + std::to_string(j) + " is NaN or Inf");
        }
        if (!arr[j].is_number()) {
            throw ValidationError(ctx + ": component " + std::to_string(j) +
                                  " is not a number");
        }
        const double x = arr[j].get<double>();
        if (!std::isfinite(x)) {
            throw ValidationError(ctx + ": component " + std::to_string(j) +
                                  " is NaN or Inf");
        }
        v.push_back(x);
    }
    return v;
}

bool turn_less(const SpeakerTurn& a, const SpeakerTurn& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    return a.speaker < b.speaker;
}

void check_turn(const SpeakerTurn& t, std::size_t i) {
    const std::string ctx = "turn " + std::to_string(i);
    if (!std::isfinite(t.start) || !std::isfinite(t.end)) {
        throw ValidationError(ctx + ": non-finite time");
    }
    if (t.start < 0.0) throw ValidationError(ctx + ": negative start");
    if (!(t.start < t.end)) throw ValidationError(ctx + ": start must be < end");
    if (t.speaker.empty()) throw ValidationError(ctx + ": empty speaker label");
    if (has_whitespace(t.speaker)) {
        throw ValidationError(ctx + ": speaker label contains whitespace");
    }
}

long long to_millis(double seconds) { return std::llround(seconds * 1000.0); }

std::string format_millis(long long ms) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld.%03lld", ms / 1000, ms % 1000);
    return buf;
}

bool parse_double(std::string_view s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

} // namespace

bool is_supported_sample_rate(int rate) {
    switch (rate) {
    case 8000:
    case 16000:
    case 22050:
    case 44100:
    case 48000:
        return true;
    default:
        return false;
    }
}

void validate(const AudioMeta& meta) {
    check_audio_id(meta.audio_id, "audio meta");
    if (!is_supported_sample_rate(meta.sample_rate)) {
        throw ValidationError("unsupported sample rate " + std::to_string(meta.sample_rate));
    }
    if (!std::isfinite(meta.duration) || meta.duration < 0.0) {
        throw ValidationError("duration must be finite and non-negative");
    }
    if (meta.channels < 1) throw ValidationError("channels must be positive");
}

void sort_regions(std::vector<SpeechRegion>& regions) {
    std::stable_sort(regions.begin(), regions.end(),
                     [](const SpeechRegion& a, const SpeechRegion& b) {
                         if (a.start != b.start) return a.start < b.start;
                         return a.end < b.end;
                     });
}

void validate(const EmbeddingSet& set) {
    if (set.dim == 0) throw ValidationError("embedding dim must be positive");
    for (std::size_t i = 0; i < set.entries.size(); ++i) {
        const auto& e = set.entries[i];
        const std::string ctx = "entry " + std::to_string(i);
        if (e.vector.size() != set.dim) {
            throw ValidationError(ctx + ": dimension mismatch");
        }
        for (std::size_t j = 0; j < e.vector.size(); ++j) {
            if (!std::isfinite(e.vector[j])) {
                throw ValidationError(ctx + ": component " + std::to_string(j) +
                                      " is NaN or Inf");
            }
        }
        if (!(e.region.start >= 0.0) || !(e.region.start < e.region.end)) {
            throw ValidationError(ctx + ": invalid region");
        }
    }
}

std::vector<std::string> Diarization::speakers() const {
    std::set<std::string> labels;
    for (const auto& t : turns) labels.insert(t.speaker);
    return {labels.begin(), labels.end()};
}

Diarization canonicalize(Diarization d) {
    for (std::size_t i = 0; i < d.turns.size(); ++i) check_turn(d.turns[i], i);
    std::stable_sort(d.turns.begin(), d.turns.end(), turn_less);

    std::map<std::string, std::vector<SpeakerTurn>> by_label;
    for (auto& t : d.turns) by_label[t.speaker].push_back(std::move(t));

    std::vector<SpeakerTurn> merged;
    for (auto& [label, turns] : by_label) {
        SpeakerTurn cur = turns.front();
        for (std::size_t i = 1; i < turns.size(); ++i) {
            if (turns[i].start < cur.end) {
                cur.end = std::max(cur.end, turns[i].end);
            } else {
                merged.push_back(cur);
                cur = turns[i];
            }
        }
        merged.push_back(cur);
    }
    std::sort(merged.begin(), merged.end(), turn_less);
    d.turns = std::move(merged);
    return d;
}

void validate(const Diarization& d) {
    std::map<std::string, double> last_end;
    for (std::size_t i = 0; i < d.turns.size(); ++i) {
        const auto& t = d.turns[i];
        check_turn(t, i);
        if (i > 0 && turn_less(t, d.turns[i - 1])) {
            throw ValidationError("turn " + std::to_string(i) + ": turns not sorted");
        }
        auto it = last_end.find(t.speaker);
        if (it != last_end.end() && t.start < it->second) {
            throw ValidationError("turn " + std::to_string(i) +
                                  ": overlaps an earlier turn of speaker " + t.speaker);
        }
        last_end[t.speaker] = std::max(t.end, it == last_end.end() ? t.end : it->second);
    }
}

void validate(const DecodingWindow& w) {
    if (!(w.start <= w.core_start && w.core_start < w.core_end && w.core_end <= w.end)) {
        throw ValidationError("window must satisfy start <= core_start < core_end <= end");
    }
    if (w.start < 0.0) throw ValidationError("window start must be non-negative");
    for (std::size_t i = 1; i < w.region_indices.size(); ++i) {
        if (w.region_indices[i] <= w.region_indices[i - 1]) {
            throw ValidationError("window region indices must be strictly increasing");
        }
    }
}

// --- Segments-JSON -------------------------------------------------------

SegmentsFile parse_segments_json(std::string_view text) {
    const json doc = parse_json(text, "segments");
    SegmentsFile out;
    out.meta.audio_id = require_string(doc, "audio_id", "segments");
    out.meta.sample_rate = static_cast<int>(require_integer(doc, "sample_rate", "segments"));
    out.meta.duration = require_number(doc, "duration", "segments");
    out.meta.channels = 1;
    validate(out.meta);

    const json& regions = require_array(doc, "regions", "segments");
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const std::string ctx = "region " + std::to_string(i);
        SpeechRegion r{require_number(regions[i], "start", ctx),
                       require_number(regions[i], "end", ctx)};
        if (r.start < 0.0 || r.end < 0.0) throw ValidationError(ctx + ": negative time");
        if (r.end < r.start) throw ValidationError(ctx + ": end before start");
        if (r.end > out.meta.duration + kDurationSlack) {
            throw ValidationError(ctx + ": extends past the audio duration");
        }
        // Boundaries inside the slack are clamped so downstream stages can
        // rely on regions lying within [0, duration].
        r.end = std::min(r.end, out.meta.duration);
        if (r.start >= r.end) continue;
        out.regions.push_back(r);
    }
    sort_regions(out.regions);
    return out;
}

SegmentsFile read_segments_json(const std::filesystem::path& path) {
    return parse_segments_json(read_text_file(path));
}

std::string format_segments_json(const AudioMeta& meta,
                                 const std::vector<SpeechRegion>& regions) {
    validate(meta);
    ordered_json doc;
    doc["audio_id"] = meta.audio_id;
    doc["sample_rate"] = meta.sample_rate;
    doc["duration"] = meta.duration;
    doc["regions"] = ordered_json::array();
    for (const auto& r : regions) {
        if (!(r.start >= 0.0 && r.start < r.end && r.end <= meta.duration)) {
            throw ValidationError("cannot write an invalid region");
        }
        doc["regions"].push_back({{"start", r.start}, {"end", r.end}});
    }
    return doc.dump(2) + "\n";
}

// --- Embeddings-JSON -----------------------------------------------------

EmbeddingSet parse_embeddings_json(std::string_view text, const WarningSink& warn) {
    const json doc = parse_json(text, "embeddings");
    EmbeddingSet set;
    set.audio_id = require_string(doc, "audio_id", "embeddings");
    check_audio_id(set.audio_id, "embeddings");
    const long long dim = require_integer(doc, "dim", "embeddings");
    if (dim <= 0) throw ValidationError("embeddings: dim must be positive");
    set.dim = static_cast<std::size_t>(dim);

    const json& entries = require_array(doc, "entries", "embeddings");
    set.entries.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string ctx = "entry " + std::to_string(i);
        EmbeddingEntry e;
        e.region = {require_number(entries[i], "start", ctx),
                    require_number(entries[i], "end", ctx)};
        if (!(e.region.start >= 0.0) || !(e.region.start < e.region.end)) {
            throw ValidationError(ctx + ": region must satisfy 0 <= start < end");
        }
        e.vector = read_vector(entries[i], i, set.dim);
        set.entries.push_back(std::move(e));
    }

    auto by_time = [](const EmbeddingEntry& a, const EmbeddingEntry& b) {
        if (a.region.start != b.region.start) return a.region.start < b.region.start;
        return a.region.end < b.region.end;
    };
    if (!std::is_sorted(set.entries.begin(), set.entries.end(), by_time)) {
        emit_warning(warn, "embeddings for " + set.audio_id +
                               " were not sorted by start time; sorting");
        std::stable_sort(set.entries.begin(), set.entries.end(), by_time);
    }
    return set;
}

EmbeddingSet read_embeddings_json(const std::filesystem::path& path, const WarningSink& warn) {
    return parse_embeddings_json(read_text_file(path), warn);
}

std::string format_embeddings_json(const EmbeddingSet& set) {
    check_audio_id(set.audio_id, "embeddings");
    validate(set);
    ordered_json doc;
    doc["audio_id"] = set.audio_id;
    doc["dim"] = set.dim;
    doc["entries"] = ordered_json::array();
    for (const auto& e : set.entries) {
        ordered_json item;
        item["start"] = e.region.start;
        item["end"] = e.region.end;
        item["vector"] = e.vector;
        doc["entries"].push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

LabeledEmbeddings parse_labeled_embeddings_json(std::string_view text) {
    const json doc = parse_json(text, "labeled embeddings");
    LabeledEmbeddings out;
    const long long dim = require_integer(doc, "dim", "labeled embeddings");
    if (dim <= 0) throw ValidationError("labeled embeddings: dim must be positive");
    out.dim = static_cast<std::size_t>(dim);
    const json& entries = require_array(doc, "entries", "labeled embeddings");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string ctx = "entry " + std::to_string(i);
        std::string speaker = require_string(entries[i], "speaker", ctx);
        if (speaker.empty()) throw ValidationError(ctx + ": empty speaker label");
        out.samples.emplace_back(read_vector(entries[i], i, out.dim), std::move(speaker));
    }
    return out;
}

LabeledEmbeddings read_labeled_embeddings_json(const std::filesystem::path& path) {
    return parse_labeled_embeddings_json(read_text_file(path));
}

// --- Transcripts-JSON ----------------------------------------------------

TranscriptSet parse_transcripts_json(std::string_view text) {
    const json doc = parse_json(text, "transcripts");
    TranscriptSet set;
    set.audio_id = require_string(doc, "audio_id", "transcripts");
    check_audio_id(set.audio_id, "transcripts");
    const json& windows = require_array(doc, "windows", "transcripts");
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const std::string ctx = "window " + std::to_string(i);
        WindowTranscript wt;
        wt.window.start = require_number(windows[i], "start", ctx);
        wt.window.end = require_number(windows[i], "end", ctx);
        wt.window.core_start = require_number(windows[i], "core_start", ctx);
        wt.window.core_end = require_number(windows[i], "core_end", ctx);
        wt.text = require_string(windows[i], "text", ctx);
        try {
            validate(wt.window);
        } catch (const ValidationError& e) {
            throw ValidationError(ctx + ": " + e.what());
        }
        set.windows.push_back(std::move(wt));
    }
    return set;
}

TranscriptSet read_transcripts_json(const std::filesystem::path& path) {
    return parse_transcripts_json(read_text_file(path));
}

std::string format_transcripts_json(const TranscriptSet& set) {
    check_audio_id(set.audio_id, "transcripts");
    ordered_json doc;
    doc["audio_id"] = set.audio_id;
    doc["windows"] = ordered_json::array();
    for (const auto& wt : set.windows) {
        validate(wt.window);
        ordered_json item;
        item["start"] = wt.window.start;
        item["end"] = wt.window.end;
        item["core_start"] = wt.window.core_start;
        item["core_end"] = wt.window.core_end;
        item["text"] = wt.text;
        doc["windows"].push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

// --- RTTM ----------------------------------------------------------------

std::string format_rttm(const Diarization& d) {
    validate(d);
    if (d.turns.empty()) return {};
    check_audio_id(d.audio_id, "rttm");
    std::string out;
    for (const auto& t : d.turns) {
        const long long onset = to_millis(t.start);
        const long long duration = to_millis(t.end) - onset;
        if (duration <= 0) {
            throw ValidationError("turn of " + t.speaker + " at " + format_millis(onset) +
                                  " is shorter than 1 ms");
        }
        out += "SPEAKER " + d.audio_id + " 1 " + format_millis(onset) + " " +
               format_millis(duration) + " <NA> <NA> " + t.speaker + " <NA> <NA>\n";
    }
    return out;
}

void write_rttm(const Diarization& d, const std::filesystem::path& path) {
    write_file_atomic(path, format_rttm(d));
}

std::map<std::string, Diarization> parse_rttm_multi(std::string_view text) {
    std::map<std::string, Diarization> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream fields_in(line);
        std::vector<std::string> fields;
        for (std::string f; fields_in >> f;) fields.push_back(std::move(f));
        if (fields.empty() || fields[0].starts_with(";;")) continue;

        const std::string ctx = "rttm line " + std::to_string(lineno);
        if (fields[0] != "SPEAKER") throw ParseError(ctx + ": expected SPEAKER record");
        if (fields.size() != 9 && fields.size() != 10) {
            throw ParseError(ctx + ": expected 9 or 10 fields, got " +
                             std::to_string(fields.size()));
        }
        double onset = 0.0, duration = 0.0;
        if (!parse_double(fields[3], onset)) throw ParseError(ctx + ": non-numeric onset");
        if (!parse_double(fields[4], duration)) {
            throw ParseError(ctx + ": non-numeric duration");
        }
        if (onset < 0.0) throw ParseError(ctx + ": negative onset");
        if (duration < 0.0) throw ParseError(ctx + ": negative duration");
        if (duration == 0.0) throw ParseError(ctx + ": zero duration");

        Diarization& d = out[fields[1]];
        d.audio_id = fields[1];
        d.turns.push_back({onset, onset + duration, fields[7]});
    }
    for (auto& [id, d] : out) d = canonicalize(std::move(d));
    return out;
}

Diarization parse_rttm(std::string_view text) {
    auto all = parse_rttm_multi(text);
    if (all.empty()) return {};
    if (all.size() > 1) {
        throw ValidationError("rttm holds " + std::to_string(all.size()) +
                              " recordings; expected one");
    }
    return std::move(all.begin()->second);
}

Diarization read_rttm(const std::filesystem::path& path) {
    return parse_rttm(read_text_file(path));
}

std::map<std::string, Diarization> read_rttm_multi(const std::filesystem::path& path) {
    return parse_rttm_multi(read_text_file(path));
}

// --- file helpers --------------------------------------------------------

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading " + path.string());
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    static std::atomic<unsigned long> counter{0};
    tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("error writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                      ec.message());
    }
}

} // namespace lsk
