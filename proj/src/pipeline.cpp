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


#include "lsk/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <thread>

#include <openssl/evp.h>

namespace lsk {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Typed, path-aware access to one JSON object of the config file.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError("config: " + path_ + " must be an object");
    }

    void allow(std::initializer_list<std::string_view> known) const {
        for (const auto& [key, value] : j_.items()) {
            if (std::find(known.begin(), known.end(), key) == known.end()) {
                throw ValidationError("config: unknown key " + where(key));
            }
        }
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) const { return j_.at(key); }
    std::string where(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    void get(const char* key, double& out) const {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ValidationError("config: " + where(key) + " must be a number");
        out = v.get<double>();
    }
    void get(const char* key, int& out) const {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() < std::numeric_limits<int>::min() ||
            v.get<std::int64_t>() > std::numeric_limits<int>::max()) {
            throw ValidationError("config: " + where(key) + " must be an integer");
        }
        out = v.get<int>();
    }
    void get(const char* key, std::uint64_t& out) const {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_unsigned()) {
            throw ValidationError("config: " + where(key) + " must be a non-negative integer");
        }
        out = v.get<std::uint64_t>();
    }
    void get(const char* key, bool& out) const {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_boolean()) throw ValidationError("config: " + where(key) + " must be a boolean");
        out = v.get<bool>();
    }
    void get(const char* key, std::string& out) const {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_string()) throw ValidationError("config: " + where(key) + " must be a string");
        out = v.get<std::string>();
    }

private:
    const json& j_;
    std::string path_;
};

std::string codepoint_name(char32_t cp) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "U+%04X", static_cast<unsigned>(cp));
    return buf;
}

char32_t parse_codepoint(const std::string& s, const std::string& where) {
    if (s.size() < 3 || s.size() > 8 || s.compare(0, 2, "U+") != 0 ||
        s.find_first_not_of("0123456789abcdefABCDEF", 2) != std::string::npos) {
        throw ValidationError("config: " + where + " entries must look like U+200B");
    }
    return static_cast<char32_t>(std::stoul(s.substr(2), nullptr, 16));
}

const char* noise_policy_name(NoisePolicy p) {
    return p == NoisePolicy::own_cluster ? "own_cluster" : "nearest_cluster";
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    return lines;
}

} // namespace

// --- config --------------------------------------------------------------

void validate(const PipelineConfig& cfg) {
    validate(cfg.windowing);
    validate(cfg.vad);
    validate(cfg.spectral);
    validate(cfg.dbscan);
    validate(cfg.hmm);
    validate(cfg.der);
    validate(cfg.norm);
}

json config_to_json(const PipelineConfig& cfg) {
    json zw = json::array();
    for (char32_t cp : cfg.norm.zero_width_set) zw.push_back(codepoint_name(cp));
    return json{
        {"windowing",
         {{"max_window_s", cfg.windowing.max_window_s},
          {"gap_threshold_s", cfg.windowing.gap_threshold_s},
          {"pad_s", cfg.windowing.pad_s}}},
        {"vad",
         {{"frame_ms", cfg.vad.frame_ms},
          {"hop_ms", cfg.vad.hop_ms},
          {"energy_percentile", cfg.vad.energy_percentile},
          {"threshold_db_above_floor", cfg.vad.threshold_db_above_floor},
          {"min_speech_ms", cfg.vad.min_speech_ms},
          {"min_silence_ms", cfg.vad.min_silence_ms},
          {"speech_pad_ms", cfg.vad.speech_pad_ms}}},
        {"spectral",
         {{"k_min", cfg.spectral.k_min},
          {"k_max", cfg.spectral.k_max},
          {"binarize_p", cfg.spectral.binarize_p},
          {"kmeans_restarts", cfg.spectral.kmeans_restarts},
          {"seed", cfg.spectral.seed},
          {"max_kmeans_iters", cfg.spectral.max_kmeans_iters}}},
        {"dbscan",
         {{"eps", cfg.dbscan.eps},
          {"min_samples", cfg.dbscan.min_samples},
          {"noise_policy", noise_policy_name(cfg.dbscan.noise_policy)}}},
        {"hmm",
         {{"loop_prob", cfg.hmm.loop_prob},
          {"emission_scale", cfg.hmm.emission_scale},
          {"max_iters", cfg.hmm.max_iters}}},
        {"der", {{"collar_s", cfg.der.collar_s}, {"score_overlap", cfg.der.score_overlap}}},
        {"norm",
         {{"apply_nfc", cfg.norm.apply_nfc},
          {"strip_zero_width", cfg.norm.strip_zero_width},
          {"collapse_whitespace", cfg.norm.collapse_whitespace},
          {"zero_width_set", zw}}},
        {"paths", {{"input_dir", cfg.paths.input_dir}, {"output_dir", cfg.paths.output_dir}}},
    };
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig cfg;
    const Section root(j, "");
    root.allow({"windowing", "vad", "spectral", "dbscan", "hmm", "der", "norm", "paths"});

    if (root.has("windowing")) {
        const Section s(root.at("windowing"), "windowing");
        s.allow({"max_window_s", "gap_threshold_s", "pad_s"});
        s.get("max_window_s", cfg.windowing.max_window_s);
        s.get("gap_threshold_s", cfg.windowing.gap_threshold_s);
        s.get("pad_s", cfg.windowing.pad_s);
    }
    if (root.has("vad")) {
        const Section s(root.at("vad"), "vad");
        s.allow({"frame_ms", "hop_ms", "energy_percentile", "threshold_db_above_floor",
                 "min_speech_ms", "min_silence_ms", "speech_pad_ms"});
        s.get("frame_ms", cfg.vad.frame_ms);
        s.get("hop_ms", cfg.vad.hop_ms);
        s.get("energy_percentile", cfg.vad.energy_percentile);
        s.get("threshold_db_above_floor", cfg.vad.threshold_db_above_floor);
        s.get("min_speech_ms", cfg.vad.min_speech_ms);
        s.get("min_silence_ms", cfg.vad.min_silence_ms);
        s.get("speech_pad_ms", cfg.vad.speech_pad_ms);
    }
    if (root.has("spectral")) {
        const Section s(root.at("spectral"), "spectral");
        s.allow({"k_min", "k_max", "binarize_p", "kmeans_restarts", "seed", "max_kmeans_iters"});
        s.get("k_min", cfg.spectral.k_min);
        s.get("k_max", cfg.spectral.k_max);
        s.get("binarize_p", cfg.spectral.binarize_p);
        s.get("kmeans_restarts", cfg.spectral.kmeans_restarts);
        s.get("seed", cfg.spectral.seed);
        s.get("max_kmeans_iters", cfg.spectral.max_kmeans_iters);
    }
    if (root.has("dbscan")) {
        const Section s(root.at("dbscan"), "dbscan");
        s.allow({"eps", "min_samples", "noise_policy"});
        s.get("eps", cfg.dbscan.eps);
        s.get("min_samples", cfg.dbscan.min_samples);
        std::string policy = noise_policy_name(cfg.dbscan.noise_policy);
        s.get("noise_policy", policy);
        if (policy == "nearest_cluster") {
            cfg.dbscan.noise_policy = NoisePolicy::nearest_cluster;
        } else if (policy == "own_cluster") {
            cfg.dbscan.noise_policy = NoisePolicy::own_cluster;
        } else {
            throw ValidationError("config: dbscan.noise_policy must be nearest_cluster or own_cluster");
        }
    }
    if (root.has("hmm")) {
        const Section s(root.at("hmm"), "hmm");
        s.allow({"loop_prob", "emission_scale", "max_iters"});
        s.get("loop_prob", cfg.hmm.loop_prob);
        s.get("emission_scale", cfg.hmm.emission_scale);
        s.get("max_iters", cfg.hmm.max_iters);
    }
    if (root.has("der")) {
        const Section s(root.at("der"), "der");
        s.allow({"collar_s", "score_overlap"});
        s.get("collar_s", cfg.der.collar_s);
        s.get("score_overlap", cfg.der.score_overlap);
    }
    if (root.has("norm")) {
        const Section s(root.at("norm"), "norm");
        s.allow({"apply_nfc", "strip_zero_width", "collapse_whitespace", "zero_width_set"});
        s.get("apply_nfc", cfg.norm.apply_nfc);
        s.get("strip_zero_width", cfg.norm.strip_zero_width);
        s.get("collapse_whitespace", cfg.norm.collapse_whitespace);
        if (s.has("zero_width_set")) {
            const json& arr = s.at("zero_width_set");
            if (!arr.is_array()) throw ValidationError("config: norm.zero_width_set must be an array");
            cfg.norm.zero_width_set.clear();
            for (const auto& e : arr) {
                if (!e.is_string()) {
                    throw ValidationError("config: norm.zero_width_set entries must be strings");
                }
                cfg.norm.zero_width_set.insert(parse_codepoint(e.get<std::string>(), "norm.zero_width_set"));
            }
        }
    }
    if (root.has("paths")) {
        const Section s(root.at("paths"), "paths");
        s.allow({"input_dir", "output_dir"});
        s.get("input_dir", cfg.paths.input_dir);
        s.get("output_dir", cfg.paths.output_dir);
    }
    validate(cfg);
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::string config_hash(const PipelineConfig& cfg) { return sha256_hex(config_to_json(cfg).dump()); }

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

std::filesystem::path resolve_input(const PipelineConfig& cfg, const std::filesystem::path& p) {
    if (p.is_absolute() || cfg.paths.input_dir.empty()) return p;
    return std::filesystem::path(cfg.paths.input_dir) / p;
}

std::filesystem::path resolve_output(const PipelineConfig& cfg, const std::filesystem::path& p) {
    if (p.is_absolute() || cfg.paths.output_dir.empty()) return p;
    return std::filesystem::path(cfg.paths.output_dir) / p;
}

// --- manifest ------------------------------------------------------------

void RunManifest::add_input(const std::filesystem::path& p) {
    inputs.emplace_back(p.string(), sha256_file(p));
}

ordered_json RunManifest::to_json() const {
    ordered_json j;
    j["tool_version"] = tool_version;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["inputs"] = ordered_json::array();
    for (const auto& [path, digest] : inputs) j["inputs"].push_back({{"path", path}, {"sha256", digest}});
    j["stages"] = ordered_json::array();
    for (const auto& [name, secs] : stages) j["stages"].push_back({{"name", name}, {"seconds", secs}});
    j["outputs"] = outputs;
    return j;
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
    return std::filesystem::path(output.string() + ".manifest.json");
}

void write_outputs(RunManifest manifest,
                   const std::vector<std::pair<std::filesystem::path, std::string>>& files) {
    manifest.outputs.clear();
    for (const auto& [path, content] : files) manifest.outputs.push_back(path.string());
    for (const auto& [path, content] : files) {
        if (path.has_parent_path()) {
            std::error_code ec;
            std::filesystem::create_directories(path.parent_path(), ec);
            if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
        }
        write_file_atomic(path, content);
    }
    const std::string m = manifest.to_json().dump(2) + "\n";
    for (const auto& [path, content] : files) write_file_atomic(manifest_path(path), m);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// --- subcommands ---------------------------------------------------------

TranscriptSet cmd_window(const std::filesystem::path& input, const PipelineConfig& cfg,
                         RunManifest* manifest) {
    RunManifest scratch;
    RunManifest& m = manifest ? *manifest : scratch;

    char magic[4] = {};
    {
        std::ifstream in(input, std::ios::binary);
        if (!in) throw IoError("cannot open " + input.string());
        in.read(magic, sizeof magic);
    }

    std::vector<SpeechRegion> regions;
    double duration = 0.0;
    TranscriptSet out;
    if (std::string_view(magic, 4) == "RIFF") {
        const Waveform w = m.time_stage("load", [&] { return load_wav(input, input.stem().string()); });
        regions = m.time_stage("vad", [&] { return energy_vad(w, cfg.vad); });
        duration = w.duration();
        out.audio_id = w.audio_id;
    } else {
        const SegmentsFile seg = m.time_stage("load", [&] { return read_segments_json(input); });
        regions = seg.regions;
        duration = seg.meta.duration;
        out.audio_id = seg.meta.audio_id;
    }
    const auto windows = m.time_stage("windowing", [&] {
        return build_windows(std::move(regions), duration, cfg.windowing);
    });
    for (const auto& w : windows) out.windows.push_back({w, ""});
    return out;
}

DiarizeMethod parse_method(std::string_view name) {
    if (name == "spectral") return DiarizeMethod::spectral;
    if (name == "dbscan") return DiarizeMethod::dbscan;
    if (name == "plda-spectral") return DiarizeMethod::plda_spectral;
    throw UsageError("unknown method '" + std::string(name) +
                     "' (expected spectral, dbscan or plda-spectral)");
}

Refinement parse_refinement(std::string_view name) {
    if (name.empty() || name == "none") return Refinement::none;
    if (name == "vbx-lite") return Refinement::vbx_lite;
    throw UsageError("unknown refinement '" + std::string(name) + "' (expected none or vbx-lite)");
}

Diarization cmd_diarize(const EmbeddingSet& set, DiarizeMethod method, Refinement refine,
                        const PldaModel* plda, const PipelineConfig& cfg, RunManifest* manifest,
                        const WarningSink& warn) {
    if (method == DiarizeMethod::plda_spectral && plda == nullptr) {
        throw UsageError("method plda-spectral requires a PLDA training file");
    }
    if (set.empty()) return Diarization{set.audio_id, {}};
    validate(set);

    RunManifest scratch;
    RunManifest& m = manifest ? *manifest : scratch;
    const std::string tag = set.audio_id.empty() ? "" : set.audio_id + ":";

    const AffinityMatrix a = m.time_stage(tag + "affinity", [&] {
        return method == DiarizeMethod::plda_spectral ? plda_affinity(set, *plda) : cosine_affinity(set);
    });
    std::vector<int> labels = m.time_stage(tag + "clustering", [&] {
        return method == DiarizeMethod::dbscan ? dbscan_cluster(a, cfg.dbscan)
                                               : spectral_cluster(a, cfg.spectral, warn).labels;
    });
    if (refine == Refinement::vbx_lite) {
        labels = m.time_stage(tag + "refine", [&] {
            return canonical_labels(viterbi_resegment(set, labels, cfg.hmm));
        });
    }
    return labels_to_diarization(set, labels);
}

std::string cmd_finalize(const TranscriptSet& set, const NormConfig& cfg) {
    std::vector<const WindowTranscript*> order;
    for (const auto& w : set.windows) order.push_back(&w);
    std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        return a->window.core_start < b->window.core_start;
    });
    std::string joined;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0) joined.push_back(' ');
        joined += order[i]->text;
    }
    return normalize(joined, cfg);
}

WerReport score_wer_text(std::string_view ref_text, std::string_view hyp_text,
                         const NormConfig& cfg) {
    const auto ref_lines = split_lines(ref_text);
    const auto hyp_lines = split_lines(hyp_text);
    if (ref_lines.size() != hyp_lines.size()) {
        throw ValidationError("score-wer: reference has " + std::to_string(ref_lines.size()) +
                              " lines but hypothesis has " + std::to_string(hyp_lines.size()));
    }
    std::vector<WerReport> reports;
    reports.reserve(ref_lines.size());
    for (std::size_t i = 0; i < ref_lines.size(); ++i) {
        reports.push_back(wer(tokenize_words(normalize(ref_lines[i], cfg)),
                              tokenize_words(normalize(hyp_lines[i], cfg))));
    }
    return pool(reports);
}

DerReport score_der_multi(const std::map<std::string, Diarization>& ref,
                          const std::map<std::string, Diarization>& hyp, const DerConfig& cfg,
                          const WarningSink& warn) {
    if (ref.empty()) throw ValidationError("score-der: reference has no recordings");
    for (const auto& [id, d] : hyp) {
        if (ref.count(id) == 0) emit_warning(warn, "score-der: hypothesis recording " + id + " not in reference; ignored");
    }
    std::vector<DerReport> reports;
    for (const auto& [id, r] : ref) {
        const auto it = hyp.find(id);
        reports.push_back(der(r, it == hyp.end() ? Diarization{id, {}} : it->second, cfg));
    }
    return pool(reports);
}

ordered_json to_json(const WerReport& r) {
    ordered_json j;
    j["wer"] = r.undefined ? ordered_json(nullptr) : ordered_json(r.wer);
    j["undefined"] = r.undefined;
    j["substitutions"] = r.substitutions;
    j["deletions"] = r.deletions;
    j["insertions"] = r.insertions;
    j["ref_words"] = r.ref_words;
    return j;
}

ordered_json to_json(const DerReport& r) {
    ordered_json j;
    j["der"] = r.der;
    j["missed"] = r.missed;
    j["false_alarm"] = r.false_alarm;
    j["confusion"] = r.confusion;
    j["total_ref_speech"] = r.total_ref_speech;
    j["collar_s"] = r.collar_s;
    j["score_overlap"] = r.score_overlap;
    return j;
}

std::string normalize_lines(std::string_view text, const NormConfig& cfg) {
    std::string out;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += normalize(lines[i], cfg);
    }
    if (!text.empty() && text.back() == '\n') out.push_back('\n');
    return out;
}

} // namespace lsk
