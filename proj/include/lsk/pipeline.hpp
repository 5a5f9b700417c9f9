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


// Stage orchestration behind the lsk command line: configuration loading,
// run manifests and the per-subcommand operations.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lsk/audio.hpp"
#include "lsk/clustering.hpp"
#include "lsk/interchange.hpp"
#include "lsk/metrics.hpp"
#include "lsk/resegment.hpp"
#include "lsk/textnorm.hpp"
#include "lsk/windowing.hpp"

namespace lsk {

inline constexpr std::string_view kToolVersion = "0.3.0";

struct PathsConfig {
    std::string input_dir;   // relative inputs resolve here when set
    std::string output_dir;  // relative outputs resolve here when set
};

struct PipelineConfig {
    WindowingConfig windowing;
    VadConfig vad;
    SpectralConfig spectral;
    DbscanConfig dbscan;
    HmmConfig hmm;
    DerConfig der;
    NormConfig norm;
    PathsConfig paths;
};

void validate(const PipelineConfig& cfg);

nlohmann::json config_to_json(const PipelineConfig& cfg);

/// Missing keys keep their defaults. Unknown keys and wrongly typed values
/// throw ValidationError naming the offending key path.
PipelineConfig config_from_json(const nlohmann::json& j);

PipelineConfig load_config(const std::filesystem::path& path);

/// SHA-256 (hex) of the canonical serialization: sorted keys, no
/// whitespace, every field present.
std::string config_hash(const PipelineConfig& cfg);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::filesystem::path resolve_input(const PipelineConfig& cfg, const std::filesystem::path& p);
std::filesystem::path resolve_output(const PipelineConfig& cfg, const std::filesystem::path& p);

/// Provenance record written next to each output as <output>.manifest.json.
struct RunManifest {
    std::string tool_version{kToolVersion};
    std::string command;
    std::string config_hash;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
    std::vector<std::pair<std::string, double>> stages;      // name, seconds
    std::vector<std::string> outputs;

    void add_input(const std::filesystem::path& p);

    template <class F>
    decltype(auto) time_stage(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        struct Record {
            RunManifest* m;
            const std::string& name;
            std::chrono::steady_clock::time_point t0;
            ~Record() {
                const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
                m->stages.emplace_back(name, dt.count());
            }
        } record{this, name, t0};
        return std::forward<F>(f)();
    }

    nlohmann::ordered_json to_json() const;
};

std::filesystem::path manifest_path(const std::filesystem::path& output);

/// Writes `content` to each output atomically, then one manifest per output.
void write_outputs(RunManifest manifest,
                   const std::vector<std::pair<std::filesystem::path, std::string>>& files);

/// Runs fn(0..n-1) on at most `jobs` threads. Rethrows the exception of the
/// lowest failing index after all work finishes.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// --- subcommand operations -----------------------------------------------

/// Window skeleton for a WAV file (energy VAD first) or a Segments-JSON
/// file. Texts are left empty for an external decoder to fill.
TranscriptSet cmd_window(const std::filesystem::path& input, const PipelineConfig& cfg,
                         RunManifest* manifest = nullptr);

enum class DiarizeMethod { spectral, dbscan, plda_spectral };
enum class Refinement { none, vbx_lite };

DiarizeMethod parse_method(std::string_view name);
Refinement parse_refinement(std::string_view name);

/// Speaker labels for one recording. plda may be null unless method is
/// plda_spectral. An empty set gives an empty Diarization.
Diarization cmd_diarize(const EmbeddingSet& set, DiarizeMethod method, Refinement refine,
                        const PldaModel* plda, const PipelineConfig& cfg,
                        RunManifest* manifest = nullptr, const WarningSink& warn = {});

/// Window texts joined by one space in core_start order, then normalized.
std::string cmd_finalize(const TranscriptSet& set, const NormConfig& cfg);

/// Line-aligned scoring; line i of ref is compared with line i of hyp after
/// normalization. A trailing newline does not count as an extra line.
WerReport score_wer_text(std::string_view ref_text, std::string_view hyp_text,
                         const NormConfig& cfg);

/// Pools DER over the recordings of `ref`. A recording absent from `hyp`
/// scores as all missed; hypothesis-only recordings are reported via warn.
DerReport score_der_multi(const std::map<std::string, Diarization>& ref,
                          const std::map<std::string, Diarization>& hyp, const DerConfig& cfg,
                          const WarningSink& warn = {});

nlohmann::ordered_json to_json(const WerReport& r);
nlohmann::ordered_json to_json(const DerReport& r);

/// Per-line normalization of a text stream; line structure is preserved.
std::string normalize_lines(std::string_view text, const NormConfig& cfg);

} // namespace lsk
