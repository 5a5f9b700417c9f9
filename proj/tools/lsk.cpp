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


// lsk: command-line front end. Exit codes: 0 success, 1 invalid input,
// 2 I/O or usage error.

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "lsk/pipeline.hpp"
#include "lsk/simulator.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitInvalid = 1;
constexpr int kExitUsage = 2;

struct Globals {
    std::string config;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
};

std::uint64_t parse_seed_env(const char* text) {
    std::uint64_t v = 0;
    const std::string_view s(text);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw lsk::UsageError("LSK_SEED must be a non-negative integer, got '" + std::string(s) + "'");
    }
    return v;
}

// flag > LSK_SEED > config file > default
lsk::PipelineConfig resolve_config(const Globals& g) {
    lsk::PipelineConfig cfg = g.config.empty() ? lsk::PipelineConfig{} : lsk::load_config(g.config);
    if (const char* env = std::getenv("LSK_SEED"); env != nullptr && *env != '\0') {
        cfg.spectral.seed = parse_seed_env(env);
    }
    if (g.seed) cfg.spectral.seed = *g.seed;
    return cfg;
}

lsk::RunManifest start_manifest(const std::string& command, const lsk::PipelineConfig& cfg) {
    lsk::RunManifest m;
    m.command = command;
    m.config_hash = lsk::config_hash(cfg);
    return m;
}

std::string read_stream_or_file(const std::string& path) {
    if (path == "-") {
        return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    }
    return lsk::read_text_file(path);
}

int run_window(const Globals& g, const std::vector<std::string>& inputs, const std::string& out,
               const std::string& out_dir) {
    if (out.empty() == out_dir.empty()) throw lsk::UsageError("window: give exactly one of --out or --out-dir");
    if (!out.empty() && inputs.size() != 1) throw lsk::UsageError("window: --out takes a single input; use --out-dir");
    const auto cfg = resolve_config(g);

    std::vector<std::string> results(inputs.size());
    std::vector<lsk::RunManifest> manifests(inputs.size(), start_manifest("window", cfg));
    std::vector<std::string> ids(inputs.size());
    lsk::parallel_for(inputs.size(), g.jobs, [&](std::size_t i) {
        const fs::path in = lsk::resolve_input(cfg, inputs[i]);
        manifests[i].add_input(in);
        const auto set = lsk::cmd_window(in, cfg, &manifests[i]);
        ids[i] = set.audio_id;
        results[i] = lsk::format_transcripts_json(set);
    });
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const fs::path target = out.empty()
            ? lsk::resolve_output(cfg, fs::path(out_dir) / (ids[i] + ".windows.json"))
            : lsk::resolve_output(cfg, out);
        lsk::write_outputs(manifests[i], {{target, results[i]}});
    }
    return 0;
}

int run_diarize(const Globals& g, const std::vector<std::string>& inputs, const std::string& method_name,
                const std::string& refine_name, const std::string& plda_train, const std::string& out) {
    const auto method = lsk::parse_method(method_name);
    const auto refine = lsk::parse_refinement(refine_name);
    if (method == lsk::DiarizeMethod::plda_spectral && plda_train.empty()) {
        throw lsk::UsageError("diarize: --method plda-spectral requires --plda-train");
    }
    const auto cfg = resolve_config(g);
    auto manifest = start_manifest("diarize", cfg);

    std::optional<lsk::PldaModel> plda;
    if (!plda_train.empty()) {
        const fs::path p = lsk::resolve_input(cfg, plda_train);
        manifest.add_input(p);
        const auto labeled = lsk::read_labeled_embeddings_json(p);
        plda = manifest.time_stage("plda_fit", [&] { return lsk::plda_fit(labeled.samples); });
    }

    std::vector<fs::path> paths;
    for (const auto& in : inputs) {
        paths.push_back(lsk::resolve_input(cfg, in));
        manifest.add_input(paths.back());
    }
    std::vector<std::string> rttm(inputs.size());
    std::vector<lsk::RunManifest> stage_logs(inputs.size());
    lsk::parallel_for(inputs.size(), g.jobs, [&](std::size_t i) {
        const auto set = lsk::read_embeddings_json(paths[i]);
        const auto d = lsk::cmd_diarize(set, method, refine, plda ? &*plda : nullptr, cfg, &stage_logs[i]);
        rttm[i] = lsk::format_rttm(d);
    });
    std::string all;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        all += rttm[i];
        for (auto& s : stage_logs[i].stages) manifest.stages.push_back(std::move(s));
    }
    lsk::write_outputs(manifest, {{lsk::resolve_output(cfg, out), all}});
    return 0;
}

void emit(const lsk::RunManifest& manifest, const lsk::PipelineConfig& cfg, const std::string& out,
          const std::string& content) {
    if (out.empty() || out == "-") {
        std::cout << content << std::flush;
    } else {
        lsk::write_outputs(manifest, {{lsk::resolve_output(cfg, out), content}});
    }
}

int run_finalize(const Globals& g, const std::vector<std::string>& inputs, const std::string& out) {
    const auto cfg = resolve_config(g);
    auto manifest = start_manifest("finalize", cfg);
    std::vector<std::string> lines(inputs.size());
    std::vector<fs::path> paths;
    for (const auto& in : inputs) {
        paths.push_back(lsk::resolve_input(cfg, in));
        manifest.add_input(paths.back());
    }
    lsk::parallel_for(inputs.size(), g.jobs, [&](std::size_t i) {
        lines[i] = lsk::cmd_finalize(lsk::read_transcripts_json(paths[i]), cfg.norm);
    });
    std::string content;
    for (const auto& l : lines) content += l + "\n";
    emit(manifest, cfg, out, content);
    return 0;
}

int run_normalize(const Globals& g, const std::string& in, const std::string& out) {
    const auto cfg = resolve_config(g);
    auto manifest = start_manifest("normalize", cfg);
    const fs::path src = in == "-" ? fs::path("-") : lsk::resolve_input(cfg, in);
    if (in != "-") manifest.add_input(src);
    const std::string text = read_stream_or_file(src.string());
    emit(manifest, cfg, out, lsk::normalize_lines(text, cfg.norm));
    return 0;
}

int run_score_wer(const Globals& g, const std::string& ref, const std::string& hyp, const std::string& out) {
    const auto cfg = resolve_config(g);
    auto manifest = start_manifest("score-wer", cfg);
    const fs::path r = lsk::resolve_input(cfg, ref), h = lsk::resolve_input(cfg, hyp);
    manifest.add_input(r);
    manifest.add_input(h);
    const auto report = manifest.time_stage("wer", [&] {
        return lsk::score_wer_text(lsk::read_text_file(r), lsk::read_text_file(h), cfg.norm);
    });
    emit(manifest, cfg, out, lsk::to_json(report).dump(2) + "\n");
    return 0;
}

int run_score_der(const Globals& g, const std::string& ref, const std::string& hyp,
                  std::optional<double> collar, bool no_overlap, const std::string& out) {
    auto cfg = resolve_config(g);
    if (collar) cfg.der.collar_s = *collar;
    if (no_overlap) cfg.der.score_overlap = false;
    lsk::validate(cfg.der);
    auto manifest = start_manifest("score-der", cfg);
    const fs::path r = lsk::resolve_input(cfg, ref), h = lsk::resolve_input(cfg, hyp);
    manifest.add_input(r);
    manifest.add_input(h);
    const auto report = manifest.time_stage("der", [&] {
        return lsk::score_der_multi(lsk::read_rttm_multi(r), lsk::read_rttm_multi(h), cfg.der);
    });
    emit(manifest, cfg, out, lsk::to_json(report).dump(2) + "\n");
    return 0;
}

int run_simulate(const Globals& g, const std::string& preset, const std::string& out_dir) {
    const auto cfg = resolve_config(g);
    auto manifest = start_manifest("simulate", cfg);
    const auto sim_cfg = lsk::sim_preset(preset, cfg.spectral.seed);
    const auto sim = manifest.time_stage("simulate", [&] { return lsk::simulate(sim_cfg); });
    const fs::path dir = lsk::resolve_output(cfg, out_dir);
    const std::string& id = sim.ref.audio_id;
    lsk::AudioMeta meta;
    meta.audio_id = id;
    meta.duration = sim_cfg.duration_s;
    lsk::write_outputs(manifest, {
        {dir / (id + ".segments.json"), lsk::format_segments_json(meta, sim.regions)},
        {dir / (id + ".embeddings.json"), lsk::format_embeddings_json(sim.embeddings)},
        {dir / (id + ".ref.rttm"), lsk::format_rttm(sim.ref)},
    });
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lsk: long-form speech toolkit (windowing, diarization, scoring)"};
    app.set_version_flag("--version", std::string(lsk::kToolVersion));
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config, "pipeline configuration JSON");
    app.add_option("--jobs,-j", g.jobs, "recordings processed in parallel")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "random seed (overrides LSK_SEED and the config file)");

    std::vector<std::string> inputs;
    std::string out, out_dir, method = "spectral", refine = "none", plda_train, ref, hyp, in = "-";
    std::string preset = "easy";
    std::optional<double> collar;
    bool no_overlap = false;

    auto* window = app.add_subcommand("window", "build decoding-window skeletons from WAV or Segments-JSON");
    window->add_option("inputs", inputs, "WAV or Segments-JSON files")->required();
    window->add_option("--out,-o", out, "output Transcripts-JSON (single input)");
    window->add_option("--out-dir", out_dir, "directory for <audio_id>.windows.json");

    auto* diarize = app.add_subcommand("diarize", "assign speakers to embedded segments");
    diarize->add_option("--embeddings,-e", inputs, "Embeddings-JSON files")->required();
    diarize->add_option("--method", method, "spectral | dbscan | plda-spectral");
    diarize->add_option("--refine", refine, "none | vbx-lite");
    diarize->add_option("--plda-train", plda_train, "labelled Embeddings-JSON for PLDA");
    diarize->add_option("--out,-o", out, "output RTTM")->required();

    auto* finalize = app.add_subcommand("finalize", "join filled windows into one normalized line per recording");
    finalize->add_option("inputs", inputs, "filled Transcripts-JSON files")->required();
    finalize->add_option("--out,-o", out, "output text file (default stdout)");

    auto* normalize = app.add_subcommand("normalize", "normalize text line by line");
    normalize->add_option("--in,-i", in, "input file or - for stdin");
    normalize->add_option("--out,-o", out, "output file or - for stdout");

    auto* score_wer = app.add_subcommand("score-wer", "word error rate over line-aligned text files");
    score_wer->add_option("ref,--ref", ref, "reference text")->required();
    score_wer->add_option("hyp,--hyp", hyp, "hypothesis text")->required();
    score_wer->add_option("--out,-o", out, "JSON report file (default stdout)");

    auto* score_der = app.add_subcommand("score-der", "diarization error rate over RTTM files");
    score_der->add_option("ref,--ref", ref, "reference RTTM")->required();
    score_der->add_option("hyp,--hyp", hyp, "hypothesis RTTM")->required();
    score_der->add_option("--collar", collar, "forgiveness collar in seconds");
    score_der->add_flag("--no-score-overlap", no_overlap, "skip reference overlap regions");
    score_der->add_option("--out,-o", out, "JSON report file (default stdout)");

    auto* simulate = app.add_subcommand("simulate", "write a synthetic conversation");
    simulate->add_option("--preset", preset, "easy | hard");
    simulate->add_option("--out-dir", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (window->parsed()) return run_window(g, inputs, out, out_dir);
        if (diarize->parsed()) return run_diarize(g, inputs, method, refine, plda_train, out);
        if (finalize->parsed()) return run_finalize(g, inputs, out);
        if (normalize->parsed()) return run_normalize(g, in, out);
        if (score_wer->parsed()) return run_score_wer(g, ref, hyp, out);
        if (score_der->parsed()) return run_score_der(g, ref, hyp, collar, no_overlap, out);
        if (simulate->parsed()) return run_simulate(g, preset, out_dir);
    } catch (const lsk::IoError& e) {
        std::cerr << "lsk: " << e.what() << "\n";
        return kExitUsage;
    } catch (const lsk::UsageError& e) {
        std::cerr << "lsk: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "lsk: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitUsage;
}
