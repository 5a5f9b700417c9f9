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

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

#include "lsk/pipeline.hpp"
#include "lsk/simulator.hpp"
#include "test_support.hpp"

using namespace lsk;
using lsk::testing::TempDir;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + std::string(LSK_CLI_PATH) + " " + args +
                            " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string capture_cli(const std::string& args) {
    const std::string cmd = std::string(LSK_CLI_PATH) + " " + args + " 2>/dev/null";
    std::string out;
    if (FILE* p = ::popen(cmd.c_str(), "r")) {
        char buf[4096];
        std::size_t n = 0;
        while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
        ::pclose(p);
    }
    return out;
}

void write(const fs::path& p, const std::string& s) { write_file_atomic(p, s); }

} // namespace

TEST(Config, DefaultsRoundTrip) {
    const PipelineConfig cfg;
    const auto back = config_from_json(config_to_json(cfg));
    EXPECT_EQ(config_to_json(back), config_to_json(cfg));
    EXPECT_EQ(config_hash(back), config_hash(cfg));
}

TEST(Config, PartialFileKeepsDefaults) {
    const auto cfg = config_from_json(nlohmann::json::parse(R"({"spectral":{"seed":9},"der":{"collar_s":0}})"));
    EXPECT_EQ(cfg.spectral.seed, 9u);
    EXPECT_EQ(cfg.spectral.k_max, 8);
    EXPECT_EQ(cfg.der.collar_s, 0.0);
    EXPECT_EQ(cfg.windowing.max_window_s, 20.0);
}

TEST(Config, UnknownKeysRejected) {
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"spectrall":{}})")), ValidationError);
    try {
        config_from_json(nlohmann::json::parse(R"({"hmm":{"loop_prob":0.8,"loops":2}})"));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("hmm.loops"), std::string::npos);
    }
}

TEST(Config, TypesAndRangesChecked) {
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"spectral":{"k_max":"8"}})")), ValidationError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"spectral":{"seed":-1}})")), ValidationError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"hmm":{"loop_prob":1.5}})")), ValidationError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"dbscan":{"noise_policy":"drop"}})")), ValidationError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"norm":{"zero_width_set":["200B"]}})")), ValidationError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"([1,2])")), ValidationError);
    const auto cfg = config_from_json(nlohmann::json::parse(R"({"norm":{"zero_width_set":["U+200B","U+2060"]}})"));
    EXPECT_EQ(cfg.norm.zero_width_set, (std::set<char32_t>{0x200B, 0x2060}));
}

TEST(Config, HashStableUnderKeyReordering) {
    const auto a = config_from_json(nlohmann::json::parse(R"({"der":{"collar_s":0.1,"score_overlap":false},"hmm":{"max_iters":3}})"));
    const auto b = config_from_json(nlohmann::json::parse(R"({"hmm":{"max_iters":3},"der":{"score_overlap":false,"collar_s":0.1}})"));
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash(PipelineConfig{}));
    EXPECT_EQ(config_hash(a).size(), 64u);
}

TEST(Config, LoadErrors) {
    TempDir dir;
    write(dir / "bad.json", "{oops");
    EXPECT_THROW(load_config(dir / "bad.json"), ParseError);
    EXPECT_THROW(load_config(dir / "missing.json"), IoError);
}

TEST(Sha256, KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(ParallelFor, RunsEverythingAndRethrowsLowestFailure) {
    std::vector<int> hit(50, 0);
    parallel_for(hit.size(), 4, [&](std::size_t i) { hit[i] = 1; });
    EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 50);
    try {
        parallel_for(10, 3, [](std::size_t i) {
            if (i == 7 || i == 4) throw ValidationError("fail " + std::to_string(i));
        });
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_STREQ(e.what(), "fail 4");
    }
}

TEST(Window, SegmentsMerge) {
    TempDir dir;
    write(dir / "s.json",
          R"({"audio_id":"rec","sample_rate":16000,"duration":30,"regions":[{"start":0,"end":8},{"start":9,"end":18}]})");
    const auto t = cmd_window(dir / "s.json", PipelineConfig{});
    EXPECT_EQ(t.audio_id, "rec");
    ASSERT_EQ(t.windows.size(), 1u);
    EXPECT_EQ(t.windows[0].window.end, 19.0);
    EXPECT_EQ(t.windows[0].text, "");
}

TEST(Window, SilentWavHasNoWindows) {
    TempDir dir;
    write_wav_pcm16(dir / "quiet.wav", std::vector<float>(16000 * 3, 0.0f), 16000);
    const auto t = cmd_window(dir / "quiet.wav", PipelineConfig{});
    EXPECT_EQ(t.audio_id, "quiet");
    EXPECT_TRUE(t.windows.empty());
}

TEST(Window, ToneWavGetsWindow) {
    TempDir dir;
    Rng rng(1);
    const auto w = lsk::testing::tone_burst_signal(rng, 8.0, {{2.0, 4.0}});
    write_wav_pcm16(dir / "tone.wav", w.samples, 16000);
    RunManifest m;
    const auto t = cmd_window(dir / "tone.wav", PipelineConfig{}, &m);
    ASSERT_EQ(t.windows.size(), 1u);
    EXPECT_NEAR(t.windows[0].window.core_start, 1.9, 0.011);
    EXPECT_EQ(m.stages.size(), 3u);
}

TEST(Finalize, JoinRule) {
    TranscriptSet t{"rec", {{{10, 13, 11, 12, {}}, "ভালো"}, {{0, 5, 0, 4, {}}, "আমি"}}};
    EXPECT_EQ(cmd_finalize(t, {}), "আমি ভালো");
    TranscriptSet empty{"rec", {{{0, 5, 0, 4, {}}, ""}, {{10, 13, 11, 12, {}}, ""}}};
    EXPECT_EQ(cmd_finalize(empty, {}), "");
    TranscriptSet zw{"rec", {{{0, 5, 0, 4, {}}, "আ​মি "}, {{10, 13, 11, 12, {}}, "‍"}}};
    EXPECT_EQ(cmd_finalize(zw, {}), "আমি");
}

TEST(Diarize, MethodsAndErrors) {
    const auto sim = simulate(sim_preset("easy", 1));
    const PipelineConfig cfg;
    EXPECT_LE(der(sim.ref, cmd_diarize(sim.embeddings, DiarizeMethod::spectral, Refinement::none, nullptr, cfg)).der,
              0.05);
    // eps 0.35 chains clusters whose centroids sit 0.5 apart, so only validity is checked here
    EXPECT_NO_THROW(validate(cmd_diarize(sim.embeddings, DiarizeMethod::dbscan, Refinement::none, nullptr, cfg)));
    EXPECT_THROW(cmd_diarize(sim.embeddings, DiarizeMethod::plda_spectral, Refinement::none, nullptr, cfg),
                 UsageError);
    EXPECT_THROW(parse_method("kmeans"), UsageError);
    EXPECT_THROW(parse_refinement("vbx"), UsageError);
    EXPECT_TRUE(cmd_diarize(EmbeddingSet{"x", 3, {}}, DiarizeMethod::spectral, Refinement::none, nullptr, cfg)
                    .turns.empty());
}

TEST(Diarize, PldaSpectralWithTrainingData) {
    std::vector<std::pair<std::vector<double>, std::string>> train;
    for (std::uint64_t s = 100; s < 110; ++s) {
        const auto sim = simulate(sim_preset("easy", s));
        std::map<int, int> count;
        for (int l : sim.labels) ++count[l];
        for (std::size_t i = 0; i < sim.embeddings.size(); ++i) {
            if (count[sim.labels[i]] < 2) continue;
            train.push_back({sim.embeddings.entries[i].vector,
                             std::to_string(s) + "_" + std::to_string(sim.labels[i])});
        }
    }
    const auto model = plda_fit(train);
    const auto sim = simulate(sim_preset("easy", 2));
    const auto hyp = cmd_diarize(sim.embeddings, DiarizeMethod::plda_spectral, Refinement::none, &model,
                                 PipelineConfig{});
    EXPECT_NO_THROW(validate(hyp));
    EXPECT_FALSE(hyp.turns.empty());
}

TEST(Diarize, EasyPresetWithAndWithoutRefinement) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto sim = simulate(sim_preset("easy", seed));
        const PipelineConfig cfg;
        const double plain = der(sim.ref, cmd_diarize(sim.embeddings, DiarizeMethod::spectral, Refinement::none, nullptr, cfg)).der;
        const double refined = der(sim.ref, cmd_diarize(sim.embeddings, DiarizeMethod::spectral, Refinement::vbx_lite, nullptr, cfg)).der;
        EXPECT_LE(plain, 0.05);
        EXPECT_LE(refined, plain + 0.01);
    }
}

TEST(Score, WerLinesAndDerMulti) {
    const auto w = score_wer_text("a b c\nd e\n", "a x c\nd e\n", {});
    EXPECT_EQ(w.ref_words, 5u);
    EXPECT_EQ(w.substitutions, 1u);
    EXPECT_THROW(score_wer_text("a\nb\n", "a\n", {}), ValidationError);
    EXPECT_EQ(score_wer_text("a  b\r\n", "a​ b", {}).wer, 0.0);

    std::map<std::string, Diarization> ref{{"r1", {"r1", {{0, 10, "A"}}}}, {"r2", {"r2", {{0, 10, "B"}}}}};
    std::map<std::string, Diarization> hyp{{"r1", {"r1", {{0, 10, "X"}}}}, {"zz", {"zz", {{0, 1, "Q"}}}}};
    std::vector<std::string> warnings;
    DerConfig cfg;
    cfg.collar_s = 0;
    const auto d = score_der_multi(ref, hyp, cfg, [&](std::string_view m) { warnings.emplace_back(m); });
    EXPECT_NEAR(d.der, 0.5, 1e-12);
    EXPECT_EQ(warnings.size(), 1u);
}

TEST(NormalizeLines, KeepsLineStructure) {
    EXPECT_EQ(normalize_lines("  a  b\n\nc​\n", {}), "a b\n\nc\n");
    EXPECT_EQ(normalize_lines("x", {}), "x");
    EXPECT_EQ(normalize_lines("", {}), "");
}

TEST(Manifest, WrittenNextToOutputs) {
    TempDir dir;
    write(dir / "in.txt", "abc");
    RunManifest m;
    m.command = "test";
    m.config_hash = config_hash(PipelineConfig{});
    m.add_input(dir / "in.txt");
    m.time_stage("noop", [] {});
    write_outputs(m, {{dir / "sub" / "out.txt", "hello"}});
    EXPECT_EQ(read_text_file(dir / "sub" / "out.txt"), "hello");
    const auto j = nlohmann::json::parse(read_text_file(dir / "sub" / "out.txt.manifest.json"));
    EXPECT_EQ(j["config_hash"], m.config_hash);
    EXPECT_EQ(j["inputs"][0]["sha256"], sha256_hex("abc"));
    EXPECT_EQ(j["stages"][0]["name"], "noop");
    EXPECT_EQ(j["outputs"][0], (dir / "sub" / "out.txt").string());
    EXPECT_EQ(j["tool_version"], std::string(kToolVersion));
}

TEST(Cli, ExitCodes) {
    TempDir dir;
    const std::string d = dir.path().string();
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli("window " + d + "/missing.json -o " + d + "/w.json"), 2);
    EXPECT_FALSE(fs::exists(dir / "w.json"));

    write(dir / "bad.rttm", "SPEAKER r 1 zero 1.0 <NA> <NA> A <NA> <NA>\n");
    write(dir / "ok.rttm", "SPEAKER r 1 0.000 1.000 <NA> <NA> A <NA> <NA>\n");
    EXPECT_EQ(run_cli("score-der " + d + "/bad.rttm " + d + "/ok.rttm"), 1);
    EXPECT_EQ(run_cli("score-der " + d + "/ok.rttm " + d + "/ok.rttm --collar 0"), 0);

    EXPECT_EQ(run_cli("simulate --seed 4 --out-dir " + d + "/sim"), 0);
    const std::string emb = d + "/sim/sim4.embeddings.json";
    EXPECT_EQ(run_cli("diarize -e " + emb + " --method plda-spectral -o " + d + "/h.rttm"), 2);
    EXPECT_EQ(run_cli("diarize -e " + emb + " --method magic -o " + d + "/h.rttm"), 2);
    EXPECT_EQ(run_cli("diarize -e " + emb + " --refine vbx-lite -o " + d + "/h.rttm"), 0);
    EXPECT_TRUE(fs::exists(dir / "h.rttm.manifest.json"));

    write(dir / "cfg.json", R"({"spectral":{"k_maxx":3}})");
    EXPECT_EQ(run_cli("--config " + d + "/cfg.json diarize -e " + emb + " -o " + d + "/h2.rttm"), 1);
    EXPECT_EQ(run_cli("diarize -e " + emb + " -o " + d + "/h3.rttm", "LSK_SEED=abc"), 2);
}

TEST(Cli, EndToEndIsReproducible) {
    TempDir dir;
    const std::string d = dir.path().string();
    ASSERT_EQ(run_cli("simulate --preset hard --seed 11 --out-dir " + d), 0);
    const std::string emb = d + "/sim11.embeddings.json";
    ASSERT_EQ(run_cli("diarize -e " + emb + " -o " + d + "/a.rttm --jobs 2"), 0);
    ASSERT_EQ(run_cli("diarize -e " + emb + " -o " + d + "/b.rttm"), 0);
    EXPECT_EQ(read_text_file(dir / "a.rttm"), read_text_file(dir / "b.rttm"));

    const auto report = nlohmann::json::parse(capture_cli("score-der " + d + "/sim11.ref.rttm " + d + "/a.rttm"));
    EXPECT_GE(report["der"].get<double>(), 0.0);
    EXPECT_EQ(report["collar_s"].get<double>(), 0.25);

    ASSERT_EQ(run_cli("window " + d + "/sim11.segments.json --out-dir " + d + "/win"), 0);
    const auto t = read_transcripts_json(dir / "win" / "sim11.windows.json");
    EXPECT_FALSE(t.windows.empty());
    EXPECT_EQ(capture_cli("finalize " + d + "/win/sim11.windows.json"), "\n");
}

TEST(Cli, SeedPrecedence) {
    TempDir dir;
    const std::string d = dir.path().string();
    write(dir / "cfg.json", R"({"spectral":{"seed":5}})");
    auto hash_of = [&](const std::string& name) {
        return nlohmann::json::parse(read_text_file(dir / (name + ".manifest.json")))["config_hash"].get<std::string>();
    };
    ASSERT_EQ(run_cli("simulate --seed 1 --out-dir " + d + "/s"), 0);
    const std::string emb = d + "/s/sim1.embeddings.json";
    ASSERT_EQ(run_cli("--config " + d + "/cfg.json diarize -e " + emb + " -o " + d + "/file.rttm"), 0);
    ASSERT_EQ(run_cli("--config " + d + "/cfg.json diarize -e " + emb + " -o " + d + "/env.rttm", "LSK_SEED=7"), 0);
    ASSERT_EQ(run_cli("--config " + d + "/cfg.json diarize -e " + emb + " -o " + d + "/flag.rttm --seed 7", "LSK_SEED=3"), 0);
    PipelineConfig five, seven;
    five.spectral.seed = 5;
    seven.spectral.seed = 7;
    EXPECT_EQ(hash_of("file.rttm"), config_hash(five));
    EXPECT_EQ(hash_of("env.rttm"), config_hash(seven));
    EXPECT_EQ(hash_of("flag.rttm"), config_hash(seven));
}

TEST(Cli, NormalizeAndScoreWer) {
    TempDir dir;
    const std::string d = dir.path().string();
    write(dir / "in.txt", "  আ​মি  ভালো \nx\n");
    ASSERT_EQ(run_cli("normalize -i " + d + "/in.txt -o " + d + "/out.txt"), 0);
    EXPECT_EQ(read_text_file(dir / "out.txt"), "আমি ভালো\nx\n");
    EXPECT_EQ(capture_cli("normalize -i " + d + "/in.txt"), "আমি ভালো\nx\n");
    write(dir / "hyp.txt", "আমি খারাপ\nx\n");
    const auto j = nlohmann::json::parse(capture_cli("score-wer " + d + "/out.txt " + d + "/hyp.txt"));
    EXPECT_EQ(j["substitutions"].get<int>(), 1);
    EXPECT_NEAR(j["wer"].get<double>(), 1.0 / 3.0, 1e-12);
}
