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

#include <cstdint>
#include <cstring>

#include "lsk/audio.hpp"
#include "test_support.hpp"

using namespace lsk;
using lsk::testing::TempDir;
using lsk::testing::tone_burst_signal;

namespace {

void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
void put_u16(std::vector<unsigned char>& b, std::uint16_t v) {
    b.push_back(static_cast<unsigned char>(v));
    b.push_back(static_cast<unsigned char>(v >> 8));
}

std::vector<unsigned char> wav_image(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                     std::uint16_t bits, const std::vector<unsigned char>& data,
                                     bool with_data = true) {
    std::vector<unsigned char> b{'R', 'I', 'F', 'F'};
    put_u32(b, static_cast<std::uint32_t>(4 + 8 + 16 + (with_data ? 8 + data.size() : 0)));
    b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put_u32(b, 16);
    put_u16(b, format);
    put_u16(b, channels);
    put_u32(b, rate);
    put_u32(b, rate * channels * bits / 8);
    put_u16(b, static_cast<std::uint16_t>(channels * bits / 8));
    put_u16(b, bits);
    if (with_data) {
        b.insert(b.end(), {'d', 'a', 't', 'a'});
        put_u32(b, static_cast<std::uint32_t>(data.size()));
        b.insert(b.end(), data.begin(), data.end());
    }
    return b;
}

std::vector<unsigned char> pcm16(const std::vector<std::int16_t>& s) {
    std::vector<unsigned char> out;
    for (auto v : s) put_u16(out, static_cast<std::uint16_t>(v));
    return out;
}

double total_speech(const std::vector<SpeechRegion>& r) {
    double t = 0.0;
    for (const auto& x : r) t += x.length();
    return t;
}

} // namespace

TEST(Wav, StereoDownsampledTo16k) {
    std::vector<std::int16_t> s(44100 * 2 * 2);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::int16_t>((i % 2 ? 1000 : -1000));
    const auto w = decode_wav(wav_image(1, 2, 44100, 16, pcm16(s)), "x");
    EXPECT_EQ(w.sample_rate, 16000);
    EXPECT_EQ(w.samples.size(), 32000u);
    for (float v : w.samples) EXPECT_EQ(v, 0.0f);  // channel mean of +-1000
}

TEST(Wav, Mono16kIsBitExact) {
    std::vector<std::int16_t> s{0, 1, -1, 32767, -32768, 12345, -4321};
    const auto w = decode_wav(wav_image(1, 1, 16000, 16, pcm16(s)), "x");
    ASSERT_EQ(w.samples.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(w.samples[i], static_cast<float>(s[i] / 32768.0)) << i;
    }
}

TEST(Wav, Float32) {
    std::vector<float> f{0.0f, 0.5f, -0.25f, 1.0f};
    std::vector<unsigned char> data(f.size() * 4);
    std::memcpy(data.data(), f.data(), data.size());
    const auto w = decode_wav(wav_image(3, 1, 16000, 32, data), "x");
    EXPECT_EQ(w.samples, f);
}

TEST(Wav, Errors) {
    try {
        decode_wav(wav_image(1, 1, 16000, 16, {}), "x");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("truncated file"), std::string::npos);
    }
    EXPECT_THROW(decode_wav(wav_image(1, 1, 16000, 16, {}, false), "x"), ParseError);
    EXPECT_THROW(decode_wav(wav_image(1, 1, 12000, 16, pcm16({1, 2})), "x"), ParseError);
    EXPECT_THROW(decode_wav(wav_image(1, 1, 16000, 24, std::vector<unsigned char>(6)), "x"), ParseError);
    EXPECT_THROW(decode_wav(wav_image(1, 3, 16000, 16, pcm16({1, 2, 3})), "x"), ParseError);
    auto cut = wav_image(1, 1, 16000, 16, pcm16({1, 2, 3, 4}));
    cut.resize(cut.size() - 3);
    EXPECT_THROW(decode_wav(cut, "x"), ParseError);
    EXPECT_THROW(load_wav("/nonexistent.wav", "x"), IoError);
}

TEST(Wav, WriteReadRoundTrip) {
    TempDir dir;
    std::vector<float> s{0.0f, 0.25f, -0.5f, 0.999f};
    write_wav_pcm16(dir / "a.wav", s, 16000);
    const auto w = load_wav(dir / "a.wav", "a");
    ASSERT_EQ(w.samples.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(w.samples[i], s[i], 1.0 / 32768.0);
}

TEST(Resample, LengthAndIdentity) {
    std::vector<float> in(48000, 0.25f);
    EXPECT_EQ(resample_linear(in, 48000, 16000).size(), 16000u);
    EXPECT_EQ(resample_linear(in, 16000, 16000), in);
    std::vector<float> ramp{0.0f, 1.0f, 2.0f, 3.0f};
    const auto up = resample_linear(ramp, 8000, 16000);
    ASSERT_EQ(up.size(), 8u);
    EXPECT_FLOAT_EQ(up[1], 0.5f);
    EXPECT_FLOAT_EQ(up[2], 1.0f);
}

TEST(Percentile, Interpolates) {
    EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4, 5}, 50), 3.0);
    EXPECT_DOUBLE_EQ(percentile({5, 1, 4, 2, 3}, 25), 2.0);
    EXPECT_DOUBLE_EQ(percentile({0, 10}, 30), 3.0);
}

TEST(Vad, SilenceGivesNothing) {
    Waveform w;
    w.samples.assign(160000, 0.0f);
    EXPECT_TRUE(energy_vad(w, {}).empty());
}

TEST(Vad, ToneBurstLocalized) {
    Rng rng(7);
    const auto w = tone_burst_signal(rng, 10.0, {{3.0, 5.0}});
    const auto r = energy_vad(w, {});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0].start, 2.9, 0.01);
    EXPECT_NEAR(r[0].end, 5.1, 0.01);
}

TEST(Vad, ShortSilenceFilled) {
    Rng rng(8);
    const auto w = tone_burst_signal(rng, 10.0, {{2.0, 3.5}, {3.6, 5.0}});
    const auto r = energy_vad(w, {});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0].start, 1.9, 0.01);
    EXPECT_NEAR(r[0].end, 5.1, 0.01);
}

TEST(Vad, LongSilenceSplits) {
    Rng rng(9);
    const auto w = tone_burst_signal(rng, 10.0, {{2.0, 3.0}, {4.0, 5.0}});
    EXPECT_EQ(energy_vad(w, {}).size(), 2u);
}

TEST(Vad, ShortBlipDropped) {
    Rng rng(10);
    const auto w = tone_burst_signal(rng, 10.0, {{2.0, 2.1}, {5.0, 6.0}});
    const auto r = energy_vad(w, {});
    ASSERT_EQ(r.size(), 1u);
    EXPECT_NEAR(r[0].start, 4.9, 0.01);
}

TEST(Vad, PropertiesOnRandomSignals) {
    Rng rng(11);
    for (int trial = 0; trial < 15; ++trial) {
        std::vector<SpeechRegion> bursts;
        double t = rng.uniform(0.0, 1.0);
        while (true) {
            const double len = rng.uniform(0.05, 1.5);
            if (t + len > 7.5) break;
            bursts.push_back({t, t + len});
            t += len + rng.uniform(0.05, 1.0);
        }
        const double level = rng.uniform(-30.0, -6.0);
        const auto w = tone_burst_signal(rng, 8.0, bursts, -45.0, level);
        VadConfig cfg;
        const auto r = energy_vad(w, cfg);
        EXPECT_EQ(r, energy_vad(w, cfg));
        for (std::size_t i = 0; i < r.size(); ++i) {
            EXPECT_GE(r[i].start, 0.0);
            EXPECT_LE(r[i].end, w.duration());
            EXPECT_GE(r[i].length(), cfg.min_speech_ms / 1000.0 - 1e-9);
            if (i > 0) {
                EXPECT_LT(r[i - 1].end, r[i].start);
            }
        }
        double prev = total_speech(r);
        for (double th : {8.0, 12.0, 20.0, 30.0, 45.0}) {
            cfg.threshold_db_above_floor = th;
            const double cur = total_speech(energy_vad(w, cfg));
            EXPECT_LE(cur, prev + 1e-12) << "threshold " << th;
            prev = cur;
        }
    }
}

TEST(Vad, ConfigValidation) {
    VadConfig cfg;
    cfg.hop_ms = 40;
    EXPECT_THROW(validate(cfg), ValidationError);
    cfg = {};
    cfg.energy_percentile = 100;
    EXPECT_THROW(validate(cfg), ValidationError);
    Waveform tiny;
    tiny.samples.assign(100, 0.0f);
    EXPECT_THROW(energy_vad(tiny, {}), ValidationError);
}
