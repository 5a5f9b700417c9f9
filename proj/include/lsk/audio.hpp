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

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lsk/interchange.hpp"

namespace lsk {

inline constexpr int kTargetSampleRate = 16000;

struct Waveform {
    std::vector<float> samples;
    int sample_rate = kTargetSampleRate;
    std::string audio_id;

    double duration() const {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
    }
};

/// Reads a RIFF/WAVE file (PCM 16-bit or IEEE float 32-bit, 1-2 channels),
/// downmixes to mono by channel mean and resamples to 16 kHz by linear
/// interpolation.
Waveform load_wav(const std::filesystem::path& path, const std::string& audio_id);

/// Same as load_wav but from an in-memory file image.
Waveform decode_wav(std::span<const unsigned char> bytes, const std::string& audio_id);

/// Linear-interpolation resampler. Output length is floor(n * to / from).
std::vector<float> resample_linear(std::span<const float> in, int from_rate, int to_rate);

/// Encodes 16-bit PCM. Samples are clipped to [-1, 1].
std::vector<unsigned char> encode_wav_pcm16(std::span<const float> samples, int sample_rate,
                                            int channels = 1);
void write_wav_pcm16(const std::filesystem::path& path, std::span<const float> samples,
                     int sample_rate, int channels = 1);

struct VadConfig {
    double frame_ms = 30.0;
    double hop_ms = 10.0;
    double energy_percentile = 30.0;       // noise-floor estimate
    double threshold_db_above_floor = 6.0;
    double min_speech_ms = 250.0;
    double min_silence_ms = 300.0;
    double speech_pad_ms = 100.0;
};

void validate(const VadConfig& cfg);

/// Per-frame log energy in dB, frames of frame_ms every hop_ms.
std::vector<double> frame_log_energy(const Waveform& w, const VadConfig& cfg);

/// Percentile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double p);

/// Energy-threshold speech detector.
///
/// A frame is speech when its log energy is at least
/// `threshold_db_above_floor` above the `energy_percentile`-th percentile of
/// all frame energies. A run of speech frames [a, b] maps to the interval
/// [a*hop + frame - hop/2, b*hop + hop/2]: an onset is first seen by the
/// frame whose trailing hop contains it, an offset is last seen by the frame
/// whose leading hop contains it. Runs that map to an empty interval (events
/// shorter than about one hop) are dropped. Gaps shorter than min_silence_ms are filled,
/// regions shorter than min_speech_ms dropped, survivors padded by
/// speech_pad_ms, clamped to [0, duration] and merged where they overlap.
std::vector<SpeechRegion> energy_vad(const Waveform& w, const VadConfig& cfg);

} // namespace lsk
