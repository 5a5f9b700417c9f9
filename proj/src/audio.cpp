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

#include "lsk/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace lsk {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
    out.insert(out.end(), tag, tag + 4);
}

struct FormatChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
};

FormatChunk parse_fmt(const unsigned char* p, std::uint32_t size) {
    if (size < 16) throw ParseError("wav: fmt chunk too short");
    FormatChunk f;
    f.format = read_u16(p);
    f.channels = read_u16(p + 2);
    f.sample_rate = read_u32(p + 4);
    f.bits = read_u16(p + 14);
    if (f.format == kFormatExtensible) {
        if (size < 26) throw ParseError("wav: extensible fmt chunk too short");
        f.format = read_u16(p + 24);
    }
    return f;
}

} // namespace

Waveform decode_wav(std::span<const unsigned char> bytes, const std::string& audio_id) {
    if (bytes.size() < 12) throw ParseError("wav: truncated file");
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw ParseError("wav: not a RIFF/WAVE file");
    }

    FormatChunk fmt;
    bool have_fmt = false;
    std::span<const unsigned char> data;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* hdr = bytes.data() + pos;
        const std::uint32_t size = read_u32(hdr + 4);
        const std::size_t body = pos + 8;
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (body + size > bytes.size()) throw ParseError("wav: truncated file");
            fmt = parse_fmt(bytes.data() + body, size);
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            if (size == 0 || body + size > bytes.size()) throw ParseError("wav: truncated file");
            data = bytes.subspan(body, size);
            have_data = true;
            break;
        }
        pos = body + size + (size & 1u);
    }
    if (!have_fmt) throw ParseError("wav: missing fmt chunk");
    if (!have_data) throw ParseError("wav: truncated file");

    if (fmt.channels < 1 || fmt.channels > 2) {
        throw ParseError("wav: unsupported channel count " + std::to_string(fmt.channels));
    }
    if (!is_supported_sample_rate(static_cast<int>(fmt.sample_rate))) {
        throw ParseError("wav: unsupported sample rate " + std::to_string(fmt.sample_rate));
    }
    const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
    const bool float32 = fmt.format == kFormatFloat && fmt.bits == 32;
    if (!pcm16 && !float32) {
        throw ParseError("wav: unsupported codec (format " + std::to_string(fmt.format) + ", " +
                         std::to_string(fmt.bits) + " bits)");
    }

    const std::size_t bytes_per_frame = static_cast<std::size_t>(fmt.bits / 8) * fmt.channels;
    const std::size_t frames = data.size() / bytes_per_frame;
    if (frames == 0) throw ParseError("wav: truncated file");

    auto sample_at = [&](std::size_t frame, std::size_t ch) -> float {
        const unsigned char* p = data.data() + frame * bytes_per_frame + ch * (fmt.bits / 8);
        if (pcm16) {
            return static_cast<float>(static_cast<std::int16_t>(read_u16(p))) / 32768.0f;
        }
        float x = 0.0f;
        const std::uint32_t raw = read_u32(p);
        std::memcpy(&x, &raw, sizeof(x));
        if (!std::isfinite(x)) throw ParseError("wav: non-finite float sample");
        return std::clamp(x, -1.0f, 1.0f);
    };

    std::vector<float> mono(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        if (fmt.channels == 1) {
            mono[i] = sample_at(i, 0);
        } else {
            mono[i] = 0.5f * (sample_at(i, 0) + sample_at(i, 1));
        }
    }

    Waveform w;
    w.audio_id = audio_id;
    w.sample_rate = kTargetSampleRate;
    if (static_cast<int>(fmt.sample_rate) == kTargetSampleRate) {
        w.samples = std::move(mono);
    } else {
        w.samples = resample_linear(mono, static_cast<int>(fmt.sample_rate), kTargetSampleRate);
    }
    return w;
}

Waveform load_wav(const std::filesystem::path& path, const std::string& audio_id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return decode_wav(bytes, audio_id);
}

std::vector<float> resample_linear(std::span<const float> in, int from_rate, int to_rate) {
    if (from_rate <= 0 || to_rate <= 0) throw ValidationError("resample: rates must be positive");
    if (in.empty()) return {};
    if (from_rate == to_rate) return {in.begin(), in.end()};

    const auto from = static_cast<std::uint64_t>(from_rate);
    const auto to = static_cast<std::uint64_t>(to_rate);
    const std::uint64_t n_out = static_cast<std::uint64_t>(in.size()) * to / from;
    std::vector<float> out(n_out);
    const std::size_t last = in.size() - 1;
    for (std::uint64_t i = 0; i < n_out; ++i) {
        const std::uint64_t num = i * from;
        const std::size_t idx = static_cast<std::size_t>(num / to);
        const double frac = static_cast<double>(num % to) / static_cast<double>(to);
        const double a = in[std::min(idx, last)];
        const double b = in[std::min(idx + 1, last)];
        out[i] = static_cast<float>(a + (b - a) * frac);
    }
    return out;
}

std::vector<unsigned char> encode_wav_pcm16(std::span<const float> samples, int sample_rate,
                                            int channels) {
    const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
    std::vector<unsigned char> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_bytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, static_cast<std::uint16_t>(channels));
    put_u32(out, static_cast<std::uint32_t>(sample_rate));
    put_u32(out, static_cast<std::uint32_t>(sample_rate * channels * 2));
    put_u16(out, static_cast<std::uint16_t>(channels * 2));
    put_u16(out, 16);
    put_tag(out, "data");
    put_u32(out, data_bytes);
    for (float x : samples) {
        const long v = std::clamp(std::lround(static_cast<double>(x) * 32768.0), -32768L, 32767L);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    }
    return out;
}

void write_wav_pcm16(const std::filesystem::path& path, std::span<const float> samples,
                     int sample_rate, int channels) {
    const auto bytes = encode_wav_pcm16(samples, sample_rate, channels);
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                             bytes.size()));
}

// --- VAD -----------------------------------------------------------------

void validate(const VadConfig& cfg) {
    if (!(cfg.hop_ms > 0.0)) throw ValidationError("vad: hop_ms must be positive");
    if (!(cfg.frame_ms >= cfg.hop_ms)) throw ValidationError("vad: frame_ms must be >= hop_ms");
    if (!(cfg.energy_percentile > 0.0 && cfg.energy_percentile < 100.0)) {
        throw ValidationError("vad: energy_percentile must be in (0, 100)");
    }
    if (!std::isfinite(cfg.threshold_db_above_floor)) {
        throw ValidationError("vad: threshold_db_above_floor must be finite");
    }
    if (!(cfg.min_speech_ms >= 0.0) || !(cfg.min_silence_ms >= 0.0)) {
        throw ValidationError("vad: min_speech_ms and min_silence_ms must be >= 0");
    }
    if (!(cfg.speech_pad_ms >= 0.0)) throw ValidationError("vad: speech_pad_ms must be >= 0");
}

namespace {

struct FrameGrid {
    std::size_t frame = 0;  // samples
    std::size_t hop = 0;    // samples
    std::size_t count = 0;
};

FrameGrid make_grid(const Waveform& w, const VadConfig& cfg) {
    FrameGrid g;
    g.frame = static_cast<std::size_t>(std::llround(cfg.frame_ms * w.sample_rate / 1000.0));
    g.hop = static_cast<std::size_t>(std::llround(cfg.hop_ms * w.sample_rate / 1000.0));
    if (g.hop == 0 || g.frame < g.hop) throw ValidationError("vad: frame/hop below one sample");
    if (w.samples.size() < g.frame) {
        throw ValidationError("vad: waveform shorter than one frame");
    }
    g.count = (w.samples.size() - g.frame) / g.hop + 1;
    return g;
}

} // namespace

std::vector<double> frame_log_energy(const Waveform& w, const VadConfig& cfg) {
    validate(cfg);
    const FrameGrid g = make_grid(w, cfg);
    std::vector<double> energy(g.count);
    for (std::size_t j = 0; j < g.count; ++j) {
        double acc = 0.0;
        const float* p = w.samples.data() + j * g.hop;
        for (std::size_t i = 0; i < g.frame; ++i) acc += static_cast<double>(p[i]) * p[i];
        energy[j] = 10.0 * std::log10(acc / static_cast<double>(g.frame) + 1e-10);
    }
    return energy;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw ValidationError("percentile of an empty set");
    std::sort(values.begin(), values.end());
    const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (values[hi] - values[lo]) * (rank - static_cast<double>(lo));
}

std::vector<SpeechRegion> energy_vad(const Waveform& w, const VadConfig& cfg) {
    const std::vector<double> energy = frame_log_energy(w, cfg);
    const FrameGrid g = make_grid(w, cfg);
    const double sr = w.sample_rate;
    const double duration = w.duration();
    const double threshold = percentile(energy, cfg.energy_percentile) + cfg.threshold_db_above_floor;

    std::vector<SpeechRegion> raw;
    std::size_t j = 0;
    while (j < energy.size()) {
        if (energy[j] < threshold) {
            ++j;
            continue;
        }
        const std::size_t a = j;
        while (j < energy.size() && energy[j] >= threshold) ++j;
        const std::size_t b = j - 1;
        const double start = (static_cast<double>(a * g.hop + g.frame) - 0.5 * g.hop) / sr;
        const double end = (static_cast<double>(b * g.hop) + 0.5 * g.hop) / sr;
        if (end > start) raw.push_back({std::max(0.0, start), std::min(duration, end)});
    }

    std::vector<SpeechRegion> filled;
    const double min_silence = cfg.min_silence_ms / 1000.0;
    for (const auto& r : raw) {
        if (!filled.empty() && r.start - filled.back().end < min_silence) {
            filled.back().end = std::max(filled.back().end, r.end);
        } else {
            filled.push_back(r);
        }
    }

    const double min_speech = cfg.min_speech_ms / 1000.0;
    const double pad = cfg.speech_pad_ms / 1000.0;
    std::vector<SpeechRegion> out;
    for (const auto& r : filled) {
        if (r.length() < min_speech) continue;
        SpeechRegion p{std::max(0.0, r.start - pad), std::min(duration, r.end + pad)};
        if (!out.empty() && p.start <= out.back().end) {
            out.back().end = std::max(out.back().end, p.end);
        } else {
            out.push_back(p);
        }
    }
    return out;
}

} // namespace lsk
