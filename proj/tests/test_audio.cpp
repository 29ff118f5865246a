#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "elf/audio/audio.hpp"
#include "elf/audio/wav.hpp"
#include "elf/error.hpp"

using namespace elf;

namespace {

const std::string tmp_dir = []() {
  auto d = std::filesystem::temp_directory_path() / "elf_audio_test";
  std::filesystem::create_directories(d);
  return d.string();
}();

std::vector<float> sine(double freq, int sr, double seconds, float amp = 0.5f) {
  std::vector<float> v(static_cast<size_t>(sr * seconds));
  for (size_t i = 0; i < v.size(); ++i)
    v[i] = amp * static_cast<float>(std::sin(2.0 * M_PI * freq * i / sr));
  return v;
}

audio::MelConfig small_mel() {
  audio::MelConfig cfg;
  cfg.fft_size = 512;
  cfg.window_size = 512;
  cfg.hop_size = 128;
  cfg.n_mels = 40;
  cfg.sample_rate = 22050;
  return cfg;
}

}  // namespace

TEST_CASE("load_waveform resamples 44.1k to 22.05k with exact length") {
  const std::string path = tmp_dir + "/a441.wav";
  audio::write_wav_16bit(path, sine(440, 44100, 1.0), 44100);
  audio::Waveform w = audio::load_waveform(path, 22050);
  CHECK(w.sample_rate == 22050);
  CHECK(w.size() == 22050);
}

TEST_CASE("load_waveform at native rate keeps sample values") {
  // 32-bit float wav so quantization cannot perturb values
  const std::string path = tmp_dir + "/native.wav";
  std::vector<float> v = sine(220, 22050, 0.25);
  {
    std::string body;
    auto u32 = [&](uint32_t x) { for (int i = 0; i < 4; ++i) body.push_back(char((x >> (8 * i)) & 0xFF)); };
    auto u16 = [&](uint16_t x) { body.push_back(char(x & 0xFF)); body.push_back(char((x >> 8) & 0xFF)); };
    body.append("RIFF"); u32(36 + static_cast<uint32_t>(v.size() * 4)); body.append("WAVE");
    body.append("fmt "); u32(16); u16(3); u16(1); u32(22050); u32(22050 * 4); u16(4); u16(32);
    body.append("data"); u32(static_cast<uint32_t>(v.size() * 4));
    for (float s : v) { uint32_t u; std::memcpy(&u, &s, 4); u32(u); }
    std::ofstream f(path, std::ios::binary);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
  }
  audio::Waveform w = audio::load_waveform(path, 22050);
  REQUIRE(w.size() == static_cast<int64_t>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) CHECK(w.samples[i] == v[i]);
}

TEST_CASE("stereo channels x and -x average to silence") {
  const std::string path = tmp_dir + "/stereo.wav";
  std::vector<float> mono = sine(440, 22050, 0.1);
  std::string body;
  auto u32 = [&](uint32_t x) { for (int i = 0; i < 4; ++i) body.push_back(char((x >> (8 * i)) & 0xFF)); };
  auto u16 = [&](uint16_t x) { body.push_back(char(x & 0xFF)); body.push_back(char((x >> 8) & 0xFF)); };
  const uint32_t data_bytes = static_cast<uint32_t>(mono.size() * 4);
  body.append("RIFF"); u32(36 + data_bytes); body.append("WAVE");
  body.append("fmt "); u32(16); u16(1); u16(2); u32(22050); u32(22050 * 4); u16(4); u16(16);
  body.append("data"); u32(data_bytes);
  for (float s : mono) {
    const int16_t q = static_cast<int16_t>(std::lrintf(std::max(-1.f, std::min(1.f, s)) * 32767.f));
    u16(static_cast<uint16_t>(q));
    u16(static_cast<uint16_t>(static_cast<int16_t>(-q)));
  }
  {
    std::ofstream f(path, std::ios::binary);
    f.write(body.data(), static_cast<std::streamsize>(body.size()));
  }
  audio::Waveform w = audio::load_waveform(path, 22050);
  for (float s : w.samples) CHECK(s == 0.f);
}

TEST_CASE("trim_silence removes margins and keeps interior") {
  const int sr = 22050;
  audio::Waveform w;
  w.sample_rate = sr;
  std::vector<float> speech = sine(300, sr, 0.4);
  w.samples.assign(static_cast<size_t>(sr / 2), 0.f);
  w.samples.insert(w.samples.end(), speech.begin(), speech.end());
  w.samples.insert(w.samples.end(), static_cast<size_t>(sr / 2), 0.f);

  audio::Waveform t = audio::trim_silence(w, -40.f);
  const int64_t win = sr / 50;
  CHECK(std::llabs(t.size() - static_cast<int64_t>(speech.size())) <= 2 * win);

  audio::Waveform again = audio::trim_silence(t, -40.f);
  CHECK(again.size() == t.size());

  audio::Waveform zeros;
  zeros.sample_rate = sr;
  zeros.samples.assign(static_cast<size_t>(sr), 0.f);
  CHECK_THROWS_AS(audio::trim_silence(zeros, -40.f), Error);
  CHECK_THROWS_AS(audio::trim_silence(w, 3.f), Error);
}

TEST_CASE("all-zero waveform maps to log(log_floor) everywhere") {
  audio::MelConfig cfg = small_mel();
  audio::Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.assign(4096, 0.f);
  audio::MelSpectrogram m = audio::mel_spectrogram(w, cfg);
  CHECK(m.n_frames() == 4096 / cfg.hop_size);
  const float expect = std::log(cfg.log_floor);
  for (int64_t i = 0; i < m.frames.numel(); ++i) CHECK(m.frames.at(i) == expect);
}

TEST_CASE("pure 440 Hz tone peaks at the nearest mel filter center") {
  audio::MelConfig cfg;  // paper-scale analysis settings
  audio::MelAnalyzer analyzer(cfg);

  const auto centers = analyzer.mel_center_freqs_hz();
  int expected = 0;
  for (size_t i = 1; i < centers.size(); ++i)
    if (std::fabs(centers[i] - 440.f) < std::fabs(centers[static_cast<size_t>(expected)] - 440.f))
      expected = static_cast<int>(i);

  audio::Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples = sine(440, cfg.sample_rate, 0.6);
  audio::MelSpectrogram m = audio::mel_spectrogram(w, cfg);
  for (int64_t t = 0; t < m.n_frames(); ++t) {
    int arg = 0;
    for (int64_t b = 1; b < cfg.n_mels; ++b)
      if (m.frames.at2(t, b) > m.frames.at2(t, arg)) arg = static_cast<int>(b);
    CHECK(arg == expected);
  }
}

TEST_CASE("frame count follows floor(len/hop) and doubles under concatenation") {
  audio::MelConfig cfg = small_mel();
  audio::Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples = sine(500, cfg.sample_rate, 0.13);  // not a hop multiple
  const int64_t t1 = audio::mel_spectrogram(w, cfg).n_frames();
  CHECK(t1 == w.size() / cfg.hop_size);

  audio::Waveform ww = w;
  ww.samples.insert(ww.samples.end(), w.samples.begin(), w.samples.end());
  const int64_t t2 = audio::mel_spectrogram(ww, cfg).n_frames();
  CHECK(std::llabs(t2 - 2 * t1) <= 1);
}

TEST_CASE("mel_spectrogram is pure: byte-identical across calls") {
  audio::MelConfig cfg = small_mel();
  audio::Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples = sine(313, cfg.sample_rate, 0.21);
  audio::MelSpectrogram a = audio::mel_spectrogram(w, cfg);
  audio::MelSpectrogram b = audio::mel_spectrogram(w, cfg);
  REQUIRE(a.frames.numel() == b.frames.numel());
  CHECK(std::memcmp(a.frames.data(), b.frames.data(),
                    static_cast<size_t>(a.frames.numel()) * 4) == 0);
}

TEST_CASE("attenuating a waveform never increases any log-mel entry") {
  audio::MelConfig cfg = small_mel();
  audio::Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples = sine(700, cfg.sample_rate, 0.2, 0.8f);
  audio::Waveform h = w;
  for (auto& s : h.samples) s *= 0.35f;
  audio::MelSpectrogram a = audio::mel_spectrogram(w, cfg);
  audio::MelSpectrogram b = audio::mel_spectrogram(h, cfg);
  for (int64_t i = 0; i < a.frames.numel(); ++i) CHECK(b.frames.at(i) <= a.frames.at(i) + 1e-6f);
}

TEST_CASE("sample_segment: determinism, shape, and frame alignment") {
  audio::MelConfig cfg = small_mel();
  audio::Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples = sine(620, cfg.sample_rate, 1.0, 0.6f);
  for (size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] *= 0.5f + 0.5f * static_cast<float>(std::sin(2.0 * M_PI * i / 9001.0));

  const int64_t seg = 8 * cfg.hop_size;
  nn::Rng r1(5), r2(5);
  auto [s1, m1] = audio::sample_segment(w, seg, r1, cfg);
  auto [s2, m2] = audio::sample_segment(w, seg, r2, cfg);
  CHECK(s1.samples == s2.samples);
  CHECK(m1.n_frames() == seg / cfg.hop_size);

  // whole clip as the only valid offset
  audio::Waveform whole;
  whole.sample_rate = cfg.sample_rate;
  whole.samples.assign(w.samples.begin(), w.samples.begin() + seg);
  nn::Rng r3(9);
  auto [s3, m3] = audio::sample_segment(whole, seg, r3, cfg);
  CHECK(s3.samples == whole.samples);

  // interior frames of a hop-aligned segment equal the whole-clip rows
  audio::MelSpectrogram full = audio::mel_spectrogram(w, cfg);
  nn::Rng r4(11);
  auto [s4, m4] = audio::sample_segment(w, seg, r4, cfg);
  int64_t offset = -1;
  for (int64_t o = 0; o + seg <= w.size(); o += cfg.hop_size) {
    if (std::memcmp(w.samples.data() + o, s4.samples.data(),
                    sizeof(float) * static_cast<size_t>(seg)) == 0) {
      offset = o;
      break;
    }
  }
  REQUIRE(offset >= 0);
  const int64_t off_frames = offset / cfg.hop_size;
  const int64_t pad = (cfg.fft_size - cfg.hop_size) / 2;
  const int64_t guard = (pad + cfg.hop_size - 1) / cfg.hop_size;  // frames touching the edges
  for (int64_t t = guard; t < m4.n_frames() - guard; ++t)
    for (int64_t b = 0; b < cfg.n_mels; ++b)
      CHECK(m4.frames.at2(t, b) ==
            doctest::Approx(full.frames.at2(off_frames + t, b)).epsilon(1e-6));

  CHECK_THROWS_AS(audio::sample_segment(whole, seg + cfg.hop_size, r4, cfg), Error);
}

TEST_CASE("mel rejects waveforms shorter than the window") {
  audio::MelConfig cfg = small_mel();
  audio::Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.assign(static_cast<size_t>(cfg.window_size - 1), 0.1f);
  CHECK_THROWS_AS(audio::mel_spectrogram(w, cfg), Error);
}
