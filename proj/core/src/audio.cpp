#include "elf/audio/audio.hpp"

#include <algorithm>
#include <cmath>

#include "elf/audio/wav.hpp"
#include "elf/error.hpp"

namespace elf::audio {

void MelConfig::validate() const {
  ELF_CHECK(n_mels >= 1, ErrorKind::kValidation, "mel: n_mels must be >= 1");
  ELF_CHECK(window_size <= fft_size, ErrorKind::kValidation, "mel: window_size > fft_size");
  ELF_CHECK(hop_size >= 1 && hop_size <= window_size, ErrorKind::kValidation,
            "mel: need 1 <= hop_size <= window_size");
  ELF_CHECK(sample_rate > 0, ErrorKind::kValidation, "mel: sample_rate must be positive");
  ELF_CHECK(log_floor > 0.f, ErrorKind::kValidation, "mel: log_floor must be positive");
  ELF_CHECK(fft_size > hop_size, ErrorKind::kValidation, "mel: fft_size must exceed hop_size");
}

namespace {

// Slaney mel scale: linear below 1 kHz, logarithmic above.
double hz_to_mel(double hz) {
  const double f_sp = 200.0 / 3.0;
  const double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz < min_log_hz) return hz / f_sp;
  return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

double mel_to_hz(double mel) {
  const double f_sp = 200.0 / 3.0;
  const double min_log_hz = 1000.0;
  const double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel < min_log_mel) return mel * f_sp;
  return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

int64_t reflect_index(int64_t pos, int64_t n) {
  if (pos < 0) pos = -pos;
  if (pos >= n) pos = 2 * n - 2 - pos;
  return pos;
}

}  // namespace

MelAnalyzer::MelAnalyzer(const MelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  pad_ = (cfg_.fft_size - cfg_.hop_size) / 2;

  const int win = cfg_.window_size;
  window_ = nn::Tensor({win});
  for (int i = 0; i < win; ++i) {
    // periodic Hann
    window_.at(i) = 0.5f * (1.f - std::cos(2.0 * M_PI * i / win));
  }

  const int bins = cfg_.fft_size / 2 + 1;
  dft_cos_ = nn::Tensor({win, bins});
  dft_sin_ = nn::Tensor({win, bins});
  for (int i = 0; i < win; ++i) {
    for (int b = 0; b < bins; ++b) {
      const double phase = 2.0 * M_PI * b * i / cfg_.fft_size;
      dft_cos_.at2(i, b) = static_cast<float>(std::cos(phase));
      dft_sin_.at2(i, b) = static_cast<float>(-std::sin(phase));
    }
  }

  // Slaney-style triangular filters over 0 Hz .. Nyquist, area-normalized.
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(cfg_.sample_rate / 2.0);
  std::vector<double> hz(static_cast<size_t>(cfg_.n_mels) + 2);
  for (int m = 0; m < cfg_.n_mels + 2; ++m)
    hz[static_cast<size_t>(m)] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (cfg_.n_mels + 1));
  centers_hz_.assign(static_cast<size_t>(cfg_.n_mels), 0.f);
  for (int m = 0; m < cfg_.n_mels; ++m)
    centers_hz_[static_cast<size_t>(m)] = static_cast<float>(hz[static_cast<size_t>(m) + 1]);

  mel_fb_ = nn::Tensor({bins, cfg_.n_mels});
  for (int m = 0; m < cfg_.n_mels; ++m) {
    const double left = hz[static_cast<size_t>(m)];
    const double center = hz[static_cast<size_t>(m) + 1];
    const double right = hz[static_cast<size_t>(m) + 2];
    const double enorm = 2.0 / (right - left);
    for (int b = 0; b < bins; ++b) {
      const double f = static_cast<double>(b) * cfg_.sample_rate / cfg_.fft_size;
      const double lower = (f - left) / (center - left);
      const double upper = (right - f) / (right - center);
      const double wgt = std::max(0.0, std::min(lower, upper));
      mel_fb_.at2(b, m) = static_cast<float>(wgt * enorm);
    }
  }
}

int64_t MelAnalyzer::frame_count(int64_t n_samples) const {
  return n_samples / cfg_.hop_size;
}

nn::Var MelAnalyzer::log_mel(nn::Tape& t, nn::Var wave) const {
  const int64_t n = wave.val().numel();
  ELF_CHECK(n >= cfg_.window_size, ErrorKind::kDimension,
            "mel: waveform shorter than the analysis window");
  const int64_t frames = frame_count(n);
  ELF_CHECK(frames >= 1, ErrorKind::kDimension, "mel: waveform shorter than one hop");

  const int win = cfg_.window_size;
  const int off = (cfg_.fft_size - win) / 2;
  std::vector<int64_t> idx(static_cast<size_t>(frames * win));
  for (int64_t f = 0; f < frames; ++f)
    for (int i = 0; i < win; ++i)
      idx[static_cast<size_t>(f * win + i)] =
          reflect_index(f * cfg_.hop_size + off + i - pad_, n);

  nn::Var framed = nn::gather1d(wave, std::move(idx), {frames, win});
  nn::Var windowed = nn::mul_cols(framed, t.constant(window_));
  nn::Var re = nn::matmul(windowed, t.constant(dft_cos_));
  nn::Var im = nn::matmul(windowed, t.constant(dft_sin_));
  nn::Var mag = nn::sqrt_op(nn::add(nn::mul(re, re), nn::mul(im, im)));
  nn::Var mel = nn::matmul(mag, t.constant(mel_fb_));
  return nn::log_op(nn::clamp_min(mel, cfg_.log_floor));
}

nn::Tensor MelAnalyzer::log_mel(const std::vector<float>& samples) const {
  nn::Tape t;
  nn::Var w = t.constant(nn::Tensor({static_cast<int64_t>(samples.size())}, samples));
  return log_mel(t, w).val();
}

std::vector<float> MelAnalyzer::mel_center_freqs_hz() const { return centers_hz_; }

Waveform resample(const Waveform& w, int target_rate) {
  ELF_CHECK(target_rate > 0, ErrorKind::kValidation, "resample: target rate must be positive");
  if (w.sample_rate == target_rate) return w;
  const int64_t n = w.size();
  const int64_t out_n = n * target_rate / w.sample_rate;
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.assign(static_cast<size_t>(out_n), 0.f);

  const double ratio = static_cast<double>(w.sample_rate) / target_rate;  // source per output
  const double scale = std::min(1.0, 1.0 / ratio);  // anti-aliasing cutoff when downsampling
  const int zero_crossings = 16;
  const double radius = zero_crossings / scale;

  for (int64_t t = 0; t < out_n; ++t) {
    const double center = t * ratio;
    const int64_t j0 = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(center - radius)));
    const int64_t j1 = std::min<int64_t>(n - 1, static_cast<int64_t>(std::floor(center + radius)));
    double acc = 0.0;
    for (int64_t j = j0; j <= j1; ++j) {
      const double x = (j - center) * scale;
      double k;
      if (std::fabs(x) < 1e-9) {
        k = 1.0;
      } else {
        const double px = M_PI * x;
        k = std::sin(px) / px;
      }
      // Hann-windowed sinc
      const double wnd = 0.5 * (1.0 + std::cos(M_PI * x / zero_crossings));
      acc += w.samples[static_cast<size_t>(j)] * k * wnd * scale;
    }
    out.samples[static_cast<size_t>(t)] = static_cast<float>(acc);
  }
  return out;
}

Waveform load_waveform(const std::string& path, int target_rate) {
  WavData raw = read_wav(path);
  Waveform mono;
  mono.sample_rate = raw.sample_rate;
  const size_t ch = static_cast<size_t>(raw.channels);
  const size_t n = raw.samples.size() / ch;
  mono.samples.resize(n);
  if (ch == 1) {
    mono.samples = std::move(raw.samples);
    mono.samples.resize(n);
  } else {
    for (size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (size_t c = 0; c < ch; ++c) acc += raw.samples[i * ch + c];
      mono.samples[i] = static_cast<float>(acc / static_cast<double>(ch));
    }
  }
  for (float s : mono.samples)
    ELF_CHECK(std::isfinite(s), ErrorKind::kFormat, "non-finite sample in " + path);
  return resample(mono, target_rate);
}

Waveform trim_silence(const Waveform& w, float threshold_db) {
  ELF_CHECK(threshold_db < 0.f, ErrorKind::kDomain, "trim_silence: threshold must be < 0 dB");
  const int64_t n = w.size();
  const int64_t win = std::max<int64_t>(1, w.sample_rate / 50);  // 20 ms
  const int64_t n_win = (n + win - 1) / win;
  ELF_CHECK(n > 0, ErrorKind::kInput, "trim_silence: empty waveform");

  std::vector<double> rms(static_cast<size_t>(n_win), 0.0);
  double peak = 0.0;
  for (int64_t i = 0; i < n_win; ++i) {
    const int64_t a = i * win;
    const int64_t b = std::min(n, a + win);
    double acc = 0.0;
    for (int64_t j = a; j < b; ++j) acc += static_cast<double>(w.samples[static_cast<size_t>(j)]) *
                                           w.samples[static_cast<size_t>(j)];
    rms[static_cast<size_t>(i)] = std::sqrt(acc / static_cast<double>(b - a));
    peak = std::max(peak, rms[static_cast<size_t>(i)]);
  }
  const double thr = peak * std::pow(10.0, threshold_db / 20.0);
  int64_t first = -1, last = -1;
  for (int64_t i = 0; i < n_win; ++i) {
    if (rms[static_cast<size_t>(i)] >= thr && rms[static_cast<size_t>(i)] > 0.0) {
      if (first < 0) first = i;
      last = i;
    }
  }
  ELF_CHECK(first >= 0, ErrorKind::kInput, "trim_silence: entirely silent input");

  Waveform out;
  out.sample_rate = w.sample_rate;
  const int64_t a = first * win;
  const int64_t b = std::min(n, (last + 1) * win);
  out.samples.assign(w.samples.begin() + a, w.samples.begin() + b);
  return out;
}

MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& cfg) {
  ELF_CHECK(w.sample_rate == cfg.sample_rate, ErrorKind::kValidation,
            "mel: waveform sample rate differs from config");
  MelAnalyzer analyzer(cfg);
  MelSpectrogram out;
  out.config = cfg;
  out.frames = analyzer.log_mel(w.samples);
  return out;
}

std::pair<Waveform, MelSpectrogram> sample_segment(const Waveform& w, int64_t segment_samples,
                                                   nn::Rng& rng, const MelConfig& cfg) {
  ELF_CHECK(segment_samples % cfg.hop_size == 0, ErrorKind::kValidation,
            "sample_segment: segment must be a multiple of hop_size");
  ELF_CHECK(w.size() >= segment_samples, ErrorKind::kDimension,
            "sample_segment: waveform shorter than the segment");
  const int64_t max_offset_hops = (w.size() - segment_samples) / cfg.hop_size;
  const int64_t offset =
      static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(max_offset_hops + 1))) *
      cfg.hop_size;
  Waveform seg;
  seg.sample_rate = w.sample_rate;
  seg.samples.assign(w.samples.begin() + offset, w.samples.begin() + offset + segment_samples);
  return {seg, mel_spectrogram(seg, cfg)};
}

}  // namespace elf::audio
