#pragma once

#include <string>
#include <utility>
#include <vector>

#include "elf/nn/rng.hpp"
#include "elf/nn/tape.hpp"
#include "elf/nn/tensor.hpp"

namespace elf::audio {

struct Waveform {
  std::vector<float> samples;  // mono, amplitudes in [-1, 1]
  int sample_rate = 22050;

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
};

struct MelConfig {
  int fft_size = 2048;
  int window_size = 2048;
  int hop_size = 1024;
  int n_mels = 80;
  int sample_rate = 22050;
  float log_floor = 1e-5f;

  void validate() const;
  bool operator==(const MelConfig&) const = default;
};

// Log-mel energies, frames x n_mels. Frame-count convention: the waveform is
// reflect-padded by (fft_size - hop_size)/2 on each side and frames start at
// t*hop_size, so T = floor(len/hop_size) for every input length.
struct MelSpectrogram {
  nn::Tensor frames;  // [T, n_mels]
  MelConfig config;

  int64_t n_frames() const { return frames.rank() == 2 ? frames.dim(0) : 0; }
};

// Precomputed window, DFT matrices, reflect-pad gather plan, and Slaney-style
// mel filterbank. The tape overload is the training-loss path; the plain
// overload runs the identical computation on a throwaway tape, so dataset
// features and differentiable features are bit-equal by construction.
class MelAnalyzer {
 public:
  explicit MelAnalyzer(const MelConfig& cfg);

  const MelConfig& config() const { return cfg_; }
  int64_t frame_count(int64_t n_samples) const;

  nn::Var log_mel(nn::Tape& t, nn::Var wave) const;  // wave [N] -> [T, n_mels]
  nn::Tensor log_mel(const std::vector<float>& samples) const;

  // Center frequency (Hz) of each mel filter.
  std::vector<float> mel_center_freqs_hz() const;
  const nn::Tensor& filterbank() const { return mel_fb_; }  // [bins, n_mels]

 private:
  MelConfig cfg_;
  int pad_ = 0;
  nn::Tensor window_;   // [win]
  nn::Tensor dft_cos_;  // [win, bins]
  nn::Tensor dft_sin_;  // [win, bins]
  nn::Tensor mel_fb_;   // [bins, n_mels]
  std::vector<float> centers_hz_;
};

// Loads a PCM WAV file, averages channels to mono, and resamples to
// target_rate with a windowed-sinc kernel (identity when rates match).
Waveform load_waveform(const std::string& path, int target_rate);

// Resamples a mono waveform; output length is floor(len * target / source).
Waveform resample(const Waveform& w, int target_rate);

// Removes leading/trailing regions whose 20 ms RMS falls below threshold_db
// relative to the loudest window. Throws kInput when everything is silent.
Waveform trim_silence(const Waveform& w, float threshold_db = -40.f);

MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& cfg);

// Uniformly random hop-aligned window of the waveform plus its mel frames.
std::pair<Waveform, MelSpectrogram> sample_segment(const Waveform& w, int64_t segment_samples,
                                                   nn::Rng& rng, const MelConfig& cfg);

}  // namespace elf::audio
