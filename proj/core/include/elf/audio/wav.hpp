#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace elf::audio {

struct WavData {
  std::vector<float> samples;  // interleaved, in [-1, 1]
  int channels = 1;
  int sample_rate = 0;
};

// Reads 16-bit integer or 32-bit float PCM RIFF/WAVE files.
WavData read_wav(const std::string& path);

// Writes mono 16-bit PCM. Samples are clamped to [-1, 1] and rounded.
void write_wav_16bit(const std::string& path, const std::vector<float>& samples,
                     int sample_rate);

}  // namespace elf::audio
