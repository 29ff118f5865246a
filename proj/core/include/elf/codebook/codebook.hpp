#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "elf/nn/tensor.hpp"

namespace elf::codebook {

// All mu-frames of one speaker, concatenated in manifest order.
struct MuFrameSet {
  std::string speaker_id;
  nn::Tensor frames;  // [N, H]
  struct ClipRange {
    std::string clip_id;
    int64_t begin = 0;  // frame rows [begin, end)
    int64_t end = 0;
  };
  std::vector<ClipRange> clips;
};

struct CodebookProvenance {
  uint64_t n_source_frames = 0;
  uint64_t n_source_clips = 0;
  uint64_t seed = 0;
};

struct SpeakerCodebook {
  std::string speaker_id;
  nn::Tensor vectors;  // [K, H]
  bool clustered = false;
  CodebookProvenance provenance;
};

struct BuildOptions {
  int64_t k = 512;
  uint64_t seed = 0;
  int restarts = 1;    // best-of-n by final SSE
  int max_iters = 300;
  double tol = 1e-6;
};

// k-means++ seeding plus Lloyd refinement when N >= K; verbatim mu-frames
// (clustered=false) when the speaker has fewer frames than clusters.
SpeakerCodebook build_codebook(const MuFrameSet& frames, const BuildOptions& opts);

// ELFC file: magic "ELFC", format version u32, speaker id (u32 length +
// UTF-8), K u32, H u32, clustered u8, seed u64, n_source_frames u64,
// n_source_clips u64, row-major float32 payload, trailing CRC-32 of all
// preceding bytes. All integers little-endian.
void save_codebook(const std::string& path, const SpeakerCodebook& cb);
SpeakerCodebook load_codebook(const std::string& path);

}  // namespace elf::codebook
