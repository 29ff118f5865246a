#pragma once

#include <vector>

#include "elf/nn/tensor.hpp"

namespace elf::tts {

// Hard monotonic text-to-frame alignment: every frame belongs to exactly one
// text position, spans are contiguous and ordered, every text position gets
// at least one frame.
struct Alignment {
  std::vector<int> durations;  // per text position, >= 1, sums to T

  int64_t total_frames() const;
  nn::Tensor to_matrix(int64_t n_frames) const;  // [L, T] binary
  std::vector<int> frame_to_text() const;        // [T] text index per frame
};

// Dynamic program over log-likelihoods [L, T] maximizing the selected total;
// ties break toward staying on the current text position.
Alignment monotonic_alignment_search(const nn::Tensor& loglik);

}  // namespace elf::tts
