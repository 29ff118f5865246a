#pragma once

#include <string>

#include "elf/nn/tensor.hpp"

namespace elf::io {

// Per-frame latent dump: magic "ELFL", version, speaker id, N, H, mu payload,
// sigma payload (row-major float32 LE), trailing CRC-32.
struct LatentDump {
  std::string speaker_id;
  nn::Tensor mu;     // [N, H]
  nn::Tensor sigma;  // [N, H]
};

void save_latents(const std::string& path, const LatentDump& dump);
LatentDump load_latents(const std::string& path);

}  // namespace elf::io
