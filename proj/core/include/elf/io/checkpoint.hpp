#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "elf/nn/params.hpp"
#include "elf/nn/tensor.hpp"

namespace elf::io {

// Single-file binary container: magic "ELFK", format version, model kind tag,
// step counter, config snapshot (JSON text), RNG state, then named float32
// little-endian tensors, and a trailing CRC-32 of everything before it.
struct Checkpoint {
  std::string model_kind;  // "sfen" | "tts" | "fts"
  uint64_t step = 0;
  std::string config_json;
  std::array<uint64_t, 4> rng_state{};
  std::vector<std::pair<std::string, nn::Tensor>> tensors;

  const nn::Tensor* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);
// Reads only the header fields (kind/step/config); payload is CRC-checked too.
Checkpoint load_checkpoint(const std::string& path, const std::string& expected_kind);

// Parameter values plus, optionally, AdamW moment slots ("<name>#m"/"#v").
void pack_params(Checkpoint& ckpt, const nn::ParamStore& params, bool include_opt_state);
// Strict: every store parameter must be present with a matching shape.
void unpack_params(const Checkpoint& ckpt, nn::ParamStore& params, bool include_opt_state);

}  // namespace elf::io
