#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "elf/io/checkpoint.hpp"
#include "elf/nn/optim.hpp"
#include "elf/sfen/sfen.hpp"

namespace elf::sfen {

struct TrainClip {
  std::string clip_id;
  std::string speaker_id;
  std::vector<float> samples;  // already trimmed/resampled
  std::string transcript;
};

struct SfenTrainOptions {
  int batch_size = 8;
  int64_t max_steps = 2000;
  int64_t checkpoint_interval = 1000;
  uint64_t seed = 1;
  nn::AdamWConfig optimizer;
  float lr_decay = 0.999f;  // per epoch
  std::string checkpoint_path;
  std::string loss_log_path;
  std::string resume_from;
  std::string config_snapshot_json;
  std::function<void(uint64_t, const std::map<std::string, double>&)> on_step;
};

// The generator-step loss graph: encode -> reparameterize -> decode ->
// mel L1 + KL + LSGAN adversarial + feature matching (discriminator frozen).
struct SfenLossGraph {
  nn::Var total, adv, fm, recon, kl;
};
SfenLossGraph build_sfen_generator_graph(nn::Tape& t, SfenModel& model, const nn::Tensor& mel,
                                         const std::vector<float>& segment,
                                         const nn::Tensor& noise);

// Alternating discriminator/generator steps on random hop-aligned segments.
// Returns the final step count; the final checkpoint is written to
// checkpoint_path when set.
uint64_t train_sfen(SfenModel& model, const std::vector<TrainClip>& clips,
                    const SfenTrainOptions& opts);

void save_sfen_checkpoint(const std::string& path, SfenModel& model, uint64_t step,
                          const std::string& config_json, const std::array<uint64_t, 4>& rng_state);

}  // namespace elf::sfen
