#pragma once

#include <string>
#include <vector>

#include "elf/nn/modules.hpp"

namespace elf::sfen {

// Upsampling waveform generator: 1x1-ish pre conv, transposed-conv stages each
// followed by a multi-receptive-field residual group, and a tanh post conv.
struct GeneratorSpec {
  int in_channels = 64;
  int base_width = 128;
  std::vector<int> upsample_kernels{16, 16, 8, 8};
  std::vector<int> upsample_factors{8, 8, 4, 4};
  std::vector<int> resblock_kernels{3, 7};
  std::vector<std::vector<int>> resblock_dilations{{1, 3}, {1, 3}};

  int upsample_product() const;
  int stage_channels(int stage) const { return base_width >> (stage + 1); }
  void validate() const;
  bool upsampling_compatible(const GeneratorSpec& other) const;
};

struct ResBlock {
  std::vector<nn::Conv1dLayer> convs1;  // dilated
  std::vector<nn::Conv1dLayer> convs2;  // dilation 1

  static ResBlock make(nn::ParamStore& ps, const std::string& name, int channels, int kernel,
                       const std::vector<int>& dilations, nn::Rng& rng);
  nn::Var forward(nn::Tape& t, nn::Var x) const;
};

struct Generator {
  GeneratorSpec spec;
  nn::Conv1dLayer pre;
  std::vector<nn::ConvT1dLayer> ups;
  std::vector<std::vector<ResBlock>> stages;  // [stage][kernel]
  nn::Conv1dLayer post;

  static Generator make(nn::ParamStore& ps, const std::string& name, const GeneratorSpec& spec,
                        nn::Rng& rng);
  // z[in_channels, T] -> waveform [T * upsample_product()]
  nn::Var forward(nn::Tape& t, nn::Var z) const;
};

// Multi-period + multi-scale discriminator set at configurable widths.
struct DiscriminatorSpec {
  std::vector<int> periods{2, 3, 5, 7, 11};
  int n_scales = 3;       // MSD copies; scale i sees the waveform avg-pooled i times
  int base_width = 16;
  void validate() const;
};

struct DiscOutputs {
  std::vector<nn::Var> scores;              // one per sub-discriminator
  std::vector<std::vector<nn::Var>> feats;  // per sub-discriminator layer list
};

struct PeriodDiscriminator {
  int period = 2;
  std::vector<nn::Conv2dLayer> convs;
  nn::Conv2dLayer post;

  static PeriodDiscriminator make(nn::ParamStore& ps, const std::string& name, int period,
                                  int width, nn::Rng& rng);
  void forward(nn::Tape& t, nn::Var wave, std::vector<nn::Var>& feats, nn::Var& score) const;
};

struct ScaleDiscriminator {
  std::vector<nn::Conv1dLayer> convs;
  nn::Conv1dLayer post;
  int pool_passes = 0;

  static ScaleDiscriminator make(nn::ParamStore& ps, const std::string& name, int width,
                                 int pool_passes, nn::Rng& rng);
  void forward(nn::Tape& t, nn::Var wave, std::vector<nn::Var>& feats, nn::Var& score) const;
};

struct DiscriminatorSet {
  DiscriminatorSpec spec;
  std::vector<PeriodDiscriminator> period_discs;
  std::vector<ScaleDiscriminator> scale_discs;

  static DiscriminatorSet make(nn::ParamStore& ps, const std::string& name,
                               const DiscriminatorSpec& spec, nn::Rng& rng);
  // wave: [N] samples
  DiscOutputs forward(nn::Tape& t, nn::Var wave) const;
  size_t count() const { return period_discs.size() + scale_discs.size(); }
};

}  // namespace elf::sfen
