#pragma once

#include <string>
#include <utility>
#include <vector>

#include "elf/audio/audio.hpp"
#include "elf/nn/modules.hpp"
#include "elf/sfen/generator.hpp"

namespace elf::sfen {

struct SfenConfig {
  int latent_dim = 64;      // H; 2048 at paper scale
  int encoder_hidden = 192;  // 512 at paper scale
  int encoder_layers = 8;
  int encoder_kernel = 5;
  float lambda_sf = 45.f;
  int64_t segment_samples = 8192;
  float sigma_floor = 1e-4f;
  GeneratorSpec decoder;
  DiscriminatorSpec disc;

  // Frames must map back to sample counts: prod(upsample_factors) == hop.
  void validate(const audio::MelConfig& mel) const;
};

// Per-frame diagonal Gaussian over the latent space, rows = frames.
struct LatentFrameDistribution {
  nn::Tensor mu;     // [T, H]
  nn::Tensor sigma;  // [T, H], strictly positive
};

// 1x1 in-projection, gated dilated conv stack, 1x1 out-projection split into
// mu and log-scale halves.
struct SfenEncoder {
  nn::Conv1dLayer pre;
  nn::WaveNetStack wn;
  nn::Conv1dLayer proj;
  int latent_dim = 0;

  static SfenEncoder make(nn::ParamStore& ps, const std::string& name, int n_mels, int hidden,
                          int latent, int kernel, int layers, nn::Rng& rng);
  // mel [T, n_mels] -> (mu, log_scale), both [H, T]
  std::pair<nn::Var, nn::Var> forward(nn::Tape& t, nn::Var mel_rows) const;
  int receptive_half() const { return wn.receptive_half(); }
};

class SfenModel {
 public:
  SfenModel(const SfenConfig& cfg, const audio::MelConfig& mel, uint64_t seed);

  SfenModel(SfenModel&&) = default;
  SfenModel& operator=(SfenModel&&) = delete;

  const SfenConfig& config() const { return cfg_; }
  const audio::MelConfig& mel_config() const { return mel_; }
  const audio::MelAnalyzer& analyzer() const { return analyzer_; }

  nn::ParamStore& gen_params() { return gen_params_; }
  nn::ParamStore& disc_params() { return disc_params_; }
  const nn::ParamStore& gen_params() const { return gen_params_; }
  const nn::ParamStore& disc_params() const { return disc_params_; }

  const SfenEncoder& encoder() const { return encoder_; }
  const Generator& decoder() const { return decoder_; }
  const DiscriminatorSet& discriminators() const { return discs_; }

 private:
  SfenConfig cfg_;
  audio::MelConfig mel_;
  audio::MelAnalyzer analyzer_;
  nn::ParamStore gen_params_;
  nn::ParamStore disc_params_;
  SfenEncoder encoder_;
  Generator decoder_;
  DiscriminatorSet discs_;
};

// ---- operations ----

LatentFrameDistribution encode(const SfenModel& model, const audio::MelSpectrogram& mel);

// z = mu + sigma * noise (elementwise).
nn::Tensor reparameterize(const LatentFrameDistribution& dist, const nn::Tensor& noise);

// z [T, H] -> waveform of T * prod(upsample_factors) samples.
audio::Waveform decode(const SfenModel& model, const nn::Tensor& z);

// Closed-form KL(q || N(0, I)): mean over frames and dimensions of
// (mu^2 + sigma^2 - 1 - log sigma^2) / 2.
double kl_unit_gaussian(const LatentFrameDistribution& dist);

// L1 between the input mel and the mel of the reconstructed waveform.
double reconstruction_loss(const audio::MelSpectrogram& s, const audio::Waveform& y_hat);

// Least-squares GAN arithmetic, mean over sub-discriminator outputs.
double lsgan_disc_loss(const std::vector<nn::Tensor>& d_real,
                       const std::vector<nn::Tensor>& d_fake);
double lsgan_gen_adv(const std::vector<nn::Tensor>& d_fake);
// Sum over aligned layers of mean absolute difference.
double feature_matching_l1(const std::vector<nn::Tensor>& feat_real,
                           const std::vector<nn::Tensor>& feat_fake);

struct SfenGenLoss {
  double adv = 0, fm = 0, recon = 0, kl = 0, total = 0;
};
SfenGenLoss sfen_generator_loss(const std::vector<nn::Tensor>& d_fake,
                                const std::vector<nn::Tensor>& feat_real,
                                const std::vector<nn::Tensor>& feat_fake, const nn::Tensor& s,
                                const nn::Tensor& s_hat, double kl, float lambda_sf);

// ---- tape-side loss builders shared with the TTS trainer ----
nn::Var lsgan_disc_loss_t(const DiscOutputs& real, const DiscOutputs& fake);
nn::Var lsgan_gen_adv_t(const DiscOutputs& fake);
nn::Var feature_matching_t(const DiscOutputs& real, const DiscOutputs& fake);

}  // namespace elf::sfen
