#include "elf/sfen/sfen.hpp"

#include <cmath>

#include "elf/error.hpp"

namespace elf::sfen {

void SfenConfig::validate(const audio::MelConfig& mel) const {
  mel.validate();
  decoder.validate();
  disc.validate();
  ELF_CHECK(latent_dim >= 1 && encoder_hidden >= 1 && encoder_layers >= 1,
            ErrorKind::kValidation, "sfen: encoder sizes must be positive");
  ELF_CHECK(encoder_kernel % 2 == 1, ErrorKind::kValidation, "sfen: encoder kernel must be odd");
  ELF_CHECK(lambda_sf > 0.f, ErrorKind::kValidation, "sfen: lambda_sf must be positive");
  ELF_CHECK(decoder.in_channels == latent_dim, ErrorKind::kValidation,
            "sfen: decoder in_channels must equal latent_dim");
  ELF_CHECK(decoder.upsample_product() == mel.hop_size, ErrorKind::kValidation,
            "sfen: product of upsample factors (" + std::to_string(decoder.upsample_product()) +
                ") must equal hop_size (" + std::to_string(mel.hop_size) + ")");
  ELF_CHECK(segment_samples > 0 && segment_samples % mel.hop_size == 0, ErrorKind::kValidation,
            "sfen: segment_samples must be a positive multiple of hop_size");
  ELF_CHECK(sigma_floor > 0.f, ErrorKind::kValidation, "sfen: sigma_floor must be positive");
}

SfenEncoder SfenEncoder::make(nn::ParamStore& ps, const std::string& name, int n_mels,
                              int hidden, int latent, int kernel, int layers, nn::Rng& rng) {
  SfenEncoder e;
  e.latent_dim = latent;
  e.pre = nn::Conv1dLayer::make(ps, name + ".pre", n_mels, hidden, 1, rng);
  e.wn = nn::WaveNetStack::make(ps, name + ".wn", hidden, kernel, layers, 1, rng);
  e.proj = nn::Conv1dLayer::make(ps, name + ".proj", hidden, 2 * latent, 1, rng);
  return e;
}

std::pair<nn::Var, nn::Var> SfenEncoder::forward(nn::Tape& t, nn::Var mel_rows) const {
  nn::Var x = nn::transpose2d(mel_rows);  // [n_mels, T]
  x = pre.forward(t, x);
  x = wn.forward(t, x);
  x = proj.forward(t, x);  // [2H, T]
  return {nn::slice_rows(x, 0, latent_dim), nn::slice_rows(x, latent_dim, latent_dim)};
}

SfenModel::SfenModel(const SfenConfig& cfg, const audio::MelConfig& mel, uint64_t seed)
    : cfg_(cfg), mel_(mel), analyzer_(mel) {
  cfg_.validate(mel_);
  nn::Rng rng(seed);
  encoder_ = SfenEncoder::make(gen_params_, "enc", mel_.n_mels, cfg_.encoder_hidden,
                               cfg_.latent_dim, cfg_.encoder_kernel, cfg_.encoder_layers, rng);
  decoder_ = Generator::make(gen_params_, "dec", cfg_.decoder, rng);
  discs_ = DiscriminatorSet::make(disc_params_, "disc", cfg_.disc, rng);
}

LatentFrameDistribution encode(const SfenModel& model, const audio::MelSpectrogram& mel) {
  ELF_CHECK(mel.frames.rank() == 2 && mel.frames.dim(1) == model.mel_config().n_mels,
            ErrorKind::kDimension,
            "encode: mel has " + mel.frames.shape_str() + ", expected [T," +
                std::to_string(model.mel_config().n_mels) + "]");
  nn::Tape t;
  t.set_grad_enabled(false);
  auto [mu, ls] = model.encoder().forward(t, t.constant(mel.frames));
  nn::Var sigma = nn::clamp_min(nn::exp_op(ls), model.config().sigma_floor);
  LatentFrameDistribution dist;
  dist.mu = nn::transpose2d(mu).val();
  dist.sigma = nn::transpose2d(sigma).val();
  return dist;
}

nn::Tensor reparameterize(const LatentFrameDistribution& dist, const nn::Tensor& noise) {
  ELF_CHECK(dist.mu.same_shape(dist.sigma) && dist.mu.same_shape(noise), ErrorKind::kDimension,
            "reparameterize: mu/sigma/noise shapes must match");
  nn::Tensor z(dist.mu.shape());
  for (int64_t i = 0; i < z.numel(); ++i)
    z.at(i) = dist.mu.at(i) + dist.sigma.at(i) * noise.at(i);
  return z;
}

audio::Waveform decode(const SfenModel& model, const nn::Tensor& z) {
  ELF_CHECK(z.rank() == 2 && z.dim(1) == model.config().latent_dim, ErrorKind::kDimension,
            "decode: z has " + z.shape_str() + ", expected [T," +
                std::to_string(model.config().latent_dim) + "]");
  ELF_CHECK(z.all_finite(), ErrorKind::kDomain, "decode: z must be finite");
  nn::Tape t;
  t.set_grad_enabled(false);
  nn::Var wave = model.decoder().forward(t, nn::transpose2d(t.constant(z)));
  audio::Waveform out;
  out.sample_rate = model.mel_config().sample_rate;
  out.samples = wave.val().vec();
  return out;
}

double kl_unit_gaussian(const LatentFrameDistribution& dist) {
  ELF_CHECK(dist.mu.same_shape(dist.sigma), ErrorKind::kDimension,
            "kl: mu/sigma shapes must match");
  double acc = 0.0;
  for (int64_t i = 0; i < dist.mu.numel(); ++i) {
    const double mu = dist.mu.at(i);
    const double sg = dist.sigma.at(i);
    ELF_CHECK(sg > 0.0, ErrorKind::kDomain, "kl: sigma must be strictly positive");
    acc += 0.5 * (mu * mu + sg * sg - 1.0 - 2.0 * std::log(sg));
  }
  return acc / static_cast<double>(dist.mu.numel());
}

double reconstruction_loss(const audio::MelSpectrogram& s, const audio::Waveform& y_hat) {
  const audio::MelAnalyzer analyzer(s.config);
  const nn::Tensor s_hat = analyzer.log_mel(y_hat.samples);
  ELF_CHECK(s_hat.shape() == s.frames.shape(), ErrorKind::kDimension,
            "reconstruction_loss: mel(y_hat) " + s_hat.shape_str() + " vs s " +
                s.frames.shape_str());
  double acc = 0.0;
  for (int64_t i = 0; i < s_hat.numel(); ++i)
    acc += std::fabs(static_cast<double>(s.frames.at(i)) - s_hat.at(i));
  return acc / static_cast<double>(s_hat.numel());
}

namespace {

double mean_sq_dev(const nn::Tensor& x, double target) {
  double acc = 0.0;
  for (int64_t i = 0; i < x.numel(); ++i) {
    const double d = x.at(i) - target;
    acc += d * d;
  }
  return acc / static_cast<double>(x.numel());
}

}  // namespace

double lsgan_disc_loss(const std::vector<nn::Tensor>& d_real,
                       const std::vector<nn::Tensor>& d_fake) {
  ELF_CHECK(!d_real.empty() && d_real.size() == d_fake.size(), ErrorKind::kDimension,
            "lsgan_disc_loss: real/fake output lists must align");
  double acc = 0.0;
  for (size_t i = 0; i < d_real.size(); ++i)
    acc += mean_sq_dev(d_real[i], 1.0) + mean_sq_dev(d_fake[i], 0.0);
  return acc / static_cast<double>(d_real.size());
}

double lsgan_gen_adv(const std::vector<nn::Tensor>& d_fake) {
  ELF_CHECK(!d_fake.empty(), ErrorKind::kDimension, "lsgan_gen_adv: empty output list");
  double acc = 0.0;
  for (const auto& t : d_fake) acc += mean_sq_dev(t, 1.0);
  return acc / static_cast<double>(d_fake.size());
}

double feature_matching_l1(const std::vector<nn::Tensor>& feat_real,
                           const std::vector<nn::Tensor>& feat_fake) {
  ELF_CHECK(feat_real.size() == feat_fake.size(), ErrorKind::kDimension,
            "feature_matching: layer count mismatch");
  double acc = 0.0;
  for (size_t l = 0; l < feat_real.size(); ++l) {
    ELF_CHECK(feat_real[l].shape() == feat_fake[l].shape(), ErrorKind::kDimension,
              "feature_matching: layer " + std::to_string(l) + " shape mismatch");
    double layer = 0.0;
    for (int64_t i = 0; i < feat_real[l].numel(); ++i)
      layer += std::fabs(static_cast<double>(feat_real[l].at(i)) - feat_fake[l].at(i));
    acc += layer / static_cast<double>(feat_real[l].numel());
  }
  return acc;
}

SfenGenLoss sfen_generator_loss(const std::vector<nn::Tensor>& d_fake,
                                const std::vector<nn::Tensor>& feat_real,
                                const std::vector<nn::Tensor>& feat_fake, const nn::Tensor& s,
                                const nn::Tensor& s_hat, double kl, float lambda_sf) {
  ELF_CHECK(s.shape() == s_hat.shape(), ErrorKind::kDimension,
            "sfen_generator_loss: s/s_hat shape mismatch");
  SfenGenLoss out;
  out.adv = lsgan_gen_adv(d_fake);
  out.fm = feature_matching_l1(feat_real, feat_fake);
  double recon = 0.0;
  for (int64_t i = 0; i < s.numel(); ++i)
    recon += std::fabs(static_cast<double>(s.at(i)) - s_hat.at(i));
  out.recon = recon / static_cast<double>(s.numel());
  out.kl = kl;
  out.total = out.adv + out.fm + static_cast<double>(lambda_sf) * out.recon + out.kl;
  return out;
}

nn::Var lsgan_disc_loss_t(const DiscOutputs& real, const DiscOutputs& fake) {
  nn::Var acc;
  for (size_t i = 0; i < real.scores.size(); ++i) {
    nn::Var r = nn::mean(nn::mul(nn::add_scalar(real.scores[i], -1.f),
                                 nn::add_scalar(real.scores[i], -1.f)));
    nn::Var f = nn::mean(nn::mul(fake.scores[i], fake.scores[i]));
    nn::Var term = nn::add(r, f);
    acc = acc.valid() ? nn::add(acc, term) : term;
  }
  return nn::scale(acc, 1.f / static_cast<float>(real.scores.size()));
}

nn::Var lsgan_gen_adv_t(const DiscOutputs& fake) {
  nn::Var acc;
  for (const nn::Var& s : fake.scores) {
    nn::Var term = nn::mean(nn::mul(nn::add_scalar(s, -1.f), nn::add_scalar(s, -1.f)));
    acc = acc.valid() ? nn::add(acc, term) : term;
  }
  return nn::scale(acc, 1.f / static_cast<float>(fake.scores.size()));
}

nn::Var feature_matching_t(const DiscOutputs& real, const DiscOutputs& fake) {
  nn::Var acc;
  for (size_t d = 0; d < real.feats.size(); ++d) {
    for (size_t l = 0; l < real.feats[d].size(); ++l) {
      nn::Var term = nn::mean(nn::abs_op(nn::sub(real.feats[d][l], fake.feats[d][l])));
      acc = acc.valid() ? nn::add(acc, term) : term;
    }
  }
  return acc;
}

}  // namespace elf::sfen
