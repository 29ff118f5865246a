#include "elf/sfen/generator.hpp"

#include "elf/error.hpp"

namespace elf::sfen {

int GeneratorSpec::upsample_product() const {
  int p = 1;
  for (int f : upsample_factors) p *= f;
  return p;
}

void GeneratorSpec::validate() const {
  ELF_CHECK(!upsample_factors.empty() && upsample_kernels.size() == upsample_factors.size(),
            ErrorKind::kValidation, "generator: kernel/factor list size mismatch");
  ELF_CHECK(resblock_kernels.size() == resblock_dilations.size(), ErrorKind::kValidation,
            "generator: resblock kernel/dilation list size mismatch");
  for (size_t i = 0; i < upsample_factors.size(); ++i) {
    ELF_CHECK(upsample_factors[i] >= 1, ErrorKind::kValidation, "generator: factor must be >= 1");
    ELF_CHECK((upsample_kernels[i] - upsample_factors[i]) % 2 == 0, ErrorKind::kValidation,
              "generator: kernel minus factor must be even for exact upsampling");
  }
  ELF_CHECK(base_width >> upsample_factors.size() >= 1, ErrorKind::kValidation,
            "generator: base_width too small for the stage count");
}

bool GeneratorSpec::upsampling_compatible(const GeneratorSpec& other) const {
  return base_width == other.base_width && upsample_kernels == other.upsample_kernels &&
         upsample_factors == other.upsample_factors &&
         resblock_kernels == other.resblock_kernels &&
         resblock_dilations == other.resblock_dilations;
}

ResBlock ResBlock::make(nn::ParamStore& ps, const std::string& name, int channels, int kernel,
                        const std::vector<int>& dilations, nn::Rng& rng) {
  ResBlock rb;
  for (size_t i = 0; i < dilations.size(); ++i) {
    const int d = dilations[i];
    rb.convs1.push_back(nn::Conv1dLayer::make(ps, name + ".c1." + std::to_string(i), channels,
                                              channels, kernel, rng, 1, (kernel - 1) * d / 2, d,
                                              1, nn::Init::kNormal001));
    rb.convs2.push_back(nn::Conv1dLayer::make(ps, name + ".c2." + std::to_string(i), channels,
                                              channels, kernel, rng, 1, (kernel - 1) / 2, 1, 1,
                                              nn::Init::kNormal001));
  }
  return rb;
}

nn::Var ResBlock::forward(nn::Tape& t, nn::Var x) const {
  for (size_t i = 0; i < convs1.size(); ++i) {
    nn::Var xt = nn::leaky_relu(x, 0.1f);
    xt = convs1[i].forward(t, xt);
    xt = nn::leaky_relu(xt, 0.1f);
    xt = convs2[i].forward(t, xt);
    x = nn::add(x, xt);
  }
  return x;
}

Generator Generator::make(nn::ParamStore& ps, const std::string& name, const GeneratorSpec& spec,
                          nn::Rng& rng) {
  spec.validate();
  Generator g;
  g.spec = spec;
  g.pre = nn::Conv1dLayer::make(ps, name + ".pre", spec.in_channels, spec.base_width, 7, rng, 1,
                                3, 1, 1, nn::Init::kNormal001);
  const int n = static_cast<int>(spec.upsample_factors.size());
  for (int i = 0; i < n; ++i) {
    const int cin = spec.base_width >> i;
    const int cout = spec.base_width >> (i + 1);
    const int k = spec.upsample_kernels[static_cast<size_t>(i)];
    const int f = spec.upsample_factors[static_cast<size_t>(i)];
    g.ups.push_back(nn::ConvT1dLayer::make(ps, name + ".up" + std::to_string(i), cin, cout, k, f,
                                           (k - f) / 2, rng));
    std::vector<ResBlock> group;
    for (size_t kk = 0; kk < spec.resblock_kernels.size(); ++kk) {
      group.push_back(ResBlock::make(
          ps, name + ".res" + std::to_string(i) + ".k" + std::to_string(kk), cout,
          spec.resblock_kernels[kk], spec.resblock_dilations[kk], rng));
    }
    g.stages.push_back(std::move(group));
  }
  g.post = nn::Conv1dLayer::make(ps, name + ".post", spec.base_width >> n, 1, 7, rng, 1, 3, 1, 1,
                                 nn::Init::kNormal001);
  return g;
}

nn::Var Generator::forward(nn::Tape& t, nn::Var z) const {
  nn::Var x = pre.forward(t, z);
  for (size_t i = 0; i < ups.size(); ++i) {
    x = nn::leaky_relu(x, 0.1f);
    x = ups[i].forward(t, x);
    nn::Var acc;
    for (const ResBlock& rb : stages[i]) {
      nn::Var y = rb.forward(t, x);
      acc = acc.valid() ? nn::add(acc, y) : y;
    }
    x = nn::scale(acc, 1.f / static_cast<float>(stages[i].size()));
  }
  x = nn::leaky_relu(x, 0.1f);
  x = post.forward(t, x);
  x = nn::tanh_op(x);
  return nn::reshape(x, {x.val().dim(1)});
}

void DiscriminatorSpec::validate() const {
  ELF_CHECK(!periods.empty() || n_scales > 0, ErrorKind::kValidation,
            "discriminator: need at least one sub-discriminator");
  ELF_CHECK(base_width >= 4 && base_width % 4 == 0, ErrorKind::kValidation,
            "discriminator: base_width must be a positive multiple of 4");
}

PeriodDiscriminator PeriodDiscriminator::make(nn::ParamStore& ps, const std::string& name,
                                              int period, int width, nn::Rng& rng) {
  PeriodDiscriminator d;
  d.period = period;
  const int w = width;
  auto conv = [&](const std::string& n, int cin, int cout, int stride) {
    return nn::Conv2dLayer::make(ps, n, cin, cout, 5, 1, stride, 1, 2, 0, rng,
                                 nn::Init::kNormal001);
  };
  d.convs.push_back(conv(name + ".c0", 1, w, 3));
  d.convs.push_back(conv(name + ".c1", w, 2 * w, 3));
  d.convs.push_back(conv(name + ".c2", 2 * w, 4 * w, 3));
  d.convs.push_back(nn::Conv2dLayer::make(ps, name + ".c3", 4 * w, 4 * w, 5, 1, 1, 1, 2, 0, rng,
                                          nn::Init::kNormal001));
  d.post = nn::Conv2dLayer::make(ps, name + ".post", 4 * w, 1, 3, 1, 1, 1, 1, 0, rng,
                                 nn::Init::kNormal001);
  return d;
}

void PeriodDiscriminator::forward(nn::Tape& t, nn::Var wave, std::vector<nn::Var>& feats,
                                  nn::Var& score) const {
  const int64_t n = wave.val().numel();
  const int64_t rows = (n + period - 1) / period;
  nn::Var x = nn::reshape(wave, {n, 1});
  if (rows * period != n) {
    nn::Var pad = wave.tape->constant(nn::Tensor({rows * period - n, 1}));
    x = nn::concat_rows({x, pad});
  }
  x = nn::reshape(x, {1, rows, static_cast<int64_t>(period)});
  for (const auto& c : convs) {
    x = nn::leaky_relu(c.forward(t, x), 0.1f);
    feats.push_back(x);
  }
  x = post.forward(t, x);
  feats.push_back(x);
  score = x;
}

ScaleDiscriminator ScaleDiscriminator::make(nn::ParamStore& ps, const std::string& name,
                                            int width, int pool_passes, nn::Rng& rng) {
  ScaleDiscriminator d;
  d.pool_passes = pool_passes;
  const int w = width;
  d.convs.push_back(nn::Conv1dLayer::make(ps, name + ".c0", 1, w, 15, rng, 1, 7, 1, 1,
                                          nn::Init::kNormal001));
  d.convs.push_back(nn::Conv1dLayer::make(ps, name + ".c1", w, 2 * w, 41, rng, 4, 20, 1, 2,
                                          nn::Init::kNormal001));
  d.convs.push_back(nn::Conv1dLayer::make(ps, name + ".c2", 2 * w, 4 * w, 41, rng, 4, 20, 1, 4,
                                          nn::Init::kNormal001));
  d.convs.push_back(nn::Conv1dLayer::make(ps, name + ".c3", 4 * w, 4 * w, 5, rng, 1, 2, 1, 1,
                                          nn::Init::kNormal001));
  d.post = nn::Conv1dLayer::make(ps, name + ".post", 4 * w, 1, 3, rng, 1, 1, 1, 1,
                                 nn::Init::kNormal001);
  return d;
}

void ScaleDiscriminator::forward(nn::Tape& t, nn::Var wave, std::vector<nn::Var>& feats,
                                 nn::Var& score) const {
  nn::Var x = nn::reshape(wave, {1, wave.val().numel()});
  for (int i = 0; i < pool_passes; ++i) x = nn::avg_pool1d(x, 4, 2, 2);
  for (const auto& c : convs) {
    x = nn::leaky_relu(c.forward(t, x), 0.1f);
    feats.push_back(x);
  }
  x = post.forward(t, x);
  feats.push_back(x);
  score = x;
}

DiscriminatorSet DiscriminatorSet::make(nn::ParamStore& ps, const std::string& name,
                                        const DiscriminatorSpec& spec, nn::Rng& rng) {
  spec.validate();
  DiscriminatorSet set;
  set.spec = spec;
  for (size_t i = 0; i < spec.periods.size(); ++i) {
    set.period_discs.push_back(PeriodDiscriminator::make(
        ps, name + ".mpd" + std::to_string(i), spec.periods[i], spec.base_width, rng));
  }
  for (int i = 0; i < spec.n_scales; ++i) {
    set.scale_discs.push_back(
        ScaleDiscriminator::make(ps, name + ".msd" + std::to_string(i), spec.base_width, i, rng));
  }
  return set;
}

DiscOutputs DiscriminatorSet::forward(nn::Tape& t, nn::Var wave) const {
  DiscOutputs out;
  for (const auto& d : period_discs) {
    std::vector<nn::Var> feats;
    nn::Var score;
    d.forward(t, wave, feats, score);
    out.scores.push_back(score);
    out.feats.push_back(std::move(feats));
  }
  for (const auto& d : scale_discs) {
    std::vector<nn::Var> feats;
    nn::Var score;
    d.forward(t, wave, feats, score);
    out.scores.push_back(score);
    out.feats.push_back(std::move(feats));
  }
  return out;
}

}  // namespace elf::sfen
