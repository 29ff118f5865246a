#include "elf/nn/optim.hpp"

#include <cmath>

namespace elf::nn {

void AdamW::step() {
  ++t_;
  const float bc1 = 1.f - std::pow(cfg_.beta1, static_cast<float>(t_));
  const float bc2 = 1.f - std::pow(cfg_.beta2, static_cast<float>(t_));
  for (size_t i = 0; i < params_->size(); ++i) {
    Param& p = (*params_)[i];
    float* th = p.value.data();
    const float* g = p.grad.data();
    float* m = p.adam_m.data();
    float* v = p.adam_v.data();
    const int64_t n = p.value.numel();
    for (int64_t k = 0; k < n; ++k) {
      m[k] = cfg_.beta1 * m[k] + (1.f - cfg_.beta1) * g[k];
      v[k] = cfg_.beta2 * v[k] + (1.f - cfg_.beta2) * g[k] * g[k];
      const float mhat = m[k] / bc1;
      const float vhat = v[k] / bc2;
      th[k] -= cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * th[k]);
    }
  }
}

}  // namespace elf::nn
