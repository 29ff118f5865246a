#pragma once

#include <cstdint>

#include "elf/nn/params.hpp"

namespace elf::nn {

struct AdamWConfig {
  float lr = 2e-4f;
  float beta1 = 0.8f;
  float beta2 = 0.99f;
  float eps = 1e-8f;
  float weight_decay = 0.01f;
};

// Decoupled weight decay Adam. Moment slots live inside the Params so they
// serialize with the checkpoint.
class AdamW {
 public:
  AdamW(ParamStore& params, AdamWConfig cfg) : params_(&params), cfg_(cfg) {}

  void step();
  void zero_grad() { params_->zero_grads(); }

  float lr() const { return cfg_.lr; }
  void set_lr(float lr) { cfg_.lr = lr; }

  int64_t step_count() const { return t_; }
  void set_step_count(int64_t t) { t_ = t; }

 private:
  ParamStore* params_;
  AdamWConfig cfg_;
  int64_t t_ = 0;
};

}  // namespace elf::nn
