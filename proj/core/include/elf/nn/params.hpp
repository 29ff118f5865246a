#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "elf/nn/rng.hpp"
#include "elf/nn/tensor.hpp"

namespace elf::nn {

// A named trainable tensor plus its gradient and AdamW slots.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;

  void zero_grad() {
    if (grad.numel() != value.numel()) grad = Tensor::zeros(value.shape());
    std::fill(grad.vec().begin(), grad.vec().end(), 0.f);
  }
};

// Owns every parameter of one model. Iteration order is insertion order, so
// checkpoints and optimizer sweeps are deterministic.
class ParamStore {
 public:
  Param& add(const std::string& name, std::vector<int64_t> shape);
  Param& add(const std::string& name, Tensor init);

  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;
  Param& get(const std::string& name);

  size_t size() const { return items_.size(); }
  Param& operator[](size_t i) { return *items_[i]; }
  const Param& operator[](size_t i) const { return *items_[i]; }

  int64_t total_elements() const;
  void zero_grads();

  std::vector<std::string> names() const;

 private:
  std::vector<std::unique_ptr<Param>> items_;
  std::unordered_map<std::string, size_t> index_;
};

// Initialization helpers.
Tensor init_uniform_fan_in(std::vector<int64_t> shape, int64_t fan_in, Rng& rng);
Tensor init_normal(std::vector<int64_t> shape, float stddev, Rng& rng);

}  // namespace elf::nn
