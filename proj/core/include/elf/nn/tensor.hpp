#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace elf::nn {

// Dense row-major float32 tensor. Small by design: the training stack only
// needs rank <= 4 and explicit shapes.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    v_.assign(static_cast<size_t>(numel_of(shape_)), 0.f);
  }
  Tensor(std::vector<int64_t> shape, std::vector<float> data);

  static Tensor scalar(float v) { return Tensor({1}, {v}); }
  static Tensor zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int64_t> shape, float value);

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t numel() const { return static_cast<int64_t>(v_.size()); }

  float* data() { return v_.data(); }
  const float* data() const { return v_.data(); }
  std::vector<float>& vec() { return v_; }
  const std::vector<float>& vec() const { return v_; }

  float& at(int64_t i) { return v_[static_cast<size_t>(i)]; }
  float at(int64_t i) const { return v_[static_cast<size_t>(i)]; }
  float& at2(int64_t r, int64_t c) { return v_[static_cast<size_t>(r * shape_[1] + c)]; }
  float at2(int64_t r, int64_t c) const { return v_[static_cast<size_t>(r * shape_[1] + c)]; }

  float item() const;  // requires numel() == 1

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;

  // Reinterprets the buffer with a new shape of equal element count.
  Tensor reshaped(std::vector<int64_t> shape) const;

  std::string shape_str() const;

  static int64_t numel_of(const std::vector<int64_t>& shape);

 private:
  std::vector<int64_t> shape_;
  std::vector<float> v_;
};

}  // namespace elf::nn
