#include "elf/nn/tensor.hpp"

#include <cmath>
#include <sstream>

#include "elf/error.hpp"

namespace elf::nn {

Tensor::Tensor(std::vector<int64_t> shape, std::vector<float> data)
    : shape_(std::move(shape)), v_(std::move(data)) {
  ELF_CHECK(static_cast<int64_t>(v_.size()) == numel_of(shape_), ErrorKind::kDimension,
            "tensor data size does not match shape " + shape_str());
}

Tensor Tensor::full(std::vector<int64_t> shape, float value) {
  Tensor t(std::move(shape));
  for (auto& v : t.v_) v = value;
  return t;
}

float Tensor::item() const {
  ELF_CHECK(numel() == 1, ErrorKind::kDimension, "item() on non-scalar tensor " + shape_str());
  return v_[0];
}

bool Tensor::all_finite() const {
  for (float x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

Tensor Tensor::reshaped(std::vector<int64_t> shape) const {
  ELF_CHECK(numel_of(shape) == numel(), ErrorKind::kDimension,
            "reshape element count mismatch for " + shape_str());
  Tensor t;
  t.shape_ = std::move(shape);
  t.v_ = v_;
  return t;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << ']';
  return os.str();
}

int64_t Tensor::numel_of(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

}  // namespace elf::nn
