#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "elf/nn/params.hpp"
#include "elf/nn/tape.hpp"

namespace elf::testing {

struct GradCheckReport {
  int checked = 0;
  int failed = 0;
  double worst_err = 0.0;
  std::string worst_name;

  bool ok() const { return checked > 0 && failed == 0; }
};

// Central finite differences against the analytic gradients of build_loss.
// A parameter element passes when |fd - an| <= atol + rtol * max(|fd|, |an|).
// stride > 1 samples every stride-th element to bound runtime.
inline GradCheckReport gradcheck(nn::ParamStore& params,
                                 const std::function<nn::Var(nn::Tape&)>& build_loss,
                                 const std::string& name_prefix, double eps = 1e-2,
                                 double rtol = 1e-2, double atol = 2e-3, int stride = 1) {
  params.zero_grads();
  {
    nn::Tape t;
    nn::Var loss = build_loss(t);
    t.backward(loss);
  }
  auto eval = [&]() {
    nn::Tape t;
    return static_cast<double>(build_loss(t).val().item());
  };

  GradCheckReport rep;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    nn::Param& p = params[pi];
    if (p.name.rfind(name_prefix, 0) != 0) continue;
    for (int64_t k = 0; k < p.value.numel(); k += stride) {
      const float saved = p.value.at(k);
      p.value.at(k) = saved + static_cast<float>(eps);
      const double f_plus = eval();
      p.value.at(k) = saved - static_cast<float>(eps);
      const double f_minus = eval();
      p.value.at(k) = saved;

      const double fd = (f_plus - f_minus) / (2.0 * eps);
      const double an = p.grad.at(k);
      const double err = std::fabs(fd - an);
      const double bound = atol + rtol * std::max(std::fabs(fd), std::fabs(an));
      ++rep.checked;
      if (err > bound) {
        ++rep.failed;
        if (err > rep.worst_err) {
          rep.worst_err = err;
          rep.worst_name = p.name + "[" + std::to_string(k) + "]";
        }
      } else if (rep.failed == 0 && err > rep.worst_err) {
        rep.worst_err = err;
        rep.worst_name = p.name + "[" + std::to_string(k) + "]";
      }
    }
  }
  return rep;
}

}  // namespace elf::testing
