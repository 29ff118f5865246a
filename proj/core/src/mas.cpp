#include "elf/tts/mas.hpp"

#include <cmath>
#include <limits>

#include "elf/error.hpp"

namespace elf::tts {

int64_t Alignment::total_frames() const {
  int64_t n = 0;
  for (int d : durations) n += d;
  return n;
}

nn::Tensor Alignment::to_matrix(int64_t n_frames) const {
  ELF_CHECK(n_frames == total_frames(), ErrorKind::kDimension,
            "alignment: frame count mismatch");
  nn::Tensor m({static_cast<int64_t>(durations.size()), n_frames});
  int64_t t = 0;
  for (size_t l = 0; l < durations.size(); ++l)
    for (int d = 0; d < durations[l]; ++d) m.at2(static_cast<int64_t>(l), t++) = 1.f;
  return m;
}

std::vector<int> Alignment::frame_to_text() const {
  std::vector<int> out;
  out.reserve(static_cast<size_t>(total_frames()));
  for (size_t l = 0; l < durations.size(); ++l)
    for (int d = 0; d < durations[l]; ++d) out.push_back(static_cast<int>(l));
  return out;
}

Alignment monotonic_alignment_search(const nn::Tensor& loglik) {
  ELF_CHECK(loglik.rank() == 2, ErrorKind::kDimension, "mas: loglik must be [L, T]");
  const int64_t L = loglik.dim(0), T = loglik.dim(1);
  ELF_CHECK(L >= 1, ErrorKind::kInput, "mas: empty text");
  ELF_CHECK(T >= L, ErrorKind::kDimension,
            "mas: infeasible, fewer frames (" + std::to_string(T) + ") than text positions (" +
                std::to_string(L) + ")");
  ELF_CHECK(loglik.all_finite(), ErrorKind::kDomain, "mas: log-likelihoods must be finite");

  const double neg_inf = -std::numeric_limits<double>::infinity();
  // q[l*T + t]: best total with frame t assigned to text l.
  std::vector<double> q(static_cast<size_t>(L * T), neg_inf);
  for (int64_t t = 0; t < T; ++t) {
    if (t == 0)
      q[0] = loglik.at2(0, 0);
    else
      q[static_cast<size_t>(t)] = q[static_cast<size_t>(t - 1)] + loglik.at2(0, t);
  }
  for (int64_t l = 1; l < L; ++l) {
    for (int64_t t = l; t < T; ++t) {
      const double stay = q[static_cast<size_t>(l * T + t - 1)];
      const double advance = q[static_cast<size_t>((l - 1) * T + t - 1)];
      q[static_cast<size_t>(l * T + t)] = std::max(stay, advance) + loglik.at2(l, t);
    }
  }

  Alignment a;
  a.durations.assign(static_cast<size_t>(L), 0);
  int64_t l = L - 1;
  for (int64_t t = T - 1; t >= 0; --t) {
    ++a.durations[static_cast<size_t>(l)];
    if (t == 0) break;
    if (l == 0) continue;
    if (l == t) {
      --l;
      continue;
    }
    const double stay = q[static_cast<size_t>(l * T + t - 1)];
    const double advance = q[static_cast<size_t>((l - 1) * T + t - 1)];
    if (advance > stay) --l;  // ties stay on the current text position
  }
  return a;
}

}  // namespace elf::tts
