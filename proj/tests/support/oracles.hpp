#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "elf/nn/rng.hpp"
#include "elf/nn/tensor.hpp"

// Independent brute-force oracles. These deliberately avoid the library's
// algorithmic code paths: plain loops, exhaustive enumeration, Monte Carlo.
namespace elf::testing {

struct MasOracleResult {
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<int> best_durations;
};

// Enumerates every monotonic surjective alignment (composition of T into L
// positive parts) and returns the argmax by total selected log-likelihood.
inline MasOracleResult mas_bruteforce(const nn::Tensor& loglik) {
  const int64_t L = loglik.dim(0), T = loglik.dim(1);
  MasOracleResult res;
  std::vector<int> durs(static_cast<size_t>(L), 0);
  std::function<void(int64_t, int64_t)> rec = [&](int64_t l, int64_t used) {
    if (l == L - 1) {
      durs[static_cast<size_t>(l)] = static_cast<int>(T - used);
      double score = 0.0;
      int64_t t = 0;
      for (int64_t i = 0; i < L; ++i)
        for (int d = 0; d < durs[static_cast<size_t>(i)]; ++d) score += loglik.at2(i, t++);
      if (score > res.best_score) {
        res.best_score = score;
        res.best_durations = durs;
      }
      return;
    }
    const int64_t remaining_positions = L - l - 1;
    for (int64_t d = 1; used + d + remaining_positions <= T; ++d) {
      durs[static_cast<size_t>(l)] = static_cast<int>(d);
      rec(l + 1, used + d);
    }
  };
  rec(0, 0);
  return res;
}

inline double alignment_score(const nn::Tensor& loglik, const std::vector<int>& durations) {
  double score = 0.0;
  int64_t t = 0;
  for (size_t l = 0; l < durations.size(); ++l)
    for (int d = 0; d < durations[l]; ++d) score += loglik.at2(static_cast<int64_t>(l), t++);
  return score;
}

// Global-optimum SSE over all partitions into at most k clusters, by
// enumerating every labeling (feasible for N <= 12, K <= 3).
inline double kmeans_global_optimum_sse(const nn::Tensor& points, int k) {
  const int64_t n = points.dim(0), h = points.dim(1);
  std::vector<int> label(static_cast<size_t>(n), 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<double> sum(static_cast<size_t>(k * h), 0.0);
    std::vector<int> count(static_cast<size_t>(k), 0);
    for (int64_t i = 0; i < n; ++i) {
      ++count[static_cast<size_t>(label[static_cast<size_t>(i)])];
      for (int64_t j = 0; j < h; ++j)
        sum[static_cast<size_t>(label[static_cast<size_t>(i)] * h + j)] += points.at2(i, j);
    }
    double sse = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      const int c = label[static_cast<size_t>(i)];
      for (int64_t j = 0; j < h; ++j) {
        const double mean = sum[static_cast<size_t>(c * h + j)] / count[static_cast<size_t>(c)];
        const double d = points.at2(i, j) - mean;
        sse += d * d;
      }
    }
    best = std::min(best, sse);
    // next labeling
    int64_t pos = 0;
    while (pos < n) {
      if (++label[static_cast<size_t>(pos)] < k) break;
      label[static_cast<size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return best;
}

// Monte-Carlo estimate of E_q[log q(z) - log p(z)] per element for diagonal
// Gaussian q vs the unit Gaussian p. Returns (estimate, standard error).
inline std::pair<double, double> kl_monte_carlo(const nn::Tensor& mu, const nn::Tensor& sigma,
                                                int64_t draws, uint64_t seed) {
  nn::Rng rng(seed);
  const int64_t n = mu.numel();
  double acc = 0.0, acc2 = 0.0;
  for (int64_t d = 0; d < draws; ++d) {
    double sample = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      const double eps = rng.normal();
      const double s = sigma.at(i);
      const double z = mu.at(i) + s * eps;
      const double logq = -std::log(s) - 0.5 * std::log(2.0 * M_PI) - 0.5 * eps * eps;
      const double logp = -0.5 * std::log(2.0 * M_PI) - 0.5 * z * z;
      sample += logq - logp;
    }
    sample /= static_cast<double>(n);
    acc += sample;
    acc2 += sample * sample;
  }
  const double mean = acc / static_cast<double>(draws);
  const double var = acc2 / static_cast<double>(draws) - mean * mean;
  return {mean, std::sqrt(std::max(0.0, var) / static_cast<double>(draws))};
}

}  // namespace elf::testing
