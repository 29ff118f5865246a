#pragma once

#include <vector>

#include "elf/nn/rng.hpp"
#include "elf/nn/tensor.hpp"

namespace elf::codebook {

// k-means++ seeding: first centroid uniform over points, each next drawn with
// probability proportional to squared distance to the nearest chosen one.
nn::Tensor kmeanspp_init(const nn::Tensor& points, int64_t k, nn::Rng& rng);

struct LloydResult {
  nn::Tensor centroids;             // [K, H]
  std::vector<int> assignments;     // [N]
  double sse = 0.0;
  std::vector<double> sse_history;  // SSE after each assignment pass (non-increasing)
  int iterations = 0;
};

// Lloyd refinement to an assignment fixpoint, relative-SSE tolerance, or the
// iteration cap. Empty clusters are repaired by reseeding with the point
// farthest from its current centroid.
LloydResult lloyd(const nn::Tensor& points, const nn::Tensor& init, int max_iters = 300,
                  double tol = 1e-6);

// Squared Euclidean distances [N, K] between rows of a and rows of b.
nn::Tensor pairwise_sqdist(const nn::Tensor& a, const nn::Tensor& b);

}  // namespace elf::codebook
