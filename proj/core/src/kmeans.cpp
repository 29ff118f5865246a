#include "elf/codebook/kmeans.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "elf/error.hpp"

namespace elf::codebook {

using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const MatF>;

nn::Tensor pairwise_sqdist(const nn::Tensor& a, const nn::Tensor& b) {
  ELF_CHECK(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(1), ErrorKind::kDimension,
            "pairwise_sqdist: " + a.shape_str() + " vs " + b.shape_str());
  const int64_t n = a.dim(0), k = b.dim(0), h = a.dim(1);
  nn::Tensor out({n, k});
  MapC A(a.data(), n, h);
  MapC B(b.data(), k, h);
  Eigen::Map<MatF> D(out.data(), n, k);
  D.noalias() = -2.f * (A * B.transpose());
  const Eigen::VectorXf an = A.rowwise().squaredNorm();
  const Eigen::VectorXf bn = B.rowwise().squaredNorm();
  D.colwise() += an;
  D.rowwise() += bn.transpose();
  // Rounding can push tiny negatives; distances are nonnegative by definition.
  for (int64_t i = 0; i < out.numel(); ++i) out.at(i) = std::max(0.f, out.at(i));
  return out;
}

nn::Tensor kmeanspp_init(const nn::Tensor& points, int64_t k, nn::Rng& rng) {
  ELF_CHECK(points.rank() == 2, ErrorKind::kDimension, "kmeans++: points must be [N,H]");
  const int64_t n = points.dim(0), h = points.dim(1);
  ELF_CHECK(n >= k && k >= 1, ErrorKind::kDimension,
            "kmeans++: need N >= K >= 1, got N=" + std::to_string(n) +
                " K=" + std::to_string(k));

  nn::Tensor centroids({k, h});
  std::vector<double> d2(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(static_cast<size_t>(n), false);

  auto copy_point = [&](int64_t ci, int64_t pi) {
    for (int64_t j = 0; j < h; ++j) centroids.at2(ci, j) = points.at2(pi, j);
  };
  auto update_d2 = [&](int64_t pi) {
    for (int64_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int64_t j = 0; j < h; ++j) {
        const double d = static_cast<double>(points.at2(i, j)) - points.at2(pi, j);
        acc += d * d;
      }
      d2[static_cast<size_t>(i)] = std::min(d2[static_cast<size_t>(i)], acc);
    }
  };

  int64_t first = static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(n)));
  copy_point(0, first);
  chosen[static_cast<size_t>(first)] = true;
  update_d2(first);

  for (int64_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (int64_t i = 0; i < n; ++i) total += d2[static_cast<size_t>(i)];
    int64_t pick = -1;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      for (int64_t i = 0; i < n; ++i) {
        acc += d2[static_cast<size_t>(i)];
        if (acc >= r && d2[static_cast<size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {  // numerical tail: take the last point with positive mass
        for (int64_t i = n - 1; i >= 0; --i)
          if (d2[static_cast<size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
      }
    }
    if (pick < 0) {
      // All remaining distances are zero (duplicate points); fall back to a
      // uniform pick among not-yet-chosen indices.
      std::vector<int64_t> free;
      for (int64_t i = 0; i < n; ++i)
        if (!chosen[static_cast<size_t>(i)]) free.push_back(i);
      ELF_CHECK(!free.empty(), ErrorKind::kDimension, "kmeans++: ran out of points");
      pick = free[rng.uniform_int(free.size())];
    }
    copy_point(c, pick);
    chosen[static_cast<size_t>(pick)] = true;
    update_d2(pick);
  }
  return centroids;
}

LloydResult lloyd(const nn::Tensor& points, const nn::Tensor& init, int max_iters, double tol) {
  ELF_CHECK(points.rank() == 2 && init.rank() == 2 && points.dim(1) == init.dim(1),
            ErrorKind::kDimension, "lloyd: shape mismatch");
  const int64_t n = points.dim(0), h = points.dim(1), k = init.dim(0);
  ELF_CHECK(n >= k && k >= 1, ErrorKind::kDimension, "lloyd: need N >= K >= 1");

  LloydResult res;
  res.centroids = init;
  res.assignments.assign(static_cast<size_t>(n), -1);
  double prev_sse = std::numeric_limits<double>::infinity();

  for (int it = 0; it < max_iters; ++it) {
    const nn::Tensor d = pairwise_sqdist(points, res.centroids);
    bool changed = false;
    double sse = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      int best = 0;
      float best_d = d.at2(i, 0);
      for (int64_t c = 1; c < k; ++c) {
        if (d.at2(i, c) < best_d) {
          best_d = d.at2(i, c);
          best = static_cast<int>(c);
        }
      }
      if (res.assignments[static_cast<size_t>(i)] != best) {
        res.assignments[static_cast<size_t>(i)] = best;
        changed = true;
      }
      sse += best_d;
    }
    res.sse = sse;
    res.sse_history.push_back(sse);
    res.iterations = it + 1;

    const bool converged_sse = std::isfinite(prev_sse) && prev_sse - sse <= tol * std::max(prev_sse, 1e-300);
    if (!changed || converged_sse) break;
    prev_sse = sse;

    // Mean update.
    nn::Tensor sums({k, h});
    std::vector<int64_t> counts(static_cast<size_t>(k), 0);
    for (int64_t i = 0; i < n; ++i) {
      const int c = res.assignments[static_cast<size_t>(i)];
      ++counts[static_cast<size_t>(c)];
      for (int64_t j = 0; j < h; ++j) sums.at2(c, j) += points.at2(i, j);
    }
    for (int64_t c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] > 0) {
        const float inv = 1.f / static_cast<float>(counts[static_cast<size_t>(c)]);
        for (int64_t j = 0; j < h; ++j) res.centroids.at2(c, j) = sums.at2(c, j) * inv;
      }
    }
    // Empty-cluster repair: reseed with the point farthest from its centroid.
    for (int64_t c = 0; c < k; ++c) {
      if (counts[static_cast<size_t>(c)] != 0) continue;
      const nn::Tensor dd = pairwise_sqdist(points, res.centroids);
      int64_t far = 0;
      double far_d = -1.0;
      for (int64_t i = 0; i < n; ++i) {
        const double di = dd.at2(i, res.assignments[static_cast<size_t>(i)]);
        if (di > far_d) {
          far_d = di;
          far = i;
        }
      }
      for (int64_t j = 0; j < h; ++j) res.centroids.at2(c, j) = points.at2(far, j);
    }
  }
  return res;
}

}  // namespace elf::codebook
