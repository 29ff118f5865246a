#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "elf/codebook/codebook.hpp"
#include "elf/codebook/kmeans.hpp"
#include "elf/error.hpp"
#include "oracles.hpp"

using namespace elf;
using namespace elf::codebook;

namespace {

const std::string tmp_dir = []() {
  auto d = std::filesystem::temp_directory_path() / "elf_cb_test";
  std::filesystem::create_directories(d);
  return d.string();
}();

nn::Tensor points_from(const std::vector<std::vector<float>>& rows) {
  nn::Tensor t({static_cast<int64_t>(rows.size()), static_cast<int64_t>(rows[0].size())});
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[0].size(); ++j)
      t.at2(static_cast<int64_t>(i), static_cast<int64_t>(j)) = rows[i][j];
  return t;
}

bool row_in(const nn::Tensor& needle_src, int64_t row, const nn::Tensor& hay) {
  for (int64_t r = 0; r < hay.dim(0); ++r) {
    bool eq = true;
    for (int64_t c = 0; c < hay.dim(1); ++c)
      if (hay.at2(r, c) != needle_src.at2(row, c)) {
        eq = false;
        break;
      }
    if (eq) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("kmeans++ base cases") {
  nn::Tensor pts = points_from({{0, 0}, {0, 1}, {100, 0}});
  nn::Rng rng(1);
  nn::Tensor c1 = kmeanspp_init(pts, 1, rng);
  CHECK(row_in(c1, 0, pts));

  // K=N: centroids are a permutation of the points
  nn::Rng rng2(2);
  nn::Tensor c3 = kmeanspp_init(pts, 3, rng2);
  for (int64_t r = 0; r < 3; ++r) CHECK(row_in(c3, r, pts));
  for (int64_t r = 0; r < 3; ++r) CHECK(row_in(pts, r, c3));

  CHECK_THROWS_AS(kmeanspp_init(pts, 4, rng2), Error);
}

TEST_CASE("kmeans++ D^2 sampling strongly prefers the distant point") {
  nn::Tensor pts = points_from({{0, 0}, {0, 1}, {100, 0}});
  // After first pick (0,0): d2 = {0, 1, 10000}; P(pick (100,0)) = 10000/10001.
  int trials = 0, faraway = 0;
  for (uint64_t seed = 0; trials < 1500; ++seed) {
    nn::Rng rng(seed);
    nn::Tensor c = kmeanspp_init(pts, 2, rng);
    if (c.at2(0, 0) == 0.f && c.at2(0, 1) == 0.f) {
      ++trials;
      if (c.at2(1, 0) == 100.f) ++faraway;
    }
  }
  CHECK(static_cast<double>(faraway) / trials > 0.99);
}

TEST_CASE("lloyd solves the two-pair instance exactly") {
  nn::Tensor pts = points_from({{0, 0}, {0, 1}, {10, 0}, {10, 1}});
  nn::Tensor init = points_from({{0, 0}, {10, 0}});
  auto res = lloyd(pts, init);
  REQUIRE(res.centroids.dim(0) == 2);
  std::vector<std::pair<float, float>> cents;
  for (int64_t r = 0; r < 2; ++r) cents.push_back({res.centroids.at2(r, 0), res.centroids.at2(r, 1)});
  std::sort(cents.begin(), cents.end());
  CHECK(cents[0].first == doctest::Approx(0.0));
  CHECK(cents[0].second == doctest::Approx(0.5));
  CHECK(cents[1].first == doctest::Approx(10.0));
  CHECK(cents[1].second == doctest::Approx(0.5));
  CHECK(res.sse == doctest::Approx(1.0));
  // matches the exhaustive global optimum
  CHECK(res.sse == doctest::Approx(elf::testing::kmeans_global_optimum_sse(pts, 2)));
}

TEST_CASE("lloyd degenerate cases: K=N and identical points") {
  nn::Tensor pts = points_from({{1, 2}, {3, 4}, {5, 6}});
  auto res = lloyd(pts, pts);
  CHECK(res.sse == doctest::Approx(0.0));
  for (int64_t r = 0; r < 3; ++r) CHECK(row_in(res.centroids, r, pts));

  nn::Tensor same = points_from({{2, 2}, {2, 2}, {2, 2}});
  nn::Tensor init = points_from({{2, 2}});
  auto res1 = lloyd(same, init);
  CHECK(res1.sse == doctest::Approx(0.0));
  CHECK(res1.centroids.at2(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("lloyd SSE history is non-increasing on random instances") {
  nn::Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    nn::Tensor pts({30, 4});
    rng.fill_normal(pts.vec(), 0.f, 3.f);
    nn::Rng seed_rng(trial);
    nn::Tensor init = kmeanspp_init(pts, 5, seed_rng);
    auto res = lloyd(pts, init);
    for (size_t i = 1; i < res.sse_history.size(); ++i)
      CHECK(res.sse_history[i] <= res.sse_history[i - 1] + 1e-9);
  }
}

TEST_CASE("multi-restart build reaches the exhaustive optimum on small instances") {
  nn::Rng rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    const int64_t n = 6 + static_cast<int64_t>(rng.uniform_int(5));  // 6..10
    const int64_t k = 2 + static_cast<int64_t>(rng.uniform_int(2));  // 2..3
    MuFrameSet frames;
    frames.speaker_id = "s";
    frames.frames = nn::Tensor({n, 2});
    rng.fill_normal(frames.frames.vec(), 0.f, 2.f);
    BuildOptions opts;
    opts.k = k;
    opts.seed = 100 + static_cast<uint64_t>(trial);
    opts.restarts = 50;
    auto cb = build_codebook(frames, opts);
    REQUIRE(cb.clustered);
    // recompute SSE of the returned centroids
    nn::Tensor d = pairwise_sqdist(frames.frames, cb.vectors);
    double sse = 0;
    for (int64_t i = 0; i < n; ++i) {
      float best = d.at2(i, 0);
      for (int64_t c = 1; c < k; ++c) best = std::min(best, d.at2(i, c));
      sse += best;
    }
    const double opt = elf::testing::kmeans_global_optimum_sse(frames.frames, static_cast<int>(k));
    CHECK(sse <= opt * (1 + 1e-6) + 1e-9);
  }
}

TEST_CASE("build_codebook falls back to raw frames when N < K") {
  MuFrameSet frames;
  frames.speaker_id = "shorty";
  frames.frames = nn::Tensor({40, 8});
  nn::Rng rng(3);
  rng.fill_normal(frames.frames.vec());
  frames.clips.push_back({"c0", 0, 40});
  BuildOptions opts;
  opts.k = 512;
  opts.seed = 9;
  auto cb = build_codebook(frames, opts);
  CHECK_FALSE(cb.clustered);
  CHECK(cb.vectors.dim(0) == 40);
  CHECK(cb.provenance.n_source_frames == 40);
  CHECK(cb.provenance.n_source_clips == 1);
  for (int64_t i = 0; i < cb.vectors.numel(); ++i)
    CHECK(cb.vectors.at(i) == frames.frames.at(i));
}

TEST_CASE("build_codebook with N >= K returns K clustered centroids inside the hull") {
  MuFrameSet frames;
  frames.speaker_id = "spk";
  frames.frames = nn::Tensor({200, 4});
  nn::Rng rng(5);
  rng.fill_uniform(frames.frames.vec(), -2.f, 2.f);
  BuildOptions opts;
  opts.k = 16;
  opts.seed = 4;
  auto cb = build_codebook(frames, opts);
  CHECK(cb.clustered);
  CHECK(cb.vectors.dim(0) == 16);
  for (int64_t i = 0; i < cb.vectors.numel(); ++i) {
    CHECK(cb.vectors.at(i) >= -2.f);
    CHECK(cb.vectors.at(i) <= 2.f);
    CHECK(std::isfinite(cb.vectors.at(i)));
  }
}

TEST_CASE("rebuilding with the same seed is deterministic") {
  MuFrameSet frames;
  frames.speaker_id = "spk";
  frames.frames = nn::Tensor({100, 3});
  nn::Rng rng(6);
  rng.fill_normal(frames.frames.vec());
  BuildOptions opts;
  opts.k = 8;
  opts.seed = 77;
  auto a = build_codebook(frames, opts);
  auto b = build_codebook(frames, opts);
  CHECK(a.vectors.vec() == b.vectors.vec());
}

TEST_CASE("ELFC round-trip is bit-exact including provenance") {
  SpeakerCodebook cb;
  cb.speaker_id = "speaker-42";
  cb.vectors = nn::Tensor({7, 5});
  nn::Rng rng(8);
  rng.fill_normal(cb.vectors.vec());
  cb.clustered = true;
  cb.provenance = {12345, 17, 999};
  const std::string path = tmp_dir + "/cb.elfc";
  save_codebook(path, cb);
  auto loaded = load_codebook(path);
  CHECK(loaded.speaker_id == cb.speaker_id);
  CHECK(loaded.clustered == cb.clustered);
  CHECK(loaded.provenance.n_source_frames == cb.provenance.n_source_frames);
  CHECK(loaded.provenance.n_source_clips == cb.provenance.n_source_clips);
  CHECK(loaded.provenance.seed == cb.provenance.seed);
  CHECK(loaded.vectors.vec() == cb.vectors.vec());
}

TEST_CASE("truncation and corruption are detected") {
  SpeakerCodebook cb;
  cb.speaker_id = "x";
  cb.vectors = nn::Tensor({3, 3});
  const std::string path = tmp_dir + "/corrupt.elfc";
  save_codebook(path, cb);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 1));
  }
  CHECK_THROWS_AS(load_codebook(path), Error);

  bytes[20] = static_cast<char>(bytes[20] ^ 0x40);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  CHECK_THROWS_AS(load_codebook(path), Error);
}

TEST_CASE("paper-scale codebook payload is 4194304 bytes") {
  SpeakerCodebook cb;
  cb.speaker_id = "big";
  cb.vectors = nn::Tensor({512, 2048});
  cb.clustered = true;
  const std::string path = tmp_dir + "/big.elfc";
  save_codebook(path, cb);
  const auto file_size = std::filesystem::file_size(path);
  const size_t header = 4 + 4 + (4 + cb.speaker_id.size()) + 4 + 4 + 1 + 8 + 8 + 8;
  CHECK(file_size == header + 512 * 2048 * 4 + 4);
  auto loaded = load_codebook(path);
  CHECK(loaded.vectors.dim(0) == 512);
  CHECK(loaded.vectors.dim(1) == 2048);
}
