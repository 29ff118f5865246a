#include <doctest.h>

#include <cmath>

#include "elf/nn/modules.hpp"
#include "elf/nn/optim.hpp"
#include "elf/nn/rng.hpp"
#include "gradcheck.hpp"

using namespace elf;
using nn::Tensor;
using nn::Var;

namespace {

Tensor randn(std::vector<int64_t> shape, nn::Rng& rng, float scale = 1.f) {
  Tensor t(std::move(shape));
  rng.fill_normal(t.vec(), 0.f, scale);
  return t;
}

// Reference conv1d with plain loops.
Tensor naive_conv1d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad,
                    int dil, int groups) {
  const int64_t cin = x.dim(0), T = x.dim(1);
  const int64_t cout = w.dim(0), cin_g = w.dim(1), k = w.dim(2);
  const int64_t to = (T + 2 * pad - dil * (k - 1) - 1) / stride + 1;
  const int64_t cout_g = cout / groups;
  Tensor y({cout, to});
  for (int64_t co = 0; co < cout; ++co) {
    const int64_t g = co / cout_g;
    for (int64_t t = 0; t < to; ++t) {
      double acc = b.numel() ? b.at(co) : 0.0;
      for (int64_t ci = 0; ci < cin_g; ++ci) {
        for (int64_t j = 0; j < k; ++j) {
          const int64_t src = t * stride - pad + j * dil;
          if (src >= 0 && src < T)
            acc += static_cast<double>(w.at((co * cin_g + ci) * k + j)) *
                   x.at((g * cin_g + ci) * T + src);
        }
      }
      y.at2(co, t) = static_cast<float>(acc);
    }
  }
  (void)cin;
  return y;
}

Tensor naive_convt1d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  const int64_t cin = x.dim(0), T = x.dim(1);
  const int64_t cout = w.dim(1), k = w.dim(2);
  const int64_t to = (T - 1) * stride - 2 * pad + k;
  Tensor y({cout, to});
  for (int64_t co = 0; co < cout; ++co)
    for (int64_t t = 0; t < to; ++t) y.at2(co, t) = b.numel() ? b.at(co) : 0.f;
  for (int64_t ci = 0; ci < cin; ++ci)
    for (int64_t t = 0; t < T; ++t)
      for (int64_t j = 0; j < k; ++j) {
        const int64_t dst = t * stride - pad + j;
        if (dst >= 0 && dst < to)
          for (int64_t co = 0; co < cout; ++co)
            y.at2(co, dst) += w.at((ci * cout + co) * k + j) * x.at2(ci, t);
      }
  return y;
}

}  // namespace

TEST_CASE("rng is deterministic and box-muller is finite") {
  nn::Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  nn::Rng c(7);
  double mean = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = c.normal();
    CHECK(std::isfinite(v));
    mean += v / n;
  }
  CHECK(std::fabs(mean) < 0.05);
}

TEST_CASE("uniform_int covers range without bias edge cases") {
  nn::Rng r(3);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) ++counts[r.uniform_int(5)];
  for (int c : counts) CHECK(c > 800);
}

TEST_CASE("matmul and linear match manual computation") {
  nn::Rng rng(1);
  Tensor A = randn({3, 4}, rng);
  Tensor B = randn({4, 5}, rng);
  nn::Tape t;
  Tensor C = nn::matmul(t.constant(A), t.constant(B)).val();
  for (int64_t i = 0; i < 3; ++i)
    for (int64_t j = 0; j < 5; ++j) {
      double acc = 0;
      for (int64_t k = 0; k < 4; ++k) acc += static_cast<double>(A.at2(i, k)) * B.at2(k, j);
      CHECK(C.at2(i, j) == doctest::Approx(acc).epsilon(1e-5));
    }
}

TEST_CASE("conv1d matches the naive reference") {
  nn::Rng rng(2);
  struct Case {
    int cin, cout, T, k, stride, pad, dil, groups;
  };
  for (const auto& c : {Case{3, 4, 11, 3, 1, 1, 1, 1}, Case{4, 6, 17, 5, 2, 2, 1, 2},
                        Case{2, 2, 9, 3, 1, 2, 2, 1}, Case{8, 8, 16, 41 % 7, 4, 1, 1, 4}}) {
    Tensor x = randn({c.cin, c.T}, rng);
    Tensor w = randn({c.cout, c.cin / c.groups, c.k}, rng);
    Tensor b = randn({c.cout}, rng);
    nn::Tape t;
    Tensor y = nn::conv1d(t.constant(x), t.constant(w), t.constant(b), c.stride, c.pad, c.dil,
                          c.groups)
                   .val();
    Tensor ref = naive_conv1d(x, w, b, c.stride, c.pad, c.dil, c.groups);
    REQUIRE(y.shape() == ref.shape());
    for (int64_t i = 0; i < y.numel(); ++i) CHECK(y.at(i) == doctest::Approx(ref.at(i)).epsilon(1e-4));
  }
}

TEST_CASE("conv_transpose1d matches the naive reference and length contract") {
  nn::Rng rng(3);
  const int cin = 3, cout = 2, T = 6, k = 8, stride = 4, pad = 2;
  Tensor x = randn({cin, T}, rng);
  Tensor w = randn({cin, cout, k}, rng);
  Tensor b = randn({cout}, rng);
  nn::Tape t;
  Tensor y = nn::conv_transpose1d(t.constant(x), t.constant(w), t.constant(b), stride, pad).val();
  Tensor ref = naive_convt1d(x, w, b, stride, pad);
  REQUIRE(y.shape() == ref.shape());
  CHECK(y.dim(1) == T * stride);  // pad=(k-s)/2 gives exact upsampling
  for (int64_t i = 0; i < y.numel(); ++i)
    CHECK(y.at(i) == doctest::Approx(ref.at(i)).epsilon(1e-4));
}

TEST_CASE("gradients of elementwise and reduction ops pass finite differences") {
  nn::Rng rng(4);
  nn::ParamStore ps;
  nn::Param& p = ps.add("x", randn({3, 5}, rng, 0.5f));
  auto loss = [&](nn::Tape& t) {
    Var x = t.param(p);
    Var y = nn::mul(nn::tanh_op(x), nn::sigmoid_op(nn::scale(x, 0.7f)));
    y = nn::add(y, nn::leaky_relu(x, 0.1f));
    y = nn::abs_op(y);
    return nn::mean(nn::mul(y, y));
  };
  auto rep = elf::testing::gradcheck(ps, loss, "x", 1e-3, 1e-2, 1e-4);
  INFO(rep.worst_name, " err=", rep.worst_err);
  CHECK(rep.ok());
}

TEST_CASE("gradients of conv ops pass finite differences") {
  nn::Rng rng(5);
  nn::ParamStore ps;
  nn::Param& w = ps.add("w", randn({4, 3, 3}, rng, 0.3f));
  nn::Param& b = ps.add("b", randn({4}, rng, 0.1f));
  nn::Param& wt = ps.add("wt", randn({4, 2, 6}, rng, 0.3f));
  Tensor x = randn({3, 12}, rng);
  auto loss = [&](nn::Tape& t) {
    Var h = nn::conv1d(t.constant(x), t.param(w), t.param(b), 1, 1, 1, 1);
    h = nn::leaky_relu(h, 0.1f);
    h = nn::conv_transpose1d(h, t.param(wt), std::nullopt, 2, 2);
    return nn::mean(nn::mul(h, h));
  };
  auto rep = elf::testing::gradcheck(ps, loss, "", 1e-3, 1e-2, 1e-4);
  INFO(rep.worst_name, " err=", rep.worst_err);
  CHECK(rep.ok());
}

TEST_CASE("gradients of conv2d and avg_pool pass finite differences") {
  nn::Rng rng(6);
  nn::ParamStore ps;
  nn::Param& w = ps.add("w", randn({3, 2, 5, 1}, rng, 0.3f));
  Tensor x = randn({2, 9, 3}, rng);
  auto loss = [&](nn::Tape& t) {
    Var h = nn::conv2d(t.constant(x), t.param(w), std::nullopt, 3, 1, 2, 0);
    Var flat = nn::reshape(h, {h.val().dim(0), h.val().numel() / h.val().dim(0)});
    flat = nn::avg_pool1d(flat, 2, 2, 1);
    return nn::mean(nn::mul(flat, flat));
  };
  auto rep = elf::testing::gradcheck(ps, loss, "", 1e-3, 1e-2, 1e-4);
  INFO(rep.worst_name, " err=", rep.worst_err);
  CHECK(rep.ok());
}

TEST_CASE("softmax, layer_norm, attention and transformer block pass gradcheck") {
  nn::Rng rng(7);
  nn::ParamStore ps;
  auto block = nn::TransformerBlock::make(ps, "blk", 8, 2, 16, rng);
  Tensor x = randn({5, 8}, rng);
  auto loss = [&](nn::Tape& t) {
    Var h = block.forward(t, t.constant(x));
    return nn::mean(nn::mul(h, h));
  };
  // small eps: the FFN relu kink makes central differences curvature-limited
  auto rep = elf::testing::gradcheck(ps, loss, "", 2e-3, 1e-2, 3e-3, 3);
  INFO(rep.worst_name, " err=", rep.worst_err);
  CHECK(rep.ok());
}

TEST_CASE("wavenet stack pass gradcheck and receptive field accounting") {
  nn::Rng rng(8);
  nn::ParamStore ps;
  auto wn = nn::WaveNetStack::make(ps, "wn", 4, 3, 3, 1, rng);
  CHECK(wn.receptive_half() == 3);
  Tensor x = randn({4, 7}, rng, 0.5f);
  auto loss = [&](nn::Tape& t) {
    Var h = wn.forward(t, t.constant(x));
    return nn::mean(nn::mul(h, h));
  };
  auto rep = elf::testing::gradcheck(ps, loss, "", 1e-2, 1e-2, 1e-3, 2);
  INFO(rep.worst_name, " err=", rep.worst_err);
  CHECK(rep.ok());
}

TEST_CASE("embedding and index_select route gradients to the right rows") {
  nn::Rng rng(9);
  nn::ParamStore ps;
  nn::Param& table = ps.add("t", randn({6, 3}, rng));
  nn::Tape t;
  Var e = nn::embedding(t.param(table), {1, 1, 4});
  Var sel = nn::index_select_rows(e, {0, 2, 2});
  Var loss = nn::sum(sel);
  t.backward(loss);
  // row 1 appears twice in the embedding, once selected; row 4 selected twice.
  CHECK(table.grad.at2(1, 0) == doctest::Approx(1.0));
  CHECK(table.grad.at2(4, 0) == doctest::Approx(2.0));
  CHECK(table.grad.at2(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("detach and grad_enabled stop gradient flow") {
  nn::Rng rng(10);
  nn::ParamStore ps;
  nn::Param& p = ps.add("p", randn({2, 2}, rng));
  {
    nn::Tape t;
    Var x = t.param(p);
    Var y = nn::detach(x);
    t.backward(nn::sum(nn::mul(y, y)));
    for (int64_t i = 0; i < p.grad.numel(); ++i) CHECK(p.grad.at(i) == 0.f);
  }
  ps.zero_grads();
  {
    nn::Tape t;
    t.set_grad_enabled(false);
    Var x = t.param(p);
    t.set_grad_enabled(true);
    Var z = t.param(p);
    t.backward(nn::sum(nn::mul(x, z)));
    // only the grad-enabled leaf accumulates
    for (int64_t i = 0; i < p.grad.numel(); ++i)
      CHECK(p.grad.at(i) == doctest::Approx(p.value.at(i)));
  }
}

TEST_CASE("adamw single step matches reference arithmetic") {
  nn::ParamStore ps;
  nn::Param& p = ps.add("p", Tensor({1}, {2.f}));
  p.grad = Tensor({1}, {0.5f});
  nn::AdamWConfig cfg;
  cfg.lr = 0.1f;
  cfg.beta1 = 0.8f;
  cfg.beta2 = 0.99f;
  cfg.eps = 1e-8f;
  cfg.weight_decay = 0.01f;
  nn::AdamW opt(ps, cfg);
  opt.step();
  const double m = 0.2 * 0.5, v = 0.01 * 0.25;
  const double mhat = m / 0.2, vhat = v / 0.01;
  const double expect = 2.0 - 0.1 * (mhat / (std::sqrt(vhat) + 1e-8) + 0.01 * 2.0);
  CHECK(p.value.at(0) == doctest::Approx(expect).epsilon(1e-5));
}

TEST_CASE("backward accumulates into params over repeated leaves") {
  nn::ParamStore ps;
  nn::Param& p = ps.add("p", Tensor({2}, {1.f, 2.f}));
  nn::Tape t;
  Var a = t.param(p);
  Var b = t.param(p);  // second leaf for the same parameter
  t.backward(nn::sum(nn::add(a, b)));
  CHECK(p.grad.at(0) == doctest::Approx(2.f));
  CHECK(p.grad.at(1) == doctest::Approx(2.f));
}
