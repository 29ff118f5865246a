#include "elf/nn/tape.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>

#include "elf/error.hpp"

namespace elf::nn {

using MatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatF>;
using MapC = Eigen::Map<const MatF>;

const Tensor& Var::val() const { return tape->val(id); }

Var Tape::constant(Tensor v) {
  nodes_.push_back(Node{std::move(v), {}, {}, nullptr, nullptr, false});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::param(Param& p) {
  if (!grad_enabled_) return constant(p.value);
  Node n;
  n.val = p.value;
  n.leaf_param = &p;
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Tensor& Tape::grad_buf(int id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.grad.numel() != n.val.numel()) n.grad = Tensor::zeros(n.val.shape());
  return n.grad;
}

Tensor Tape::grad_of(Var v) {
  Node& n = nodes_[static_cast<size_t>(v.id)];
  if (n.grad.numel() != n.val.numel()) return Tensor::zeros(n.val.shape());
  return n.grad;
}

Var Tape::push(Tensor val, std::vector<int> parents, BackFn back) {
  Node n;
  n.val = std::move(val);
  n.parents = std::move(parents);
  for (int p : n.parents) {
    if (nodes_[static_cast<size_t>(p)].needs_grad) {
      n.needs_grad = true;
      break;
    }
  }
  if (n.needs_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

void Tape::backward(Var root) {
  ELF_CHECK(root.tape == this, ErrorKind::kInput, "backward: var from another tape");
  ELF_CHECK(val(root.id).numel() == 1, ErrorKind::kDimension, "backward root must be scalar");
  grad_buf(root.id).at(0) = 1.f;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (!n.needs_grad || n.grad.numel() == 0) continue;
    if (n.leaf_param != nullptr) {
      Param& p = *n.leaf_param;
      if (p.grad.numel() != p.value.numel()) p.zero_grad();
      float* g = p.grad.data();
      const float* d = n.grad.data();
      for (int64_t k = 0; k < n.grad.numel(); ++k) g[k] += d[k];
    } else if (n.back) {
      n.back(*this, i);
    }
  }
}

namespace {

void check_same_shape(Var a, Var b, const char* op) {
  ELF_CHECK(a.val().same_shape(b.val()), ErrorKind::kDimension,
            std::string(op) + ": shape mismatch " + a.val().shape_str() + " vs " +
                b.val().shape_str());
}

Var unary(Var a, std::function<float(float)> f, std::function<float(float, float)> dfdx_times_g) {
  Tensor out(a.val().shape());
  const float* x = a.val().data();
  float* y = out.data();
  const int64_t n = out.numel();
  for (int64_t i = 0; i < n; ++i) y[i] = f(x[i]);
  return a.tape->push(std::move(out), {a.id}, [pa = a.id, dfdx_times_g](Tape& t, int self) {
    if (!t.needs_grad(pa)) return;
    const Tensor& g = t.grad_buf(self);
    Tensor& ga = t.grad_buf(pa);
    const float* x = t.val(pa).data();
    for (int64_t i = 0; i < g.numel(); ++i) ga.at(i) += dfdx_times_g(x[i], g.at(i));
  });
}

}  // namespace

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  Tensor out(a.val().shape());
  const int64_t n = out.numel();
  for (int64_t i = 0; i < n; ++i) out.at(i) = a.val().at(i) + b.val().at(i);
  return a.tape->push(std::move(out), {a.id, b.id}, [pa = a.id, pb = b.id](Tape& t, int self) {
    const Tensor& g = t.grad_buf(self);
    for (int p : {pa, pb}) {
      if (!t.needs_grad(p)) continue;
      Tensor& gp = t.grad_buf(p);
      for (int64_t i = 0; i < g.numel(); ++i) gp.at(i) += g.at(i);
    }
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out.at(i) = a.val().at(i) - b.val().at(i);
  return a.tape->push(std::move(out), {a.id, b.id}, [pa = a.id, pb = b.id](Tape& t, int self) {
    const Tensor& g = t.grad_buf(self);
    if (t.needs_grad(pa)) {
      Tensor& ga = t.grad_buf(pa);
      for (int64_t i = 0; i < g.numel(); ++i) ga.at(i) += g.at(i);
    }
    if (t.needs_grad(pb)) {
      Tensor& gb = t.grad_buf(pb);
      for (int64_t i = 0; i < g.numel(); ++i) gb.at(i) -= g.at(i);
    }
  });
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out.at(i) = a.val().at(i) * b.val().at(i);
  return a.tape->push(std::move(out), {a.id, b.id}, [pa = a.id, pb = b.id](Tape& t, int self) {
    const Tensor& g = t.grad_buf(self);
    if (t.needs_grad(pa)) {
      Tensor& ga = t.grad_buf(pa);
      const float* bv = t.val(pb).data();
      for (int64_t i = 0; i < g.numel(); ++i) ga.at(i) += g.at(i) * bv[i];
    }
    if (t.needs_grad(pb)) {
      Tensor& gb = t.grad_buf(pb);
      const float* av = t.val(pa).data();
      for (int64_t i = 0; i < g.numel(); ++i) gb.at(i) += g.at(i) * av[i];
    }
  });
}

Var add_scalar(Var a, float c) {
  return unary(
      a, [c](float x) { return x + c; }, [](float, float g) { return g; });
}

Var scale(Var a, float c) {
  return unary(
      a, [c](float x) { return x * c; }, [c](float, float g) { return c * g; });
}

Var neg(Var a) { return scale(a, -1.f); }

Var exp_op(Var a) {
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out.at(i) = std::exp(a.val().at(i));
  return a.tape->push(std::move(out), {a.id}, [pa = a.id](Tape& t, int self) {
    if (!t.needs_grad(pa)) return;
    const Tensor& g = t.grad_buf(self);
    const Tensor& y = t.val(self);
    Tensor& ga = t.grad_buf(pa);
    for (int64_t i = 0; i < g.numel(); ++i) ga.at(i) += g.at(i) * y.at(i);
  });
}

Var log_op(Var a) {
  return unary(
      a, [](float x) { return std::log(x); }, [](float x, float g) { return g / x; });
}

Var tanh_op(Var a) {
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out.at(i) = std::tanh(a.val().at(i));
  return a.tape->push(std::move(out), {a.id}, [pa = a.id](Tape& t, int self) {
    if (!t.needs_grad(pa)) return;
    const Tensor& g = t.grad_buf(self);
    const Tensor& y = t.val(self);
    Tensor& ga = t.grad_buf(pa);
    for (int64_t i = 0; i < g.numel(); ++i) ga.at(i) += g.at(i) * (1.f - y.at(i) * y.at(i));
  });
}

Var sigmoid_op(Var a) {
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out.at(i) = 1.f / (1.f + std::exp(-a.val().at(i)));
  return a.tape->push(std::move(out), {a.id}, [pa = a.id](Tape& t, int self) {
    if (!t.needs_grad(pa)) return;
    const Tensor& g = t.grad_buf(self);
    const Tensor& y = t.val(self);
    Tensor& ga = t.grad_buf(pa);
    for (int64_t i = 0; i < g.numel(); ++i) ga.at(i) += g.at(i) * y.at(i) * (1.f - y.at(i));
  });
}

Var leaky_relu(Var a, float slope) {
  return unary(
      a, [slope](float x) { return x >= 0.f ? x : slope * x; },
      [slope](float x, float g) { return x >= 0.f ? g : slope * g; });
}

Var abs_op(Var a) {
  return unary(
      a, [](float x) { return std::fabs(x); },
      [](float x, float g) { return x > 0.f ? g : (x < 0.f ? -g : 0.f); });
}

Var sqrt_op(Var a) {
  Tensor out(a.val().shape());
  for (int64_t i = 0; i < out.numel(); ++i) out.at(i) = std::sqrt(a.val().at(i));
  return a.tape->push(std::move(out), {a.id}, [pa = a.id](Tape& t, int self) {
    if (!t.needs_grad(pa)) return;
    const Tensor& g = t.grad_buf(self);
    const Tensor& y = t.val(self);
    Tensor& ga = t.grad_buf(pa);
    for (int64_t i = 0; i < g.numel(); ++i) {
      const float denom = std::max(y.at(i), 1e-6f);
      ga.at(i) += g.at(i) * 0.5f / denom;
    }
  });
}

Var clamp_min(Var a, float floor) {
  return unary(
      a, [floor](float x) { return x < floor ? floor : x; },
      [floor](float x, float g) { return x > floor ? g : 0.f; });
}

Var sum(Var a) {
  double acc = 0.0;
  for (int64_t i = 0; i < a.val().numel(); ++i) acc += a.val().at(i);
  return a.tape->push(Tensor::scalar(static_cast<float>(acc)), {a.id},
                      [pa = a.id](Tape& t, int self) {
                        if (!t.needs_grad(pa)) return;
                        const float g = t.grad_buf(self).at(0);
                        Tensor& ga = t.grad_buf(pa);
                        for (int64_t i = 0; i < ga.numel(); ++i) ga.at(i) += g;
                      });
}

Var mean(Var a) {
  const int64_t n = a.val().numel();
  double acc = 0.0;
  for (int64_t i = 0; i < n; ++i) acc += a.val().at(i);
  return a.tape->push(Tensor::scalar(static_cast<float>(acc / static_cast<double>(n))), {a.id},
                      [pa = a.id, n](Tape& t, int self) {
                        if (!t.needs_grad(pa)) return;
                        const float g = t.grad_buf(self).at(0) / static_cast<float>(n);
                        Tensor& ga = t.grad_buf(pa);
                        for (int64_t i = 0; i < ga.numel(); ++i) ga.at(i) += g;
                      });
}

Var matmul(Var a, Var b) {
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  ELF_CHECK(A.rank() == 2 && B.rank() == 2 && A.dim(1) == B.dim(0), ErrorKind::kDimension,
            "matmul: incompatible shapes " + A.shape_str() + " x " + B.shape_str());
  Tensor out({A.dim(0), B.dim(1)});
  MapM(out.data(), A.dim(0), B.dim(1)) =
      MapC(A.data(), A.dim(0), A.dim(1)) * MapC(B.data(), B.dim(0), B.dim(1));
  return a.tape->push(std::move(out), {a.id, b.id}, [pa = a.id, pb = b.id](Tape& t, int self) {
    const Tensor& g = t.grad_buf(self);
    const Tensor& A = t.val(pa);
    const Tensor& B = t.val(pb);
    MapC G(g.data(), A.dim(0), B.dim(1));
    if (t.needs_grad(pa)) {
      Tensor& ga = t.grad_buf(pa);
      MapM(ga.data(), A.dim(0), A.dim(1)).noalias() += G * MapC(B.data(), B.dim(0), B.dim(1));
    }
    if (t.needs_grad(pb)) {
      Tensor& gb = t.grad_buf(pb);
      MapM(gb.data(), B.dim(0), B.dim(1)).noalias() +=
          MapC(A.data(), A.dim(0), A.dim(1)).transpose() * G;
    }
  });
}

Var transpose2d(Var a) {
  const Tensor& A = a.val();
  ELF_CHECK(A.rank() == 2, ErrorKind::kDimension, "transpose2d expects rank 2");
  Tensor out({A.dim(1), A.dim(0)});
  MapM(out.data(), A.dim(1), A.dim(0)) = MapC(A.data(), A.dim(0), A.dim(1)).transpose();
  return a.tape->push(std::move(out), {a.id}, [pa = a.id](Tape& t, int self) {
    if (!t.needs_grad(pa)) return;
    const Tensor& g = t.grad_buf(self);
    Tensor& ga = t.grad_buf(pa);
    MapM(ga.data(), ga.dim(0), ga.dim(1)).noalias() +=
        MapC(g.data(), g.dim(0), g.dim(1)).transpose();
  });
}

Var linear(Var x, Var w, std::optional<Var> b) {
  const Tensor& X = x.val();
  const Tensor& W = w.val();
  ELF_CHECK(X.rank() == 2 && W.rank() == 2 && X.dim(1) == W.dim(1), ErrorKind::kDimension,
            "linear: x" + X.shape_str() + " w" + W.shape_str());
  const int64_t T = X.dim(0), out_f = W.dim(0);
  Tensor out({T, out_f});
  MapM Y(out.data(), T, out_f);
  Y.noalias() = MapC(X.data(), T, X.dim(1)) * MapC(W.data(), out_f, W.dim(1)).transpose();
  if (b) {
    ELF_CHECK(b->val().numel() == out_f, ErrorKind::kDimension, "linear: bias size");
    Y.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(b->val().data(), out_f);
  }
  std::vector<int> parents{x.id, w.id};
  if (b) parents.push_back(b->id);
  const int bias_id = b ? b->id : -1;
  return x.tape->push(std::move(out), std::move(parents),
                      [px = x.id, pw = w.id, bias_id](Tape& t, int self) {
                        const Tensor& g = t.grad_buf(self);
                        const Tensor& X = t.val(px);
                        const Tensor& W = t.val(pw);
                        MapC G(g.data(), g.dim(0), g.dim(1));
                        if (t.needs_grad(px)) {
                          MapM(t.grad_buf(px).data(), X.dim(0), X.dim(1)).noalias() +=
                              G * MapC(W.data(), W.dim(0), W.dim(1));
                        }
                        if (t.needs_grad(pw)) {
                          MapM(t.grad_buf(pw).data(), W.dim(0), W.dim(1)).noalias() +=
                              G.transpose() * MapC(X.data(), X.dim(0), X.dim(1));
                        }
                        if (bias_id >= 0 && t.needs_grad(bias_id)) {
                          Tensor& gb = t.grad_buf(bias_id);
                          Eigen::Map<Eigen::RowVectorXf>(gb.data(), gb.numel()) +=
                              G.colwise().sum();
                        }
                      });
}

Var bmm_nt(Var a, Var b) {
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  ELF_CHECK(A.rank() == 3 && B.rank() == 3 && A.dim(0) == B.dim(0) && A.dim(2) == B.dim(2),
            ErrorKind::kDimension, "bmm_nt: " + A.shape_str() + " x " + B.shape_str());
  const int64_t h = A.dim(0), m = A.dim(1), k = A.dim(2), n = B.dim(1);
  Tensor out({h, m, n});
  for (int64_t i = 0; i < h; ++i) {
    MapM(out.data() + i * m * n, m, n).noalias() =
        MapC(A.data() + i * m * k, m, k) * MapC(B.data() + i * n * k, n, k).transpose();
  }
  return a.tape->push(std::move(out), {a.id, b.id},
                      [pa = a.id, pb = b.id, h, m, n, k](Tape& t, int self) {
                        const Tensor& g = t.grad_buf(self);
                        const Tensor& A = t.val(pa);
                        const Tensor& B = t.val(pb);
                        for (int64_t i = 0; i < h; ++i) {
                          MapC G(g.data() + i * m * n, m, n);
                          if (t.needs_grad(pa)) {
                            MapM(t.grad_buf(pa).data() + i * m * k, m, k).noalias() +=
                                G * MapC(B.data() + i * n * k, n, k);
                          }
                          if (t.needs_grad(pb)) {
                            MapM(t.grad_buf(pb).data() + i * n * k, n, k).noalias() +=
                                G.transpose() * MapC(A.data() + i * m * k, m, k);
                          }
                        }
                      });
}

Var bmm_nn(Var a, Var b) {
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  ELF_CHECK(A.rank() == 3 && B.rank() == 3 && A.dim(0) == B.dim(0) && A.dim(2) == B.dim(1),
            ErrorKind::kDimension, "bmm_nn: " + A.shape_str() + " x " + B.shape_str());
  const int64_t h = A.dim(0), m = A.dim(1), n = A.dim(2), k = B.dim(2);
  Tensor out({h, m, k});
  for (int64_t i = 0; i < h; ++i) {
    MapM(out.data() + i * m * k, m, k).noalias() =
        MapC(A.data() + i * m * n, m, n) * MapC(B.data() + i * n * k, n, k);
  }
  return a.tape->push(std::move(out), {a.id, b.id},
                      [pa = a.id, pb = b.id, h, m, n, k](Tape& t, int self) {
                        const Tensor& g = t.grad_buf(self);
                        const Tensor& A = t.val(pa);
                        const Tensor& B = t.val(pb);
                        for (int64_t i = 0; i < h; ++i) {
                          MapC G(g.data() + i * m * k, m, k);
                          if (t.needs_grad(pa)) {
                            MapM(t.grad_buf(pa).data() + i * m * n, m, n).noalias() +=
                                G * MapC(B.data() + i * n * k, n, k).transpose();
                          }
                          if (t.needs_grad(pb)) {
                            MapM(t.grad_buf(pb).data() + i * n * k, n, k).noalias() +=
                                MapC(A.data() + i * m * n, m, n).transpose() * G;
                          }
                        }
                      });
}

Var permute102(Var a) {
  const Tensor& A = a.val();
  ELF_CHECK(A.rank() == 3, ErrorKind::kDimension, "permute102 expects rank 3");
  const int64_t d0 = A.dim(0), d1 = A.dim(1), d2 = A.dim(2);
  Tensor out({d1, d0, d2});
  for (int64_t i = 0; i < d0; ++i)
    for (int64_t j = 0; j < d1; ++j)
      std::memcpy(out.data() + (j * d0 + i) * d2, A.data() + (i * d1 + j) * d2,
                  sizeof(float) * static_cast<size_t>(d2));
  return a.tape->push(std::move(out), {a.id}, [pa = a.id, d0, d1, d2](Tape& t, int self) {
    if (!t.needs_grad(pa)) return;
    const Tensor& g = t.grad_buf(self);
    Tensor& ga = t.grad_buf(pa);
    for (int64_t i = 0; i < d0; ++i)
      for (int64_t j = 0; j < d1; ++j) {
        const float* src = g.data() + (j * d0 + i) * d2;
        float* dst = ga.data() + (i * d1 + j) * d2;
        for (int64_t c = 0; c < d2; ++c) dst[c] += src[c];
      }
  });
}

Var reshape(Var a, std::vector<int64_t> shape) {
  Tensor out = a.val().reshaped(std::move(shape));
  return a.tape->push(std::move(out), {a.id}, [pa = a.id](Tape& t, int self) {
    if (!t.needs_grad(pa)) return;
    const Tensor& g = t.grad_buf(self);
    Tensor& ga = t.grad_buf(pa);
    for (int64_t i = 0; i < g.numel(); ++i) ga.at(i) += g.at(i);
  });
}

Var concat_rows(const std::vector<Var>& xs) {
  ELF_CHECK(!xs.empty(), ErrorKind::kInput, "concat_rows: empty list");
  const int64_t cols = xs[0].val().numel() / xs[0].val().dim(0);
  int64_t rows = 0;
  for (const Var& v : xs) {
    ELF_CHECK(v.val().numel() / v.val().dim(0) == cols, ErrorKind::kDimension,
              "concat_rows: column count mismatch");
    rows += v.val().dim(0);
  }
  std::vector<int64_t> shape = xs[0].val().shape();
  shape[0] = rows;
  Tensor out(shape);
  std::vector<int> parents;
  std::vector<int64_t> offsets;
  int64_t off = 0;
  for (const Var& v : xs) {
    std::memcpy(out.data() + off, v.val().data(), sizeof(float) * v.val().numel());
    parents.push_back(v.id);
    offsets.push_back(off);
    off += v.val().numel();
  }
  auto ids = parents;
  return xs[0].tape->push(std::move(out), std::move(parents),
                          [ids, offsets](Tape& t, int self) {
                            const Tensor& g = t.grad_buf(self);
                            for (size_t i = 0; i < ids.size(); ++i) {
                              if (!t.needs_grad(ids[i])) continue;
                              Tensor& gp = t.grad_buf(ids[i]);
                              const float* src = g.data() + offsets[i];
                              for (int64_t k = 0; k < gp.numel(); ++k) gp.at(k) += src[k];
                            }
                          });
}

Var slice_rows(Var a, int64_t r0, int64_t len) {
  const Tensor& A = a.val();
  ELF_CHECK(r0 >= 0 && r0 + len <= A.dim(0), ErrorKind::kDimension, "slice_rows: out of range");
  const int64_t cols = A.numel() / A.dim(0);
  std::vector<int64_t> shape = A.shape();
  shape[0] = len;
  Tensor out(shape);
  std::memcpy(out.data(), A.data() + r0 * cols, sizeof(float) * static_cast<size_t>(len * cols));
  return a.tape->push(std::move(out), {a.id}, [pa = a.id, r0, cols](Tape& t, int self) {
    if (!t.needs_grad(pa)) return;
    const Tensor& g = t.grad_buf(self);
    Tensor& ga = t.grad_buf(pa);
    float* dst = ga.data() + r0 * cols;
    for (int64_t i = 0; i < g.numel(); ++i) dst[i] += g.at(i);
  });
}

Var slice_cols(Var a, int64_t c0, int64_t len) {
  const Tensor& A = a.val();
  ELF_CHECK(A.rank() == 2 && c0 >= 0 && c0 + len <= A.dim(1), ErrorKind::kDimension,
            "slice_cols: out of range for " + A.shape_str());
  const int64_t R = A.dim(0), C = A.dim(1);
  Tensor out({R, len});
  for (int64_t r = 0; r < R; ++r)
    std::memcpy(out.data() + r * len, A.data() + r * C + c0,
                sizeof(float) * static_cast<size_t>(len));
  return a.tape->push(std::move(out), {a.id}, [pa = a.id, c0, len, R, C](Tape& t, int self) {
    if (!t.needs_grad(pa)) return;
    const Tensor& g = t.grad_buf(self);
    Tensor& ga = t.grad_buf(pa);
    for (int64_t r = 0; r < R; ++r) {
      const float* src = g.data() + r * len;
      float* dst = ga.data() + r * C + c0;
      for (int64_t c = 0; c < len; ++c) dst[c] += src[c];
    }
  });
}

Var index_select_rows(Var a, std::vector<int> idx) {
  const Tensor& A = a.val();
  const int64_t cols = A.numel() / A.dim(0);
  std::vector<int64_t> shape = A.shape();
  shape[0] = static_cast<int64_t>(idx.size());
  Tensor out(shape);
  for (size_t i = 0; i < idx.size(); ++i) {
    ELF_CHECK(idx[i] >= 0 && idx[i] < A.dim(0), ErrorKind::kDimension,
              "index_select_rows: index out of range");
    std::memcpy(out.data() + static_cast<int64_t>(i) * cols, A.data() + idx[i] * cols,
                sizeof(float) * static_cast<size_t>(cols));
  }
  return a.tape->push(std::move(out), {a.id},
                      [pa = a.id, idx = std::move(idx), cols](Tape& t, int self) {
                        if (!t.needs_grad(pa)) return;
                        const Tensor& g = t.grad_buf(self);
                        Tensor& ga = t.grad_buf(pa);
                        for (size_t i = 0; i < idx.size(); ++i) {
                          const float* src = g.data() + static_cast<int64_t>(i) * cols;
                          float* dst = ga.data() + idx[i] * cols;
                          for (int64_t c = 0; c < cols; ++c) dst[c] += src[c];
                        }
                      });
}

Var gather1d(Var a, std::vector<int64_t> idx, std::vector<int64_t> out_shape) {
  const Tensor& A = a.val();
  ELF_CHECK(Tensor::numel_of(out_shape) == static_cast<int64_t>(idx.size()),
            ErrorKind::kDimension, "gather1d: index/output size mismatch");
  Tensor out(out_shape);
  for (size_t i = 0; i < idx.size(); ++i) out.at(static_cast<int64_t>(i)) = A.at(idx[i]);
  return a.tape->push(std::move(out), {a.id},
                      [pa = a.id, idx = std::move(idx)](Tape& t, int self) {
                        if (!t.needs_grad(pa)) return;
                        const Tensor& g = t.grad_buf(self);
                        Tensor& ga = t.grad_buf(pa);
                        for (size_t i = 0; i < idx.size(); ++i)
                          ga.at(idx[i]) += g.at(static_cast<int64_t>(i));
                      });
}

Var embedding(Var table, std::vector<int> ids) {
  const Tensor& T = table.val();
  ELF_CHECK(T.rank() == 2, ErrorKind::kDimension, "embedding: table must be rank 2");
  const int64_t C = T.dim(1);
  Tensor out({static_cast<int64_t>(ids.size()), C});
  for (size_t i = 0; i < ids.size(); ++i) {
    ELF_CHECK(ids[i] >= 0 && ids[i] < T.dim(0), ErrorKind::kInput, "embedding: id out of vocab");
    std::memcpy(out.data() + static_cast<int64_t>(i) * C, T.data() + ids[i] * C,
                sizeof(float) * static_cast<size_t>(C));
  }
  return table.tape->push(std::move(out), {table.id},
                          [pt = table.id, ids = std::move(ids), C](Tape& t, int self) {
                            if (!t.needs_grad(pt)) return;
                            const Tensor& g = t.grad_buf(self);
                            Tensor& gt = t.grad_buf(pt);
                            for (size_t i = 0; i < ids.size(); ++i) {
                              const float* src = g.data() + static_cast<int64_t>(i) * C;
                              float* dst = gt.data() + ids[i] * C;
                              for (int64_t c = 0; c < C; ++c) dst[c] += src[c];
                            }
                          });
}

Var detach(Var a) { return a.tape->constant(a.val()); }

Var add_bias_rows(Var x, Var b) {
  const Tensor& X = x.val();
  ELF_CHECK(X.rank() == 2 && b.val().numel() == X.dim(0), ErrorKind::kDimension,
            "add_bias_rows: x" + X.shape_str());
  Tensor out(X.shape());
  const int64_t C = X.dim(0), T = X.dim(1);
  for (int64_t c = 0; c < C; ++c) {
    const float bv = b.val().at(c);
    for (int64_t t = 0; t < T; ++t) out.at2(c, t) = X.at2(c, t) + bv;
  }
  return x.tape->push(std::move(out), {x.id, b.id},
                      [px = x.id, pb = b.id, C, T](Tape& t, int self) {
                        const Tensor& g = t.grad_buf(self);
                        if (t.needs_grad(px)) {
                          Tensor& gx = t.grad_buf(px);
                          for (int64_t i = 0; i < g.numel(); ++i) gx.at(i) += g.at(i);
                        }
                        if (t.needs_grad(pb)) {
                          Tensor& gb = t.grad_buf(pb);
                          for (int64_t c = 0; c < C; ++c) {
                            double acc = 0.0;
                            for (int64_t k = 0; k < T; ++k) acc += g.at(c * T + k);
                            gb.at(c) += static_cast<float>(acc);
                          }
                        }
                      });
}

Var add_bias_cols(Var x, Var b) {
  const Tensor& X = x.val();
  ELF_CHECK(X.rank() == 2 && b.val().numel() == X.dim(1), ErrorKind::kDimension,
            "add_bias_cols: x" + X.shape_str());
  Tensor out(X.shape());
  const int64_t T = X.dim(0), C = X.dim(1);
  for (int64_t r = 0; r < T; ++r)
    for (int64_t c = 0; c < C; ++c) out.at2(r, c) = X.at2(r, c) + b.val().at(c);
  return x.tape->push(std::move(out), {x.id, b.id},
                      [px = x.id, pb = b.id, T, C](Tape& t, int self) {
                        const Tensor& g = t.grad_buf(self);
                        if (t.needs_grad(px)) {
                          Tensor& gx = t.grad_buf(px);
                          for (int64_t i = 0; i < g.numel(); ++i) gx.at(i) += g.at(i);
                        }
                        if (t.needs_grad(pb)) {
                          Tensor& gb = t.grad_buf(pb);
                          for (int64_t c = 0; c < C; ++c) {
                            double acc = 0.0;
                            for (int64_t r = 0; r < T; ++r) acc += g.at(r * C + c);
                            gb.at(c) += static_cast<float>(acc);
                          }
                        }
                      });
}

Var mul_cols(Var x, Var v) {
  const Tensor& X = x.val();
  ELF_CHECK(X.rank() == 2 && v.val().numel() == X.dim(1), ErrorKind::kDimension,
            "mul_cols: x" + X.shape_str());
  Tensor out(X.shape());
  const int64_t T = X.dim(0), C = X.dim(1);
  for (int64_t r = 0; r < T; ++r)
    for (int64_t c = 0; c < C; ++c) out.at2(r, c) = X.at2(r, c) * v.val().at(c);
  return x.tape->push(std::move(out), {x.id, v.id},
                      [px = x.id, pv = v.id, T, C](Tape& t, int self) {
                        const Tensor& g = t.grad_buf(self);
                        if (t.needs_grad(px)) {
                          Tensor& gx = t.grad_buf(px);
                          const float* vv = t.val(pv).data();
                          for (int64_t r = 0; r < T; ++r)
                            for (int64_t c = 0; c < C; ++c) gx.at(r * C + c) += g.at(r * C + c) * vv[c];
                        }
                        if (t.needs_grad(pv)) {
                          Tensor& gv = t.grad_buf(pv);
                          const Tensor& X = t.val(px);
                          for (int64_t c = 0; c < C; ++c) {
                            double acc = 0.0;
                            for (int64_t r = 0; r < T; ++r) acc += g.at(r * C + c) * X.at(r * C + c);
                            gv.at(c) += static_cast<float>(acc);
                          }
                        }
                      });
}

Var softmax_lastdim(Var a) {
  const Tensor& A = a.val();
  const int64_t n = A.dim(A.rank() - 1);
  const int64_t rows = A.numel() / n;
  Tensor out(A.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const float* x = A.data() + r * n;
    float* y = out.data() + r * n;
    float mx = x[0];
    for (int64_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
    double z = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      y[i] = std::exp(x[i] - mx);
      z += y[i];
    }
    const float inv = static_cast<float>(1.0 / z);
    for (int64_t i = 0; i < n; ++i) y[i] *= inv;
  }
  return a.tape->push(std::move(out), {a.id}, [pa = a.id, rows, n](Tape& t, int self) {
    if (!t.needs_grad(pa)) return;
    const Tensor& g = t.grad_buf(self);
    const Tensor& y = t.val(self);
    Tensor& ga = t.grad_buf(pa);
    for (int64_t r = 0; r < rows; ++r) {
      const float* yr = y.data() + r * n;
      const float* gr = g.data() + r * n;
      double dot = 0.0;
      for (int64_t i = 0; i < n; ++i) dot += static_cast<double>(yr[i]) * gr[i];
      float* gar = ga.data() + r * n;
      for (int64_t i = 0; i < n; ++i)
        gar[i] += yr[i] * (gr[i] - static_cast<float>(dot));
    }
  });
}

Var layer_norm(Var x, Var gamma, Var beta, float eps) {
  const Tensor& X = x.val();
  const int64_t C = X.dim(X.rank() - 1);
  const int64_t rows = X.numel() / C;
  ELF_CHECK(gamma.val().numel() == C && beta.val().numel() == C, ErrorKind::kDimension,
            "layer_norm: gamma/beta size");
  Tensor out(X.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const float* xr = X.data() + r * C;
    float* yr = out.data() + r * C;
    double mu = 0.0;
    for (int64_t c = 0; c < C; ++c) mu += xr[c];
    mu /= C;
    double var = 0.0;
    for (int64_t c = 0; c < C; ++c) var += (xr[c] - mu) * (xr[c] - mu);
    var /= C;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int64_t c = 0; c < C; ++c) {
      const double xhat = (xr[c] - mu) * inv;
      yr[c] = static_cast<float>(xhat) * gamma.val().at(c) + beta.val().at(c);
    }
  }
  return x.tape->push(
      std::move(out), {x.id, gamma.id, beta.id},
      [px = x.id, pg = gamma.id, pb = beta.id, rows, C, eps](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        const Tensor& X = t.val(px);
        const Tensor& G = t.val(pg);
        for (int64_t r = 0; r < rows; ++r) {
          const float* xr = X.data() + r * C;
          const float* gr = g.data() + r * C;
          double mu = 0.0;
          for (int64_t c = 0; c < C; ++c) mu += xr[c];
          mu /= C;
          double var = 0.0;
          for (int64_t c = 0; c < C; ++c) var += (xr[c] - mu) * (xr[c] - mu);
          var /= C;
          const double inv = 1.0 / std::sqrt(var + eps);
          // dxhat, and the two row sums needed by the layer-norm backward
          double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
          for (int64_t c = 0; c < C; ++c) {
            const double xhat = (xr[c] - mu) * inv;
            const double dxhat = static_cast<double>(gr[c]) * G.at(c);
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xhat;
          }
          if (t.needs_grad(px)) {
            Tensor& gx = t.grad_buf(px);
            float* gxr = gx.data() + r * C;
            for (int64_t c = 0; c < C; ++c) {
              const double xhat = (xr[c] - mu) * inv;
              const double dxhat = static_cast<double>(gr[c]) * G.at(c);
              gxr[c] += static_cast<float>(
                  inv * (dxhat - sum_dxhat / C - xhat * sum_dxhat_xhat / C));
            }
          }
          if (t.needs_grad(pg)) {
            Tensor& gg = t.grad_buf(pg);
            for (int64_t c = 0; c < C; ++c) {
              const double xhat = (xr[c] - mu) * inv;
              gg.at(c) += static_cast<float>(gr[c] * xhat);
            }
          }
          if (t.needs_grad(pb)) {
            Tensor& gb = t.grad_buf(pb);
            for (int64_t c = 0; c < C; ++c) gb.at(c) += gr[c];
          }
        }
      });
}

// ---------------------------------------------------------------------------
// Convolutions. im2col + GEMM; layouts follow torch: x[C,T], conv weight
// [Cout, Cin/groups, k], transposed-conv weight [Cin, Cout, k].
// ---------------------------------------------------------------------------

namespace {

int64_t conv_out_len(int64_t T, int k, int stride, int pad, int dil) {
  return (T + 2 * pad - dil * (static_cast<int64_t>(k) - 1) - 1) / stride + 1;
}

// col[(Cin_g*k), To] for one group slice of x.
void im2col_1d(const float* x, int64_t cin_g, int64_t T, int k, int stride, int pad, int dil,
               int64_t To, float* col) {
  for (int64_t ci = 0; ci < cin_g; ++ci) {
    for (int j = 0; j < k; ++j) {
      float* dst = col + (ci * k + j) * To;
      const int64_t base = static_cast<int64_t>(j) * dil - pad;
      for (int64_t t = 0; t < To; ++t) {
        const int64_t src = t * stride + base;
        dst[t] = (src >= 0 && src < T) ? x[ci * T + src] : 0.f;
      }
    }
  }
}

void col2im_1d_add(const float* col, int64_t cin_g, int64_t T, int k, int stride, int pad,
                   int dil, int64_t To, float* x) {
  for (int64_t ci = 0; ci < cin_g; ++ci) {
    for (int j = 0; j < k; ++j) {
      const float* src = col + (ci * k + j) * To;
      const int64_t base = static_cast<int64_t>(j) * dil - pad;
      for (int64_t t = 0; t < To; ++t) {
        const int64_t dst = t * stride + base;
        if (dst >= 0 && dst < T) x[ci * T + dst] += src[t];
      }
    }
  }
}

}  // namespace

Var conv1d(Var x, Var w, std::optional<Var> b, int stride, int pad, int dilation, int groups) {
  const Tensor& X = x.val();
  const Tensor& W = w.val();
  ELF_CHECK(X.rank() == 2 && W.rank() == 3, ErrorKind::kDimension, "conv1d: bad ranks");
  const int64_t Cin = X.dim(0), T = X.dim(1);
  const int64_t Cout = W.dim(0), cin_g = W.dim(1);
  const int k = static_cast<int>(W.dim(2));
  ELF_CHECK(Cin == cin_g * groups && Cout % groups == 0, ErrorKind::kDimension,
            "conv1d: channel/group mismatch x" + X.shape_str() + " w" + W.shape_str());
  const int64_t To = conv_out_len(T, k, stride, pad, dilation);
  ELF_CHECK(To >= 1, ErrorKind::kDimension, "conv1d: input too short");
  const int64_t cout_g = Cout / groups;

  Tensor out({Cout, To});
  std::vector<float> col(static_cast<size_t>(cin_g * k * To));
  for (int g = 0; g < groups; ++g) {
    im2col_1d(X.data() + g * cin_g * T, cin_g, T, k, stride, pad, dilation, To, col.data());
    MapM(out.data() + g * cout_g * To, cout_g, To).noalias() =
        MapC(W.data() + g * cout_g * cin_g * k, cout_g, cin_g * k) *
        MapC(col.data(), cin_g * k, To);
  }
  if (b) {
    ELF_CHECK(b->val().numel() == Cout, ErrorKind::kDimension, "conv1d: bias size");
    for (int64_t c = 0; c < Cout; ++c) {
      const float bv = b->val().at(c);
      float* row = out.data() + c * To;
      for (int64_t t = 0; t < To; ++t) row[t] += bv;
    }
  }

  std::vector<int> parents{x.id, w.id};
  if (b) parents.push_back(b->id);
  const int bias_id = b ? b->id : -1;
  return x.tape->push(
      std::move(out), std::move(parents),
      [px = x.id, pw = w.id, bias_id, stride, pad, dilation, groups, k, Cin, T, Cout, cin_g,
       cout_g, To](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        const Tensor& X = t.val(px);
        const Tensor& W = t.val(pw);
        std::vector<float> col(static_cast<size_t>(cin_g * k * To));
        std::vector<float> dcol(static_cast<size_t>(cin_g * k * To));
        for (int gi = 0; gi < groups; ++gi) {
          MapC G(g.data() + gi * cout_g * To, cout_g, To);
          if (t.needs_grad(pw)) {
            im2col_1d(X.data() + gi * cin_g * T, cin_g, T, k, stride, pad, dilation, To,
                      col.data());
            MapM(t.grad_buf(pw).data() + gi * cout_g * cin_g * k, cout_g, cin_g * k).noalias() +=
                G * MapC(col.data(), cin_g * k, To).transpose();
          }
          if (t.needs_grad(px)) {
            MapM(dcol.data(), cin_g * k, To).noalias() =
                MapC(W.data() + gi * cout_g * cin_g * k, cout_g, cin_g * k).transpose() * G;
            col2im_1d_add(dcol.data(), cin_g, T, k, stride, pad, dilation, To,
                          t.grad_buf(px).data() + gi * cin_g * T);
          }
        }
        if (bias_id >= 0 && t.needs_grad(bias_id)) {
          Tensor& gb = t.grad_buf(bias_id);
          for (int64_t c = 0; c < Cout; ++c) {
            double acc = 0.0;
            const float* row = g.data() + c * To;
            for (int64_t i = 0; i < To; ++i) acc += row[i];
            gb.at(c) += static_cast<float>(acc);
          }
        }
        (void)Cin;
      });
}

Var conv_transpose1d(Var x, Var w, std::optional<Var> b, int stride, int pad) {
  const Tensor& X = x.val();
  const Tensor& W = w.val();
  ELF_CHECK(X.rank() == 2 && W.rank() == 3 && X.dim(0) == W.dim(0), ErrorKind::kDimension,
            "conv_transpose1d: x" + X.shape_str() + " w" + W.shape_str());
  const int64_t Cin = X.dim(0), T = X.dim(1);
  const int64_t Cout = W.dim(1);
  const int k = static_cast<int>(W.dim(2));
  const int64_t To = (T - 1) * stride - 2 * pad + k;
  ELF_CHECK(To >= 1, ErrorKind::kDimension, "conv_transpose1d: empty output");

  // col[Cout*k, T] = W^T x, then scatter (col2im with swapped roles).
  Tensor out({Cout, To});
  std::vector<float> col(static_cast<size_t>(Cout * k * T));
  MapM(col.data(), Cout * k, T).noalias() =
      MapC(W.data(), Cin, Cout * k).transpose() * MapC(X.data(), Cin, T);
  col2im_1d_add(col.data(), Cout, To, k, stride, pad, 1, T, out.data());
  if (b) {
    ELF_CHECK(b->val().numel() == Cout, ErrorKind::kDimension, "conv_transpose1d: bias size");
    for (int64_t c = 0; c < Cout; ++c) {
      const float bv = b->val().at(c);
      float* row = out.data() + c * To;
      for (int64_t t = 0; t < To; ++t) row[t] += bv;
    }
  }

  std::vector<int> parents{x.id, w.id};
  if (b) parents.push_back(b->id);
  const int bias_id = b ? b->id : -1;
  return x.tape->push(
      std::move(out), std::move(parents),
      [px = x.id, pw = w.id, bias_id, stride, pad, k, Cin, T, Cout, To](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        const Tensor& X = t.val(px);
        const Tensor& W = t.val(pw);
        // dcol[co*k+j, t] = dy[co, t*stride - pad + j]
        std::vector<float> dcol(static_cast<size_t>(Cout * k * T));
        im2col_1d(g.data(), Cout, To, k, stride, pad, 1, T, dcol.data());
        if (t.needs_grad(pw)) {
          MapM(t.grad_buf(pw).data(), Cin, Cout * k).noalias() +=
              MapC(X.data(), Cin, T) * MapC(dcol.data(), Cout * k, T).transpose();
        }
        if (t.needs_grad(px)) {
          MapM(t.grad_buf(px).data(), Cin, T).noalias() +=
              MapC(W.data(), Cin, Cout * k) * MapC(dcol.data(), Cout * k, T);
        }
        if (bias_id >= 0 && t.needs_grad(bias_id)) {
          Tensor& gb = t.grad_buf(bias_id);
          for (int64_t c = 0; c < Cout; ++c) {
            double acc = 0.0;
            const float* row = g.data() + c * To;
            for (int64_t i = 0; i < To; ++i) acc += row[i];
            gb.at(c) += static_cast<float>(acc);
          }
        }
      });
}

namespace {

void im2col_2d(const float* x, int64_t cin, int64_t H, int64_t W, int kh, int kw, int sh, int sw,
               int ph, int pw, int64_t Ho, int64_t Wo, float* col) {
  for (int64_t ci = 0; ci < cin; ++ci) {
    for (int jh = 0; jh < kh; ++jh) {
      for (int jw = 0; jw < kw; ++jw) {
        float* dst = col + ((ci * kh + jh) * kw + jw) * (Ho * Wo);
        for (int64_t oh = 0; oh < Ho; ++oh) {
          const int64_t ih = oh * sh - ph + jh;
          for (int64_t ow = 0; ow < Wo; ++ow) {
            const int64_t iw = ow * sw - pw + jw;
            dst[oh * Wo + ow] = (ih >= 0 && ih < H && iw >= 0 && iw < W)
                                    ? x[(ci * H + ih) * W + iw]
                                    : 0.f;
          }
        }
      }
    }
  }
}

void col2im_2d_add(const float* col, int64_t cin, int64_t H, int64_t W, int kh, int kw, int sh,
                   int sw, int ph, int pw, int64_t Ho, int64_t Wo, float* x) {
  for (int64_t ci = 0; ci < cin; ++ci) {
    for (int jh = 0; jh < kh; ++jh) {
      for (int jw = 0; jw < kw; ++jw) {
        const float* src = col + ((ci * kh + jh) * kw + jw) * (Ho * Wo);
        for (int64_t oh = 0; oh < Ho; ++oh) {
          const int64_t ih = oh * sh - ph + jh;
          if (ih < 0 || ih >= H) continue;
          for (int64_t ow = 0; ow < Wo; ++ow) {
            const int64_t iw = ow * sw - pw + jw;
            if (iw >= 0 && iw < W) x[(ci * H + ih) * W + iw] += src[oh * Wo + ow];
          }
        }
      }
    }
  }
}

}  // namespace

Var conv2d(Var x, Var w, std::optional<Var> b, int stride_h, int stride_w, int pad_h, int pad_w) {
  const Tensor& X = x.val();
  const Tensor& W = w.val();
  ELF_CHECK(X.rank() == 3 && W.rank() == 4 && X.dim(0) == W.dim(1), ErrorKind::kDimension,
            "conv2d: x" + X.shape_str() + " w" + W.shape_str());
  const int64_t Cin = X.dim(0), H = X.dim(1), Wd = X.dim(2);
  const int64_t Cout = W.dim(0);
  const int kh = static_cast<int>(W.dim(2)), kw = static_cast<int>(W.dim(3));
  const int64_t Ho = conv_out_len(H, kh, stride_h, pad_h, 1);
  const int64_t Wo = conv_out_len(Wd, kw, stride_w, pad_w, 1);
  ELF_CHECK(Ho >= 1 && Wo >= 1, ErrorKind::kDimension, "conv2d: input too small");

  Tensor out({Cout, Ho, Wo});
  std::vector<float> col(static_cast<size_t>(Cin * kh * kw * Ho * Wo));
  im2col_2d(X.data(), Cin, H, Wd, kh, kw, stride_h, stride_w, pad_h, pad_w, Ho, Wo, col.data());
  MapM(out.data(), Cout, Ho * Wo).noalias() =
      MapC(W.data(), Cout, Cin * kh * kw) * MapC(col.data(), Cin * kh * kw, Ho * Wo);
  if (b) {
    for (int64_t c = 0; c < Cout; ++c) {
      const float bv = b->val().at(c);
      float* plane = out.data() + c * Ho * Wo;
      for (int64_t i = 0; i < Ho * Wo; ++i) plane[i] += bv;
    }
  }

  std::vector<int> parents{x.id, w.id};
  if (b) parents.push_back(b->id);
  const int bias_id = b ? b->id : -1;
  return x.tape->push(
      std::move(out), std::move(parents),
      [px = x.id, pw = w.id, bias_id, stride_h, stride_w, pad_h, pad_w, kh, kw, Cin, H, Wd, Cout,
       Ho, Wo](Tape& t, int self) {
        const Tensor& g = t.grad_buf(self);
        const Tensor& X = t.val(px);
        const Tensor& W = t.val(pw);
        MapC G(g.data(), Cout, Ho * Wo);
        if (t.needs_grad(pw)) {
          std::vector<float> col(static_cast<size_t>(Cin * kh * kw * Ho * Wo));
          im2col_2d(X.data(), Cin, H, Wd, kh, kw, stride_h, stride_w, pad_h, pad_w, Ho, Wo,
                    col.data());
          MapM(t.grad_buf(pw).data(), Cout, Cin * kh * kw).noalias() +=
              G * MapC(col.data(), Cin * kh * kw, Ho * Wo).transpose();
        }
        if (t.needs_grad(px)) {
          std::vector<float> dcol(static_cast<size_t>(Cin * kh * kw * Ho * Wo));
          MapM(dcol.data(), Cin * kh * kw, Ho * Wo).noalias() =
              MapC(W.data(), Cout, Cin * kh * kw).transpose() * G;
          col2im_2d_add(dcol.data(), Cin, H, Wd, kh, kw, stride_h, stride_w, pad_h, pad_w, Ho, Wo,
                        t.grad_buf(px).data());
        }
        if (bias_id >= 0 && t.needs_grad(bias_id)) {
          Tensor& gb = t.grad_buf(bias_id);
          for (int64_t c = 0; c < Cout; ++c) {
            double acc = 0.0;
            const float* plane = g.data() + c * Ho * Wo;
            for (int64_t i = 0; i < Ho * Wo; ++i) acc += plane[i];
            gb.at(c) += static_cast<float>(acc);
          }
        }
      });
}

Var avg_pool1d(Var x, int kernel, int stride, int pad) {
  const Tensor& X = x.val();
  ELF_CHECK(X.rank() == 2, ErrorKind::kDimension, "avg_pool1d expects [C,T]");
  const int64_t C = X.dim(0), T = X.dim(1);
  const int64_t To = conv_out_len(T, kernel, stride, pad, 1);
  Tensor out({C, To});
  const float inv_k = 1.f / static_cast<float>(kernel);
  for (int64_t c = 0; c < C; ++c) {
    for (int64_t t = 0; t < To; ++t) {
      double acc = 0.0;
      for (int j = 0; j < kernel; ++j) {
        const int64_t src = t * stride - pad + j;
        if (src >= 0 && src < T) acc += X.at(c * T + src);
      }
      out.at(c * To + t) = static_cast<float>(acc) * inv_k;
    }
  }
  return x.tape->push(std::move(out), {x.id},
                      [px = x.id, kernel, stride, pad, C, T, To, inv_k](Tape& t, int self) {
                        if (!t.needs_grad(px)) return;
                        const Tensor& g = t.grad_buf(self);
                        Tensor& gx = t.grad_buf(px);
                        for (int64_t c = 0; c < C; ++c)
                          for (int64_t o = 0; o < To; ++o) {
                            const float gv = g.at(c * To + o) * inv_k;
                            for (int j = 0; j < kernel; ++j) {
                              const int64_t src = o * stride - pad + j;
                              if (src >= 0 && src < T) gx.at(c * T + src) += gv;
                            }
                          }
                      });
}

}  // namespace elf::nn
