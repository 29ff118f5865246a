#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "elf/nn/params.hpp"
#include "elf/nn/tensor.hpp"

namespace elf::nn {

class Tape;

// Handle to a node on a tape. Cheap to copy.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& val() const;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode tape. One tape per forward pass; nodes are created in
// topological order so backward() is a single reverse sweep. Gradients of
// leaves created via param() are accumulated into Param::grad.
class Tape {
 public:
  using BackFn = std::function<void(Tape&, int self)>;

  Var constant(Tensor v);
  // Leaf tied to a Param; backward() accumulates into Param::grad. When
  // gradients are disabled the value is captured as a plain constant, which
  // freezes those parameters for this portion of the graph (used to run the
  // discriminator inside generator steps and vice versa).
  Var param(Param& p);

  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }

  const Tensor& val(int id) const { return nodes_[static_cast<size_t>(id)].val; }
  bool needs_grad(int id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }

  // Gradient buffer of a node, allocated (zeroed) on first access.
  Tensor& grad_buf(int id);
  // Gradient of a node after backward(); zeros if it was never reached.
  Tensor grad_of(Var v);

  // Runs the reverse sweep from a scalar root, accumulating into Param::grad.
  void backward(Var root);

  // Creates a node. If no parent needs gradients the back function is dropped.
  Var push(Tensor val, std::vector<int> parents, BackFn back);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor val;
    Tensor grad;
    std::vector<int> parents;
    BackFn back;
    Param* leaf_param = nullptr;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
  friend struct Var;
};

// ---- elementwise ----
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var add_scalar(Var a, float c);
Var scale(Var a, float c);
Var neg(Var a);
Var exp_op(Var a);
Var log_op(Var a);      // caller guarantees positive input (clamp first)
Var tanh_op(Var a);
Var sigmoid_op(Var a);
Var leaky_relu(Var a, float slope = 0.1f);
Var abs_op(Var a);
Var sqrt_op(Var a);     // d/dx = 1/(2*max(sqrt(x), grad_floor)); exact 0 stays 0
Var clamp_min(Var a, float floor);

// ---- reductions (double accumulation) ----
Var sum(Var a);
Var mean(Var a);

// ---- linear algebra ----
Var matmul(Var a, Var b);               // [m,k]x[k,n]
Var transpose2d(Var a);                 // [m,n] -> [n,m]
Var linear(Var x, Var w, std::optional<Var> b = std::nullopt);  // x[T,in] w[out,in] -> [T,out]
Var bmm_nt(Var a, Var b);               // [h,m,k]x[h,n,k] -> [h,m,n]
Var bmm_nn(Var a, Var b);               // [h,m,n]x[h,n,k] -> [h,m,k]
Var permute102(Var a);                  // [a,b,c] -> [b,a,c]
Var reshape(Var a, std::vector<int64_t> shape);

// ---- shape / indexing ----
Var concat_rows(const std::vector<Var>& xs);            // along dim 0
Var slice_rows(Var a, int64_t r0, int64_t len);         // along dim 0
Var slice_cols(Var a, int64_t c0, int64_t len);         // along dim 1 of [R,C]
Var index_select_rows(Var a, std::vector<int> idx);     // gather rows, scatter-add back
Var gather1d(Var a, std::vector<int64_t> idx, std::vector<int64_t> out_shape);
Var embedding(Var table, std::vector<int> ids);
Var detach(Var a);

// ---- broadcasting helpers ----
Var add_bias_rows(Var x, Var b);  // x[C,T] + b[C], broadcast over columns
Var add_bias_cols(Var x, Var b);  // x[T,C] + b[C], broadcast over rows
Var mul_cols(Var x, Var v);       // x[T,C] * v[C] per row

// ---- nonlinearity blocks ----
Var softmax_lastdim(Var a);
Var layer_norm(Var x, Var gamma, Var beta, float eps = 1e-5f);

// ---- convolutions (channels-first: x[C,T]) ----
Var conv1d(Var x, Var w, std::optional<Var> b, int stride, int pad, int dilation = 1,
           int groups = 1);
Var conv_transpose1d(Var x, Var w, std::optional<Var> b, int stride, int pad);
Var conv2d(Var x, Var w, std::optional<Var> b, int stride_h, int stride_w, int pad_h, int pad_w);
Var avg_pool1d(Var x, int kernel, int stride, int pad);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

}  // namespace elf::nn
