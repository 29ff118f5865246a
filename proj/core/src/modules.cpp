#include "elf/nn/modules.hpp"

#include <cmath>

#include "elf/error.hpp"

namespace elf::nn {

// ---- ParamStore ----

Param& ParamStore::add(const std::string& name, std::vector<int64_t> shape) {
  return add(name, Tensor(std::move(shape)));
}

Param& ParamStore::add(const std::string& name, Tensor init) {
  ELF_CHECK(index_.find(name) == index_.end(), ErrorKind::kValidation,
            "duplicate parameter name: " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = std::move(init);
  p->grad = Tensor::zeros(p->value.shape());
  p->adam_m = Tensor::zeros(p->value.shape());
  p->adam_v = Tensor::zeros(p->value.shape());
  items_.push_back(std::move(p));
  index_[name] = items_.size() - 1;
  return *items_.back();
}

Param* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : items_[it->second].get();
}

const Param* ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : items_[it->second].get();
}

Param& ParamStore::get(const std::string& name) {
  Param* p = find(name);
  ELF_CHECK(p != nullptr, ErrorKind::kValidation, "unknown parameter: " + name);
  return *p;
}

int64_t ParamStore::total_elements() const {
  int64_t n = 0;
  for (const auto& p : items_) n += p->value.numel();
  return n;
}

void ParamStore::zero_grads() {
  for (auto& p : items_) p->zero_grad();
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(items_.size());
  for (const auto& p : items_) out.push_back(p->name);
  return out;
}

Tensor init_uniform_fan_in(std::vector<int64_t> shape, int64_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const float bound = 1.f / std::sqrt(static_cast<float>(fan_in));
  rng.fill_uniform(t.vec(), -bound, bound);
  return t;
}

Tensor init_normal(std::vector<int64_t> shape, float stddev, Rng& rng) {
  Tensor t(std::move(shape));
  rng.fill_normal(t.vec(), 0.f, stddev);
  return t;
}

namespace {

Tensor init_weight(std::vector<int64_t> shape, int64_t fan_in, Rng& rng, Init init) {
  switch (init) {
    case Init::kFanIn:
      return init_uniform_fan_in(std::move(shape), fan_in, rng);
    case Init::kNormal001:
      return init_normal(std::move(shape), 0.01f, rng);
    case Init::kZero:
      return Tensor::zeros(std::move(shape));
  }
  return Tensor::zeros(std::move(shape));
}

}  // namespace

// ---- layers ----

LinearLayer LinearLayer::make(ParamStore& ps, const std::string& name, int64_t in, int64_t out,
                              Rng& rng, Init init, bool bias) {
  LinearLayer l;
  l.w = &ps.add(name + ".w", init_weight({out, in}, in, rng, init));
  if (bias) l.b = &ps.add(name + ".b", Tensor::zeros({out}));
  return l;
}

Var LinearLayer::forward(Tape& t, Var x) const {
  Var wv = t.param(*w);
  if (b) return linear(x, wv, t.param(*b));
  return linear(x, wv);
}

Conv1dLayer Conv1dLayer::make(ParamStore& ps, const std::string& name, int64_t cin, int64_t cout,
                              int k, Rng& rng, int stride, int pad, int dilation, int groups,
                              Init init) {
  Conv1dLayer l;
  l.stride = stride;
  l.pad = pad;
  l.dilation = dilation;
  l.groups = groups;
  const int64_t cin_g = cin / groups;
  l.w = &ps.add(name + ".w", init_weight({cout, cin_g, k}, cin_g * k, rng, init));
  l.b = &ps.add(name + ".b", Tensor::zeros({cout}));
  return l;
}

Var Conv1dLayer::forward(Tape& t, Var x) const {
  return conv1d(x, t.param(*w), t.param(*b), stride, pad, dilation, groups);
}

ConvT1dLayer ConvT1dLayer::make(ParamStore& ps, const std::string& name, int64_t cin,
                                int64_t cout, int k, int stride, int pad, Rng& rng, Init init) {
  ConvT1dLayer l;
  l.stride = stride;
  l.pad = pad;
  l.w = &ps.add(name + ".w", init_weight({cin, cout, k}, cin * k / stride, rng, init));
  l.b = &ps.add(name + ".b", Tensor::zeros({cout}));
  return l;
}

Var ConvT1dLayer::forward(Tape& t, Var x) const {
  return conv_transpose1d(x, t.param(*w), t.param(*b), stride, pad);
}

Conv2dLayer Conv2dLayer::make(ParamStore& ps, const std::string& name, int64_t cin, int64_t cout,
                              int kh, int kw, int stride_h, int stride_w, int pad_h, int pad_w,
                              Rng& rng, Init init) {
  Conv2dLayer l;
  l.stride_h = stride_h;
  l.stride_w = stride_w;
  l.pad_h = pad_h;
  l.pad_w = pad_w;
  l.w = &ps.add(name + ".w",
                init_weight({cout, cin, kh, kw}, cin * kh * kw, rng, init));
  l.b = &ps.add(name + ".b", Tensor::zeros({cout}));
  return l;
}

Var Conv2dLayer::forward(Tape& t, Var x) const {
  return conv2d(x, t.param(*w), t.param(*b), stride_h, stride_w, pad_h, pad_w);
}

LayerNormLayer LayerNormLayer::make(ParamStore& ps, const std::string& name, int64_t dim) {
  LayerNormLayer l;
  l.gamma = &ps.add(name + ".g", Tensor::full({dim}, 1.f));
  l.beta = &ps.add(name + ".b", Tensor::zeros({dim}));
  return l;
}

Var LayerNormLayer::forward(Tape& t, Var x) const {
  return layer_norm(x, t.param(*gamma), t.param(*beta));
}

EmbeddingLayer EmbeddingLayer::make(ParamStore& ps, const std::string& name, int64_t vocab,
                                    int64_t dim, Rng& rng) {
  EmbeddingLayer l;
  l.table = &ps.add(name + ".table",
                    init_normal({vocab, dim}, 1.f / std::sqrt(static_cast<float>(dim)), rng));
  return l;
}

Var EmbeddingLayer::forward(Tape& t, const std::vector<int>& ids) const {
  return embedding(t.param(*table), ids);
}

MultiHeadAttention MultiHeadAttention::make(ParamStore& ps, const std::string& name,
                                            int64_t d_model, int heads, Rng& rng) {
  ELF_CHECK(d_model % heads == 0, ErrorKind::kValidation,
            "attention: d_model must be divisible by head count");
  MultiHeadAttention m;
  m.heads = heads;
  m.d_model = d_model;
  m.wq = LinearLayer::make(ps, name + ".q", d_model, d_model, rng);
  m.wk = LinearLayer::make(ps, name + ".k", d_model, d_model, rng);
  m.wv = LinearLayer::make(ps, name + ".v", d_model, d_model, rng);
  m.wo = LinearLayer::make(ps, name + ".o", d_model, d_model, rng);
  return m;
}

MultiHeadAttention::Parts MultiHeadAttention::forward_parts(Tape& t, Var q, Var kv) const {
  const int64_t Lq = q.val().dim(0);
  const int64_t Lk = kv.val().dim(0);
  const int64_t dh = d_model / heads;
  Var Q = wq.forward(t, q);
  Var K = wk.forward(t, kv);
  Var V = wv.forward(t, kv);
  // [L, d] -> [h, L, dh]
  Q = permute102(reshape(Q, {Lq, heads, dh}));
  K = permute102(reshape(K, {Lk, heads, dh}));
  V = permute102(reshape(V, {Lk, heads, dh}));
  Var scores = scale(bmm_nt(Q, K), 1.f / std::sqrt(static_cast<float>(dh)));
  Var attn = softmax_lastdim(scores);
  Var ctx = bmm_nn(attn, V);                         // [h, Lq, dh]
  Var combined = reshape(permute102(ctx), {Lq, d_model});
  Parts parts;
  parts.combined = combined;
  parts.out = wo.forward(t, combined);
  return parts;
}

TransformerBlock TransformerBlock::make(ParamStore& ps, const std::string& name, int64_t d_model,
                                        int heads, int64_t d_ff, Rng& rng) {
  TransformerBlock b;
  b.attn = MultiHeadAttention::make(ps, name + ".attn", d_model, heads, rng);
  b.ln1 = LayerNormLayer::make(ps, name + ".ln1", d_model);
  b.ln2 = LayerNormLayer::make(ps, name + ".ln2", d_model);
  b.ff1 = LinearLayer::make(ps, name + ".ff1", d_model, d_ff, rng);
  b.ff2 = LinearLayer::make(ps, name + ".ff2", d_ff, d_model, rng);
  return b;
}

Var TransformerBlock::forward(Tape& t, Var x) const {
  Var h = ln1.forward(t, x);
  x = add(x, attn.forward(t, h, h));
  Var f = ln2.forward(t, x);
  f = ff2.forward(t, relu(ff1.forward(t, f)));
  return add(x, f);
}

WaveNetStack WaveNetStack::make(ParamStore& ps, const std::string& name, int hidden, int kernel,
                                int layers, int dilation_rate, Rng& rng) {
  WaveNetStack w;
  w.hidden = hidden;
  int dilation = 1;
  for (int i = 0; i < layers; ++i) {
    const int pad = (kernel - 1) * dilation / 2;
    w.in_convs.push_back(Conv1dLayer::make(ps, name + ".in" + std::to_string(i), hidden,
                                           2 * hidden, kernel, rng, 1, pad, dilation));
    const int64_t out_ch = (i == layers - 1) ? hidden : 2 * hidden;
    w.res_skip.push_back(
        Conv1dLayer::make(ps, name + ".rs" + std::to_string(i), hidden, out_ch, 1, rng));
    dilation *= dilation_rate;
  }
  return w;
}

Var WaveNetStack::forward(Tape& t, Var x) const {
  Var skip_sum;
  const int layers = static_cast<int>(in_convs.size());
  for (int i = 0; i < layers; ++i) {
    Var y = in_convs[static_cast<size_t>(i)].forward(t, x);
    Var gate = mul(tanh_op(slice_rows(y, 0, hidden)), sigmoid_op(slice_rows(y, hidden, hidden)));
    Var rs = res_skip[static_cast<size_t>(i)].forward(t, gate);
    if (i < layers - 1) {
      x = add(x, slice_rows(rs, 0, hidden));
      Var skip = slice_rows(rs, hidden, hidden);
      skip_sum = skip_sum.valid() ? add(skip_sum, skip) : skip;
    } else {
      skip_sum = skip_sum.valid() ? add(skip_sum, rs) : rs;
    }
  }
  return skip_sum;
}

int WaveNetStack::receptive_half() const {
  int half = 0;
  for (const auto& c : in_convs) {
    const int k = static_cast<int>(c.w->value.dim(2));
    half += (k - 1) / 2 * c.dilation;
  }
  return half;
}

Var relu(Var x) { return leaky_relu(x, 0.f); }

Var add_positional_encoding(Tape& t, Var x) {
  const int64_t T = x.val().dim(0), d = x.val().dim(1);
  Tensor pe({T, d});
  for (int64_t pos = 0; pos < T; ++pos) {
    for (int64_t i = 0; i < d; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      pe.at2(pos, i) = static_cast<float>(std::sin(pos * freq));
      if (i + 1 < d) pe.at2(pos, i + 1) = static_cast<float>(std::cos(pos * freq));
    }
  }
  return add(x, t.constant(std::move(pe)));
}

}  // namespace elf::nn
