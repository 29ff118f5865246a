#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elf/nn/tape.hpp"

namespace elf::nn {

enum class Init { kFanIn, kNormal001, kZero };

struct LinearLayer {
  Param* w = nullptr;
  Param* b = nullptr;

  static LinearLayer make(ParamStore& ps, const std::string& name, int64_t in, int64_t out,
                          Rng& rng, Init init = Init::kFanIn, bool bias = true);
  Var forward(Tape& t, Var x) const;
};

struct Conv1dLayer {
  Param* w = nullptr;
  Param* b = nullptr;
  int stride = 1, pad = 0, dilation = 1, groups = 1;

  static Conv1dLayer make(ParamStore& ps, const std::string& name, int64_t cin, int64_t cout,
                          int k, Rng& rng, int stride = 1, int pad = 0, int dilation = 1,
                          int groups = 1, Init init = Init::kFanIn);
  Var forward(Tape& t, Var x) const;
};

struct ConvT1dLayer {
  Param* w = nullptr;
  Param* b = nullptr;
  int stride = 1, pad = 0;

  static ConvT1dLayer make(ParamStore& ps, const std::string& name, int64_t cin, int64_t cout,
                           int k, int stride, int pad, Rng& rng, Init init = Init::kNormal001);
  Var forward(Tape& t, Var x) const;
};

struct Conv2dLayer {
  Param* w = nullptr;
  Param* b = nullptr;
  int stride_h = 1, stride_w = 1, pad_h = 0, pad_w = 0;

  static Conv2dLayer make(ParamStore& ps, const std::string& name, int64_t cin, int64_t cout,
                          int kh, int kw, int stride_h, int stride_w, int pad_h, int pad_w,
                          Rng& rng, Init init = Init::kNormal001);
  Var forward(Tape& t, Var x) const;
};

struct LayerNormLayer {
  Param* gamma = nullptr;
  Param* beta = nullptr;

  static LayerNormLayer make(ParamStore& ps, const std::string& name, int64_t dim);
  Var forward(Tape& t, Var x) const;
};

struct EmbeddingLayer {
  Param* table = nullptr;

  static EmbeddingLayer make(ParamStore& ps, const std::string& name, int64_t vocab, int64_t dim,
                             Rng& rng);
  Var forward(Tape& t, const std::vector<int>& ids) const;
};

// Scaled dot-product multi-head attention over full sequences (no masking;
// batches are processed one item at a time).
struct MultiHeadAttention {
  LinearLayer wq, wk, wv, wo;
  int heads = 1;
  int64_t d_model = 0;

  static MultiHeadAttention make(ParamStore& ps, const std::string& name, int64_t d_model,
                                 int heads, Rng& rng);

  struct Parts {
    Var out;       // [Lq, d] after the output projection
    Var combined;  // [Lq, d] attention-weighted values before the output projection
  };
  Parts forward_parts(Tape& t, Var q, Var kv) const;
  Var forward(Tape& t, Var q, Var kv) const { return forward_parts(t, q, kv).out; }
};

// Pre-norm transformer block: x + attn(ln(x)), then x + ffn(ln(x)).
struct TransformerBlock {
  MultiHeadAttention attn;
  LayerNormLayer ln1, ln2;
  LinearLayer ff1, ff2;

  static TransformerBlock make(ParamStore& ps, const std::string& name, int64_t d_model,
                               int heads, int64_t d_ff, Rng& rng);
  Var forward(Tape& t, Var x) const;
};

// Gated dilated convolution stack (the WN module family): per layer a
// kernel-k conv to 2*hidden channels, tanh/sigmoid gate, and a 1x1 res+skip
// projection. Output is the skip sum. Input/output layout [hidden, T].
struct WaveNetStack {
  std::vector<Conv1dLayer> in_convs;
  std::vector<Conv1dLayer> res_skip;
  int hidden = 0;

  static WaveNetStack make(ParamStore& ps, const std::string& name, int hidden, int kernel,
                           int layers, int dilation_rate, Rng& rng);
  Var forward(Tape& t, Var x) const;

  // Half-width of the receptive field in frames (for boundary-effect tests).
  int receptive_half() const;
};

Var relu(Var x);
// Sinusoidal positional encoding added to x[T, d].
Var add_positional_encoding(Tape& t, Var x);

}  // namespace elf::nn
