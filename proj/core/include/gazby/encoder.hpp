#pragma once

#include <string>
#include <vector>

#include "gazby/autodiff.hpp"
#include "gazby/tokenizer.hpp"

namespace gazby::enc {

using nn::Parameter;
using nn::ParamMap;
using nn::Tape;
using nn::Tensor;
using nn::Var;

struct EncoderConfig {
  int layers = 4;
  int heads = 4;
  int d_model = 64;
  int d_ff = 128;
  int max_len = 128;
  double attn_dropout = 0.0;
  int vocab_size = 0;  // set before init

  int head_dim() const { return d_model / heads; }
  void validate() const;
};

// Per-layer weights. The per-head query/key/value projections are realized
// as fused d_model x d_model maps split into head-sized column blocks.
struct EncoderLayerParams {
  Parameter wq, bq;
  Parameter wk, bk;
  Parameter wv, bv;
  Parameter wo, bo;
  Parameter ln1_gamma, ln1_beta;
  Parameter ff1_w, ff1_b;
  Parameter ff2_w, ff2_b;
  Parameter ln2_gamma, ln2_beta;

  EncoderLayerParams(const std::string& prefix, const EncoderConfig& cfg, Rng& rng);
  void collect(std::vector<Parameter*>& out);
};

struct EncoderParams {
  EncoderConfig cfg;
  Parameter token_embedding;     // vocab_size x d_model
  Parameter position_embedding;  // max_len x d_model, learned absolute positions
  std::vector<EncoderLayerParams> layers;

  EncoderParams(const EncoderConfig& config, Rng& rng, const std::string& prefix = "enc");
  std::vector<Parameter*> parameters();
};

// Per-token fixation scores in [0, 1], aligned to a token sequence.
struct GazeScores {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  static GazeScores ones(int n) { return GazeScores{std::vector<double>(static_cast<std::size_t>(n), 1.0)}; }
  Tensor tensor() const { return Tensor({size()}, values); }
};

// n x dim matrix whose row j repeats the j-th gaze score across all columns.
struct GazeMatrix {
  Tensor values;  // n x dim

  int rows() const { return values.rows(); }
  int dim() const { return values.cols(); }
};

GazeMatrix expand_gaze(const GazeScores& g, int dim);

enum class GazeMode { None, LastLayer, AllLayers };

// Pre-softmax attention logits of one head: Q_h (K_h after optional gaze row
// scaling)^T / sqrt(head_dim), before PAD masking. Diagnostic surface used by
// tests of the logit-level gaze effect.
Tensor attention_logits(const Tensor& embeddings, const EncoderLayerParams& layer, const EncoderConfig& cfg,
                        int head, const GazeMatrix* gaze);

// One full encoder layer: multi-head attention (keys scaled row-wise by the
// gaze matrix when given, PAD keys excluded from the softmax), residual +
// layer norm, feed-forward, residual + layer norm.
Var attention_layer(ParamMap& pm, Var embeddings, const EncoderLayerParams& layer, const EncoderConfig& cfg,
                    const std::vector<std::uint8_t>& key_keep, Var gaze_matrix, Rng* dropout_rng = nullptr);

Tensor attention(const Tensor& embeddings, const EncoderLayerParams& layer, const EncoderConfig& cfg,
                 const std::vector<std::uint8_t>& key_keep, const GazeMatrix* gaze = nullptr);

// Token + position embeddings followed by the layer stack. LastLayer applies
// gaze-modulated attention only in the final layer, AllLayers in every layer.
// `gaze_scores` must be valid when mode != None and aligned with `tokens`.
// `input_scale`, when valid, multiplies each input embedding row i by its
// i-th entry before layer 1 (the first-layer gaze injection).
Var encode(ParamMap& pm, const EncoderParams& params, const tok::TokenSequence& tokens, Var gaze_scores,
           GazeMode mode, Rng* dropout_rng = nullptr, Var input_scale = {});

Tensor encode(const EncoderParams& params, const tok::TokenSequence& tokens, const GazeScores* gaze, GazeMode mode);

}  // namespace gazby::enc
