#include "gazby/encoder.hpp"

#include <cmath>

#include "gazby/errors.hpp"

namespace gazby::enc {

void EncoderConfig::validate() const {
  if (layers < 1 || heads < 1 || d_model < 1 || d_ff < 1 || max_len < 1) {
    throw ValidationError("encoder config extents must be positive");
  }
  if (d_model % heads != 0) {
    throw ValidationError("d_model " + std::to_string(d_model) + " not divisible by heads " + std::to_string(heads));
  }
  if (attn_dropout < 0.0 || attn_dropout >= 1.0) {
    throw ValidationError("attn_dropout must lie in [0, 1)");
  }
  if (vocab_size < 1) throw ValidationError("encoder vocab_size must be set");
}

namespace {

Parameter make_weight(const std::string& name, std::vector<int> shape, int fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  nn::init_uniform_fan_in(t, fan_in, rng);
  return Parameter(name, std::move(t));
}

Parameter make_zeros(const std::string& name, std::vector<int> shape) {
  return Parameter(name, Tensor::zeros(std::move(shape)));
}

Parameter make_ones(const std::string& name, std::vector<int> shape) {
  return Parameter(name, Tensor::full(std::move(shape), 1.0));
}

}  // namespace

EncoderLayerParams::EncoderLayerParams(const std::string& prefix, const EncoderConfig& cfg, Rng& rng)
    : wq(make_weight(prefix + ".wq", {cfg.d_model, cfg.d_model}, cfg.d_model, rng)),
      bq(make_zeros(prefix + ".bq", {cfg.d_model})),
      wk(make_weight(prefix + ".wk", {cfg.d_model, cfg.d_model}, cfg.d_model, rng)),
      bk(make_zeros(prefix + ".bk", {cfg.d_model})),
      wv(make_weight(prefix + ".wv", {cfg.d_model, cfg.d_model}, cfg.d_model, rng)),
      bv(make_zeros(prefix + ".bv", {cfg.d_model})),
      wo(make_weight(prefix + ".wo", {cfg.d_model, cfg.d_model}, cfg.d_model, rng)),
      bo(make_zeros(prefix + ".bo", {cfg.d_model})),
      ln1_gamma(make_ones(prefix + ".ln1_gamma", {cfg.d_model})),
      ln1_beta(make_zeros(prefix + ".ln1_beta", {cfg.d_model})),
      ff1_w(make_weight(prefix + ".ff1_w", {cfg.d_model, cfg.d_ff}, cfg.d_model, rng)),
      ff1_b(make_zeros(prefix + ".ff1_b", {cfg.d_ff})),
      ff2_w(make_weight(prefix + ".ff2_w", {cfg.d_ff, cfg.d_model}, cfg.d_ff, rng)),
      ff2_b(make_zeros(prefix + ".ff2_b", {cfg.d_model})),
      ln2_gamma(make_ones(prefix + ".ln2_gamma", {cfg.d_model})),
      ln2_beta(make_zeros(prefix + ".ln2_beta", {cfg.d_model})) {}

void EncoderLayerParams::collect(std::vector<Parameter*>& out) {
  for (Parameter* p : {&wq, &bq, &wk, &bk, &wv, &bv, &wo, &bo, &ln1_gamma, &ln1_beta, &ff1_w, &ff1_b, &ff2_w, &ff2_b,
                       &ln2_gamma, &ln2_beta}) {
    out.push_back(p);
  }
}

EncoderParams::EncoderParams(const EncoderConfig& config, Rng& rng, const std::string& prefix)
    : cfg(config),
      token_embedding(make_weight(prefix + ".token_embedding", {config.vocab_size, config.d_model}, config.d_model,
                                  rng)),
      position_embedding(make_weight(prefix + ".position_embedding", {config.max_len, config.d_model}, config.d_model,
                                     rng)) {
  cfg.validate();
  layers.reserve(static_cast<std::size_t>(cfg.layers));
  for (int l = 0; l < cfg.layers; ++l) {
    layers.emplace_back(prefix + ".layer" + std::to_string(l), cfg, rng);
  }
}

std::vector<Parameter*> EncoderParams::parameters() {
  std::vector<Parameter*> out{&token_embedding, &position_embedding};
  for (auto& l : layers) l.collect(out);
  return out;
}

GazeMatrix expand_gaze(const GazeScores& g, int dim) {
  if (g.size() == 0) throw ValidationError("expand_gaze: empty gaze vector");
  if (dim < 1) throw ValidationError("expand_gaze: dim must be >= 1");
  Tensor m({g.size(), dim});
  for (int i = 0; i < g.size(); ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = g.values[static_cast<std::size_t>(i)];
  }
  return GazeMatrix{std::move(m)};
}

Tensor attention_logits(const Tensor& embeddings, const EncoderLayerParams& layer, const EncoderConfig& cfg,
                        int head, const GazeMatrix* gaze) {
  const int dim = cfg.head_dim();
  Tape tape;
  ParamMap pm = ParamMap::frozen(tape);
  Var e = tape.constant_ref(embeddings);
  Var q = tape.add_row_broadcast(tape.matmul(e, pm(layer.wq)), pm(layer.bq));
  Var k = tape.add_row_broadcast(tape.matmul(e, pm(layer.wk)), pm(layer.bk));
  Var qh = tape.slice_cols(q, head * dim, dim);
  Var kh = tape.slice_cols(k, head * dim, dim);
  if (gaze != nullptr) {
    kh = tape.mul(kh, tape.constant_ref(gaze->values));
  }
  Var logits = tape.scale(tape.matmul(qh, tape.transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dim)));
  return tape.value(logits);
}

Var attention_layer(ParamMap& pm, Var embeddings, const EncoderLayerParams& layer, const EncoderConfig& cfg,
                    const std::vector<std::uint8_t>& key_keep, Var gaze_matrix, Rng* dropout_rng) {
  Tape& tape = pm.tape();
  const Tensor& e_val = tape.value(embeddings);
  const int n = e_val.rows();
  const int dim = cfg.head_dim();
  if (static_cast<int>(key_keep.size()) != n) {
    throw ValidationError("attention mask length " + std::to_string(key_keep.size()) + " != sequence length " +
                          std::to_string(n));
  }
  if (gaze_matrix.valid()) {
    const Tensor& g = tape.value(gaze_matrix);
    if (g.rank() != 2 || g.rows() != n || g.cols() != dim) {
      throw ValidationError("gaze matrix shape " + nn::shape_string(g.shape()) + " does not match sequence length " +
                            std::to_string(n) + " x head dim " + std::to_string(dim));
    }
  }

  Var q = tape.add_row_broadcast(tape.matmul(embeddings, pm(layer.wq)), pm(layer.bq));
  Var k = tape.add_row_broadcast(tape.matmul(embeddings, pm(layer.wk)), pm(layer.bk));
  Var v = tape.add_row_broadcast(tape.matmul(embeddings, pm(layer.wv)), pm(layer.bv));

  const double inv_sqrt_dim = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<Var> head_outputs;
  head_outputs.reserve(static_cast<std::size_t>(cfg.heads));
  for (int h = 0; h < cfg.heads; ++h) {
    Var qh = tape.slice_cols(q, h * dim, dim);
    Var kh = tape.slice_cols(k, h * dim, dim);
    Var vh = tape.slice_cols(v, h * dim, dim);
    if (gaze_matrix.valid()) {
      kh = tape.mul(kh, gaze_matrix);
    }
    Var logits = tape.scale(tape.matmul(qh, tape.transpose(kh)), inv_sqrt_dim);
    Var probs = tape.softmax_rows_masked(logits, key_keep);
    if (cfg.attn_dropout > 0.0 && dropout_rng != nullptr) {
      // inverted dropout on attention probabilities
      Tensor mask({n, n});
      const double keep_scale = 1.0 / (1.0 - cfg.attn_dropout);
      for (std::size_t i = 0; i < mask.size(); ++i) {
        mask[i] = dropout_rng->uniform() < cfg.attn_dropout ? 0.0 : keep_scale;
      }
      probs = tape.mul(probs, tape.constant(std::move(mask)));
    }
    head_outputs.push_back(tape.matmul(probs, vh));
  }
  Var concat = cfg.heads == 1 ? head_outputs[0] : tape.concat_cols(head_outputs);
  Var projected = tape.add_row_broadcast(tape.matmul(concat, pm(layer.wo)), pm(layer.bo));
  Var res1 = tape.layer_norm(tape.add(embeddings, projected), pm(layer.ln1_gamma), pm(layer.ln1_beta));
  Var ff = tape.add_row_broadcast(tape.matmul(res1, pm(layer.ff1_w)), pm(layer.ff1_b));
  ff = tape.relu(ff);
  ff = tape.add_row_broadcast(tape.matmul(ff, pm(layer.ff2_w)), pm(layer.ff2_b));
  return tape.layer_norm(tape.add(res1, ff), pm(layer.ln2_gamma), pm(layer.ln2_beta));
}

Tensor attention(const Tensor& embeddings, const EncoderLayerParams& layer, const EncoderConfig& cfg,
                 const std::vector<std::uint8_t>& key_keep, const GazeMatrix* gaze) {
  Tape tape;
  ParamMap pm = ParamMap::frozen(tape);
  Var e = tape.constant_ref(embeddings);
  Var g{};
  if (gaze != nullptr) g = tape.constant_ref(gaze->values);
  Var out = attention_layer(pm, e, layer, cfg, key_keep, g);
  return tape.value(out);
}

Var encode(ParamMap& pm, const EncoderParams& params, const tok::TokenSequence& tokens, Var gaze_scores,
           GazeMode mode, Rng* dropout_rng, Var input_scale) {
  Tape& tape = pm.tape();
  const int n = tokens.size();
  if (n == 0) throw ValidationError("encode: empty token sequence");
  if (n > params.cfg.max_len) {
    throw ValidationError("encode: sequence length " + std::to_string(n) + " exceeds max_len " +
                          std::to_string(params.cfg.max_len));
  }
  for (int id : tokens.ids) {
    if (id < 0 || id >= params.cfg.vocab_size) {
      throw ValidationError("encode: token id " + std::to_string(id) + " outside embedding range");
    }
  }
  if (mode != GazeMode::None && !gaze_scores.valid()) {
    throw ValidationError("encode: gaze scores required for the requested gaze mode");
  }

  Var tok_rows = tape.embedding(pm(params.token_embedding), tokens.ids);
  Var pos_rows = tape.slice_rows(pm(params.position_embedding), 0, n);
  Var x = tape.add(tok_rows, pos_rows);
  if (input_scale.valid()) {
    const Tensor& s = tape.value(input_scale);
    if (s.rank() != 1 || s.dim(0) != n) {
      throw ValidationError("encode: input_scale shape " + nn::shape_string(s.shape()) +
                            " does not match sequence length " + std::to_string(n));
    }
    x = tape.mul_rows(x, input_scale);
  }

  Var gaze_matrix{};
  if (mode != GazeMode::None) {
    const Tensor& g = tape.value(gaze_scores);
    if (g.rank() != 1 || g.dim(0) != n) {
      throw ValidationError("encode: gaze scores shape " + nn::shape_string(g.shape()) +
                            " does not match sequence length " + std::to_string(n));
    }
    gaze_matrix = tape.expand_cols(gaze_scores, params.cfg.head_dim());
  }

  const auto keep = tokens.pad_keep_mask();
  for (int l = 0; l < params.cfg.layers; ++l) {
    const bool modulate = mode == GazeMode::AllLayers || (mode == GazeMode::LastLayer && l == params.cfg.layers - 1);
    x = attention_layer(pm, x, params.layers[static_cast<std::size_t>(l)], params.cfg, keep,
                        modulate ? gaze_matrix : Var{}, dropout_rng);
  }
  return x;
}

Tensor encode(const EncoderParams& params, const tok::TokenSequence& tokens, const GazeScores* gaze, GazeMode mode) {
  Tape tape;
  ParamMap pm = ParamMap::frozen(tape);
  Var g{};
  if (gaze != nullptr) g = tape.constant(gaze->tensor());
  Var out = encode(pm, params, tokens, g, mode);
  return tape.value(out);
}

}  // namespace gazby::enc
