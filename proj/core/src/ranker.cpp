#include "gazby/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

#include "gazby/errors.hpp"
#include "gazby/optim.hpp"

namespace gazby::rank {

const char* cross_mode_name(CrossMode m) {
  switch (m) {
    case CrossMode::Baseline: return "baseline";
    case CrossMode::FirstLayer: return "first_layer";
    case CrossMode::AllLayers: return "all_layers";
    case CrossMode::LastLayer: return "last_layer";
  }
  return "?";
}

const char* bi_mode_name(BiMode m) {
  switch (m) {
    case BiMode::Baseline: return "baseline";
    case BiMode::MaxSim: return "maxsim";
    case BiMode::LastLayer: return "last_layer";
    case BiMode::Combined: return "combined";
    case BiMode::Tfidf: return "tfidf";
  }
  return "?";
}

CrossMode parse_cross_mode(const std::string& name) {
  if (name == "baseline") return CrossMode::Baseline;
  if (name == "first_layer") return CrossMode::FirstLayer;
  if (name == "all_layers") return CrossMode::AllLayers;
  if (name == "last_layer") return CrossMode::LastLayer;
  throw ValidationError("unknown cross-encoder mode: " + name);
}

BiMode parse_bi_mode(const std::string& name) {
  if (name == "baseline") return BiMode::Baseline;
  if (name == "maxsim") return BiMode::MaxSim;
  if (name == "last_layer") return BiMode::LastLayer;
  if (name == "combined") return BiMode::Combined;
  if (name == "tfidf") return BiMode::Tfidf;
  throw ValidationError("unknown bi-encoder mode: " + name);
}

double IdfTable::lookup(const std::string& piece) const {
  if (collection_size <= 0) throw ValidationError("idf table is empty");
  auto it = df.find(piece);
  const long d = it == df.end() ? 0 : it->second;
  return std::log(static_cast<double>(collection_size + 1) / static_cast<double>(d + 1)) + 1.0;
}

// --- late-interaction scoring --------------------------------------------------

Var weighted_maxsim(Tape& tape, Var query_rows, Var doc_rows, Var query_weights, Var doc_weights) {
  Var sim = tape.matmul(query_rows, tape.transpose(doc_rows));
  Var weighted = tape.mul_cols(sim, doc_weights);
  Var best = tape.row_max(weighted);
  return tape.dot(query_weights, best);
}

namespace {

void check_normalized_rows(const Tensor& m, const char* which) {
  for (int i = 0; i < m.rows(); ++i) {
    double sq = 0.0;
    for (int j = 0; j < m.cols(); ++j) sq += m(i, j) * m(i, j);
    if (std::abs(sq - 1.0) > 1e-6) {
      throw ValidationError(std::string(which) + " embeddings row " + std::to_string(i) +
                            " is not L2-normalized (|x|^2 = " + std::to_string(sq) + ")");
    }
  }
}

double maxsim_impl(const Tensor& eq, const Tensor& ed, const std::vector<double>& wq, const std::vector<double>& wd) {
  if (eq.rank() != 2 || ed.rank() != 2 || eq.cols() != ed.cols()) {
    throw ValidationError("maxsim embedding shape mismatch: " + nn::shape_string(eq.shape()) + " vs " +
                          nn::shape_string(ed.shape()));
  }
  if (eq.rows() == 0 || static_cast<int>(wq.size()) != eq.rows() || static_cast<int>(wd.size()) != ed.rows()) {
    throw ValidationError("maxsim: zero-length query or weight/row count mismatch");
  }
  check_normalized_rows(eq, "query");
  check_normalized_rows(ed, "document");
  double score = 0.0;
  for (int i = 0; i < eq.rows(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < ed.rows(); ++j) {
      double cosine = 0.0;
      for (int c = 0; c < eq.cols(); ++c) cosine += eq(i, c) * ed(j, c);
      best = std::max(best, cosine * wd[static_cast<std::size_t>(j)]);
    }
    score += wq[static_cast<std::size_t>(i)] * best;
  }
  return score;
}

}  // namespace

double gaze_maxsim(const Tensor& query_embeddings, const Tensor& doc_embeddings, const std::vector<double>& gq,
                   const std::vector<double>& gd) {
  return maxsim_impl(query_embeddings, doc_embeddings, gq, gd);
}

double idf_maxsim(const Tensor& query_embeddings, const Tensor& doc_embeddings,
                  const std::vector<std::string>& query_pieces, const IdfTable& idf) {
  if (static_cast<int>(query_pieces.size()) != query_embeddings.rows()) {
    throw ValidationError("idf_maxsim: piece count does not match query embedding rows");
  }
  std::vector<double> wq;
  wq.reserve(query_pieces.size());
  for (const auto& p : query_pieces) wq.push_back(idf.lookup(p));
  std::vector<double> wd(static_cast<std::size_t>(doc_embeddings.rows()), 1.0);
  return maxsim_impl(query_embeddings, doc_embeddings, wq, wd);
}

double plain_maxsim(const Tensor& query_embeddings, const Tensor& doc_embeddings) {
  std::vector<double> wq(static_cast<std::size_t>(query_embeddings.rows()), 1.0);
  std::vector<double> wd(static_cast<std::size_t>(doc_embeddings.rows()), 1.0);
  return maxsim_impl(query_embeddings, doc_embeddings, wq, wd);
}

// --- losses ---------------------------------------------------------------------

namespace {
constexpr double kScoreEps = 1e-7;
}

Var pointwise_bce_loss(Tape& tape, const std::vector<std::pair<Var, bool>>& scored) {
  if (scored.empty()) throw ValidationError("pointwise_bce_loss: no scores");
  bool warned = false;
  Var total{};
  for (const auto& [score, is_positive] : scored) {
    const double raw = tape.value(score)[0];
    if (!warned && (raw < kScoreEps || raw > 1.0 - kScoreEps)) {
      std::cerr << "warning: relevance score " << raw << " clamped inside cross-entropy loss\n";
      warned = true;
    }
    Var s = tape.clamp(score, kScoreEps, 1.0 - kScoreEps);
    Var term = is_positive ? tape.neg(tape.log(s)) : tape.neg(tape.log(tape.affine(s, -1.0, 1.0)));
    total = total.valid() ? tape.add(total, term) : term;
  }
  return total;
}

double pointwise_bce_loss(const std::vector<std::pair<double, bool>>& scored) {
  Tape tape;
  std::vector<std::pair<Var, bool>> vars;
  vars.reserve(scored.size());
  for (const auto& [s, pos] : scored) vars.emplace_back(tape.constant(Tensor::scalar(s)), pos);
  return tape.value(pointwise_bce_loss(tape, vars))[0];
}

Var pairwise_ce_loss(Tape& tape, Var s_pos, Var s_neg) {
  const double vp = tape.value(s_pos)[0];
  const double vn = tape.value(s_neg)[0];
  if (!std::isfinite(vp) || !std::isfinite(vn)) {
    throw NumericalError("pairwise_ce_loss: non-finite score");
  }
  return tape.softplus(tape.sub(s_neg, s_pos));
}

double pairwise_ce_loss(double s_pos, double s_neg) {
  Tape tape;
  return tape.value(pairwise_ce_loss(tape, tape.constant(Tensor::scalar(s_pos)),
                                     tape.constant(Tensor::scalar(s_neg))))[0];
}

// --- cross-encoder ---------------------------------------------------------------

CrossEncoderModel::CrossEncoderModel(const enc::EncoderConfig& enc_cfg, const gaze::GazeConfig& gaze_cfg,
                                     std::shared_ptr<const tok::Vocabulary> vocabulary, std::uint64_t seed)
    : encoder([&] {
        Rng rng(seed);
        return enc::EncoderParams(enc_cfg, rng, "cross");
      }()),
      head_w("cross.head_w", Tensor({enc_cfg.d_model, 2})),
      head_b("cross.head_b", Tensor({2})),
      gaze_model(gaze_cfg, seed ^ 0xA5A5A5A5ULL),
      vocab(std::move(vocabulary)) {
  if (!vocab) throw ValidationError("cross-encoder requires a vocabulary");
  if (enc_cfg.vocab_size != vocab->size() || gaze_cfg.vocab_size != vocab->size()) {
    throw ValidationError("cross-encoder config vocab_size does not match the vocabulary");
  }
  Rng rng(seed + 1);
  nn::init_uniform_fan_in(head_w.value, enc_cfg.d_model, rng);
}

std::vector<Parameter*> CrossEncoderModel::ranker_parameters() {
  std::vector<Parameter*> out = encoder.parameters();
  out.push_back(&head_w);
  out.push_back(&head_b);
  return out;
}

std::vector<Parameter*> CrossEncoderModel::parameters() {
  std::vector<Parameter*> out = ranker_parameters();
  for (Parameter* p : gaze_model.parameters()) out.push_back(p);
  return out;
}

tok::TokenSequence CrossEncoderModel::frame(const std::string& query, const std::string& doc) const {
  tok::WordPieces q = tok::wordpiece_tokenize_aligned(query, *vocab);
  if (q.pieces.empty()) throw ValidationError("score_cross: empty query");
  tok::WordPieces d = tok::wordpiece_tokenize_aligned(doc, *vocab);
  return tok::frame_cross(q, d, encoder.cfg.max_len, *vocab);
}

Var score_cross_on_tape(ParamMap& ranker_pm, ParamMap& gaze_pm, const CrossEncoderModel& model,
                        const tok::TokenSequence& framed, CrossMode mode) {
  Tape& tape = ranker_pm.tape();

  Var gaze_scores{};
  if (mode != CrossMode::Baseline) {
    gaze_scores = model.gaze_model.forward(gaze_pm, framed);
  }

  enc::GazeMode enc_mode = enc::GazeMode::None;
  Var input_scale{};
  switch (mode) {
    case CrossMode::Baseline: break;
    case CrossMode::FirstLayer: input_scale = gaze_scores; break;
    case CrossMode::AllLayers: enc_mode = enc::GazeMode::AllLayers; break;
    case CrossMode::LastLayer: enc_mode = enc::GazeMode::LastLayer; break;
  }

  Var encoded = enc::encode(ranker_pm, model.encoder, framed, enc_mode == enc::GazeMode::None ? Var{} : gaze_scores,
                            enc_mode, nullptr, input_scale);
  Var cls = tape.row(encoded, 0);
  Var logits = tape.add_row_broadcast(tape.matmul(cls, ranker_pm(model.head_w)), ranker_pm(model.head_b));
  Var probs = tape.softmax_rows(logits);
  return tape.pick(probs, 1);
}

double score_cross(const CrossEncoderModel& model, const std::string& query, const std::string& doc, CrossMode mode) {
  tok::TokenSequence framed = model.frame(query, doc);
  Tape tape;
  ParamMap ranker_pm = ParamMap::frozen(tape);
  ParamMap gaze_pm = ParamMap::frozen(tape);
  Var score = score_cross_on_tape(ranker_pm, gaze_pm, model, framed, mode);
  return tape.value(score)[0];
}

// --- bi-encoder ------------------------------------------------------------------

void BiEncoderConfig::validate() const {
  encoder.validate();
  if (d_out < 1) throw ValidationError("bi-encoder d_out must be positive");
  if (max_query_len < 4 || max_doc_len < 4) throw ValidationError("bi-encoder frame lengths must be at least 4");
  if (std::max(max_query_len, max_doc_len) > encoder.max_len) {
    throw ValidationError("bi-encoder frame lengths exceed encoder max_len");
  }
  if (mask_gaze_weight < 0.0) throw ValidationError("mask_gaze_weight must be nonnegative");
}

BiEncoderModel::BiEncoderModel(const BiEncoderConfig& config, const gaze::GazeConfig& gaze_cfg,
                               std::shared_ptr<const tok::Vocabulary> vocabulary, std::uint64_t seed)
    : cfg(config),
      query_tower([&] {
        config.validate();
        Rng rng(seed);
        return enc::EncoderParams(config.encoder, rng, "bi.query");
      }()),
      projection("bi.projection", Tensor({config.encoder.d_model, config.d_out})),
      gaze_model(gaze_cfg, seed ^ 0xA5A5A5A5ULL),
      vocab(std::move(vocabulary)) {
  if (!vocab) throw ValidationError("bi-encoder requires a vocabulary");
  if (cfg.encoder.vocab_size != vocab->size() || gaze_cfg.vocab_size != vocab->size()) {
    throw ValidationError("bi-encoder config vocab_size does not match the vocabulary");
  }
  if (!cfg.share_towers) {
    Rng rng(seed + 17);
    doc_tower.emplace(cfg.encoder, rng, "bi.doc");
  }
  Rng rng(seed + 1);
  nn::init_uniform_fan_in(projection.value, cfg.encoder.d_model, rng);
}

std::vector<Parameter*> BiEncoderModel::ranker_parameters() {
  std::vector<Parameter*> out = query_tower.parameters();
  if (doc_tower) {
    for (Parameter* p : doc_tower->parameters()) out.push_back(p);
  }
  out.push_back(&projection);
  return out;
}

std::vector<Parameter*> BiEncoderModel::parameters() {
  std::vector<Parameter*> out = ranker_parameters();
  for (Parameter* p : gaze_model.parameters()) out.push_back(p);
  return out;
}

namespace {

bool is_content(tok::TokenKind k) {
  return k == tok::TokenKind::Regular || k == tok::TokenKind::Unk;
}

// Query rows entering the MaxSim summation: everything except [CLS], [SEP]
// and [PAD]; [MASK] augmentation stays in. content_only restricts to real
// terms (the tf-idf weighting path).
std::vector<int> maxsim_query_rows(const tok::TokenSequence& seq, bool content_only) {
  std::vector<int> rows;
  for (int i = 0; i < seq.size(); ++i) {
    const tok::TokenKind k = seq.kinds[static_cast<std::size_t>(i)];
    if (content_only) {
      if (is_content(k)) rows.push_back(i);
    } else if (k != tok::TokenKind::Cls && k != tok::TokenKind::Sep && k != tok::TokenKind::Pad) {
      rows.push_back(i);
    }
  }
  return rows;
}

// Document rows available to the inner max: everything except [PAD].
std::vector<int> maxsim_doc_rows(const tok::TokenSequence& seq) {
  std::vector<int> rows;
  for (int i = 0; i < seq.size(); ++i) {
    if (seq.kinds[static_cast<std::size_t>(i)] != tok::TokenKind::Pad) rows.push_back(i);
  }
  return rows;
}

bool mode_uses_attention_gaze(BiMode m) {
  return m == BiMode::LastLayer || m == BiMode::Combined;
}

bool mode_uses_maxsim_gaze(BiMode m) {
  return m == BiMode::MaxSim || m == BiMode::Combined;
}

struct TowerOutput {
  Var rows;     // k x d_out, normalized, kept rows only
  Var weights;  // k
  std::vector<int> kept;
};

// Shared tower forward for both scoring and training. `is_query` selects the
// framing role, the row filter, and [MASK] handling.
TowerOutput tower_forward(ParamMap& ranker_pm, ParamMap& gaze_pm, const BiEncoderModel& model,
                          const tok::TokenSequence& framed, BiMode mode, bool is_query) {
  Tape& tape = ranker_pm.tape();
  const enc::EncoderParams& tower = is_query ? model.query_tower : model.tower_for_docs();

  Var gaze_scores{};
  if (mode_uses_attention_gaze(mode) || mode_uses_maxsim_gaze(mode)) {
    gaze_scores = model.gaze_model.forward(gaze_pm, framed);
  }

  const enc::GazeMode enc_mode = mode_uses_attention_gaze(mode) ? enc::GazeMode::LastLayer : enc::GazeMode::None;
  Var encoded = enc::encode(ranker_pm, tower, framed, enc_mode == enc::GazeMode::None ? Var{} : gaze_scores, enc_mode);
  Var projected = tape.matmul(encoded, ranker_pm(model.projection));
  Var normalized = tape.l2_normalize_rows(projected);

  TowerOutput out;
  out.kept = is_query ? maxsim_query_rows(framed, mode == BiMode::Tfidf) : maxsim_doc_rows(framed);
  if (out.kept.empty()) throw ValidationError("maxsim: zero-length query after row selection");
  out.rows = tape.gather_rows(normalized, out.kept);

  const int k = static_cast<int>(out.kept.size());
  if (is_query && mode == BiMode::Tfidf) {
    Tensor w({k});
    for (int i = 0; i < k; ++i) {
      const int pos = out.kept[static_cast<std::size_t>(i)];
      w[static_cast<std::size_t>(i)] = model.idf.lookup(model.vocab->token(framed.ids[static_cast<std::size_t>(pos)]));
    }
    out.weights = tape.constant(std::move(w));
  } else if (mode_uses_maxsim_gaze(mode)) {
    Var kept_scores = tape.reshape(tape.gather_rows(tape.reshape(gaze_scores, {framed.size(), 1}), out.kept), {k});
    if (is_query) {
      // [MASK] augmentation rows get the fixed neutral weight instead of the
      // predicted gaze (which trains toward 0 on specials).
      Tensor keep_flag({k});
      Tensor mask_weight({k});
      for (int i = 0; i < k; ++i) {
        const bool is_mask =
            framed.kinds[static_cast<std::size_t>(out.kept[static_cast<std::size_t>(i)])] == tok::TokenKind::Mask;
        keep_flag[static_cast<std::size_t>(i)] = is_mask ? 0.0 : 1.0;
        mask_weight[static_cast<std::size_t>(i)] = is_mask ? model.cfg.mask_gaze_weight : 0.0;
      }
      out.weights = tape.add(tape.mul(kept_scores, tape.constant(std::move(keep_flag))),
                             tape.constant(std::move(mask_weight)));
    } else {
      out.weights = kept_scores;
    }
  } else {
    out.weights = tape.constant(Tensor::full({k}, 1.0));
  }
  return out;
}

tok::TokenSequence frame_bi_text(const BiEncoderModel& model, const std::string& text, bool is_query) {
  tok::WordPieces pieces = tok::wordpiece_tokenize_aligned(text, *model.vocab);
  if (is_query && pieces.pieces.empty()) throw ValidationError("score_bi: empty query");
  return tok::frame_bi(pieces, is_query ? tok::FrameRole::Query : tok::FrameRole::Document, model.cfg.max_query_len,
                       model.cfg.max_doc_len, *model.vocab);
}

EncodedPassage encode_side(const BiEncoderModel& model, const std::string& text, BiMode mode, bool is_query) {
  tok::TokenSequence framed = frame_bi_text(model, text, is_query);
  Tape tape;
  ParamMap ranker_pm = ParamMap::frozen(tape);
  ParamMap gaze_pm = ParamMap::frozen(tape);
  TowerOutput out = tower_forward(ranker_pm, gaze_pm, model, framed, mode, is_query);
  EncodedPassage passage;
  passage.embeddings = tape.value(out.rows);
  const Tensor& w = tape.value(out.weights);
  passage.weights.assign(w.data(), w.data() + w.size());
  return passage;
}

}  // namespace

EncodedPassage encode_query(const BiEncoderModel& model, const std::string& text, BiMode mode) {
  return encode_side(model, text, mode, true);
}

EncodedPassage encode_document(const BiEncoderModel& model, const std::string& text, BiMode mode) {
  return encode_side(model, text, mode, false);
}

double score_pair(const EncodedPassage& query, const EncodedPassage& doc) {
  return maxsim_impl(query.embeddings, doc.embeddings, query.weights, doc.weights);
}

Var score_bi_on_tape(ParamMap& ranker_pm, ParamMap& gaze_pm, const BiEncoderModel& model, const std::string& query,
                     const std::string& doc, BiMode mode) {
  Tape& tape = ranker_pm.tape();
  tok::TokenSequence q_frame = frame_bi_text(model, query, true);
  tok::TokenSequence d_frame = frame_bi_text(model, doc, false);
  TowerOutput q = tower_forward(ranker_pm, gaze_pm, model, q_frame, mode, true);
  TowerOutput d = tower_forward(ranker_pm, gaze_pm, model, d_frame, mode, false);
  return weighted_maxsim(tape, q.rows, d.rows, q.weights, d.weights);
}

double score_bi(const BiEncoderModel& model, const std::string& query, const std::string& doc, BiMode mode) {
  Tape tape;
  ParamMap ranker_pm = ParamMap::frozen(tape);
  ParamMap gaze_pm = ParamMap::frozen(tape);
  Var s = score_bi_on_tape(ranker_pm, gaze_pm, model, query, doc, mode);
  return tape.value(s)[0];
}

// --- training ---------------------------------------------------------------------

namespace {

void validate_triples(const std::vector<TrainingTriple>& triples) {
  if (triples.empty()) throw ValidationError("train_ranker: empty triple set");
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (triples[i].positive == triples[i].negative) {
      throw ValidationError("train_ranker: triple " + std::to_string(i) + " has identical positive and negative");
    }
  }
}

template <typename LossFn>
TrainRankerResult run_training(std::vector<Parameter*> trainable, const std::vector<TrainingTriple>& triples,
                               const TrainRankerOptions& opt, LossFn&& triple_loss) {
  TrainRankerResult result;
  if (opt.epochs == 0 || opt.max_steps == 0) return result;

  nn::Adam::Options adam_opt;
  adam_opt.lr = opt.lr;
  adam_opt.eps = opt.adam_eps;
  adam_opt.clip_norm = opt.clip_norm;
  nn::Adam adam(trainable, adam_opt);

  std::vector<std::size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(opt.shuffle_seed);

  long step = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    std::size_t batch_start = 0;
    while (batch_start < order.size()) {
      if (opt.max_steps >= 0 && step >= opt.max_steps) return result;
      const std::size_t batch_end = std::min(order.size(), batch_start + static_cast<std::size_t>(opt.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(batch_end - batch_start);
      adam.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t bi = batch_start; bi < batch_end; ++bi) {
        Tape tape;
        Var loss = triple_loss(tape, triples[order[bi]]);
        const double loss_value = tape.value(loss)[0];
        if (!std::isfinite(loss_value)) {
          throw NumericalError("train_ranker: non-finite loss at step " + std::to_string(step));
        }
        batch_loss += loss_value * inv_batch;
        tape.backward(tape.scale(loss, inv_batch));
      }
      adam.step();
      result.loss_curve.push_back(batch_loss);
      ++step;
      result.steps = step;
      batch_start = batch_end;
    }
  }
  return result;
}

}  // namespace

TrainRankerResult train_ranker(CrossEncoderModel& model, const std::vector<TrainingTriple>& triples,
                               const TrainRankerOptions& opt) {
  validate_triples(triples);
  std::vector<Parameter*> trainable = model.ranker_parameters();
  if (!opt.freeze_gaze) {
    for (Parameter* p : model.gaze_model.parameters()) trainable.push_back(p);
  }
  return run_training(std::move(trainable), triples, opt, [&](Tape& tape, const TrainingTriple& t) {
    ParamMap ranker_pm = ParamMap::trainable(tape);
    ParamMap gaze_pm = opt.freeze_gaze ? ParamMap::frozen(tape) : ParamMap::trainable(tape);
    Var s_pos = score_cross_on_tape(ranker_pm, gaze_pm, model, model.frame(t.query, t.positive), opt.cross_mode);
    Var s_neg = score_cross_on_tape(ranker_pm, gaze_pm, model, model.frame(t.query, t.negative), opt.cross_mode);
    return pointwise_bce_loss(tape, {{s_pos, true}, {s_neg, false}});
  });
}

TrainRankerResult train_ranker(BiEncoderModel& model, const std::vector<TrainingTriple>& triples,
                               const TrainRankerOptions& opt) {
  validate_triples(triples);
  std::vector<Parameter*> trainable = model.ranker_parameters();
  if (!opt.freeze_gaze) {
    for (Parameter* p : model.gaze_model.parameters()) trainable.push_back(p);
  }
  return run_training(std::move(trainable), triples, opt, [&](Tape& tape, const TrainingTriple& t) {
    ParamMap ranker_pm = ParamMap::trainable(tape);
    ParamMap gaze_pm = opt.freeze_gaze ? ParamMap::frozen(tape) : ParamMap::trainable(tape);
    Var s_pos = score_bi_on_tape(ranker_pm, gaze_pm, model, t.query, t.positive, opt.bi_mode);
    Var s_neg = score_bi_on_tape(ranker_pm, gaze_pm, model, t.query, t.negative, opt.bi_mode);
    return pairwise_ce_loss(tape, s_pos, s_neg);
  });
}

}  // namespace gazby::rank
