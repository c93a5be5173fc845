#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gazby/encoder.hpp"
#include "gazby/gaze.hpp"
#include "gazby/tokenizer.hpp"

namespace gazby::rank {

using enc::GazeScores;
using nn::Parameter;
using nn::ParamMap;
using nn::Tape;
using nn::Tensor;
using nn::Var;

enum class CrossMode { Baseline, FirstLayer, AllLayers, LastLayer };
enum class BiMode { Baseline, MaxSim, LastLayer, Combined, Tfidf };

const char* cross_mode_name(CrossMode m);
const char* bi_mode_name(BiMode m);
CrossMode parse_cross_mode(const std::string& name);
BiMode parse_bi_mode(const std::string& name);

struct TrainingTriple {
  std::string query;
  std::string positive;
  std::string negative;
};

// Smoothed inverse document frequency over wordpiece pieces:
// idf(t) = ln((N + 1) / (df(t) + 1)) + 1, always positive. Absent pieces use
// df = 0.
struct IdfTable {
  std::unordered_map<std::string, long> df;
  long collection_size = 0;

  bool empty() const { return collection_size == 0; }
  double lookup(const std::string& piece) const;
};

// --- late-interaction scoring --------------------------------------------------

// Weighted MaxSim over pre-selected, L2-normalized rows:
//   S = sum_i wq[i] * max_j ( <q_i, d_j> * wd[j] )
// The document weight sits inside the max, binding j.
Var weighted_maxsim(Tape& tape, Var query_rows, Var doc_rows, Var query_weights, Var doc_weights);

// Checked double-level entry points over explicit embeddings (rows must be
// L2-normalized; the query side must be nonempty).
double gaze_maxsim(const Tensor& query_embeddings, const Tensor& doc_embeddings, const std::vector<double>& gq,
                   const std::vector<double>& gd);
double idf_maxsim(const Tensor& query_embeddings, const Tensor& doc_embeddings,
                  const std::vector<std::string>& query_pieces, const IdfTable& idf);
double plain_maxsim(const Tensor& query_embeddings, const Tensor& doc_embeddings);

// --- losses ---------------------------------------------------------------------

// -sum_{positives} log S - sum_{negatives} log(1 - S); scores are clamped to
// [1e-7, 1 - 1e-7] first (a clamp event emits one warning per call).
Var pointwise_bce_loss(Tape& tape, const std::vector<std::pair<Var, bool>>& scored);
double pointwise_bce_loss(const std::vector<std::pair<double, bool>>& scored);

// -log softmax([s_pos, s_neg])[0] over raw scores.
Var pairwise_ce_loss(Tape& tape, Var s_pos, Var s_neg);
double pairwise_ce_loss(double s_pos, double s_neg);

// --- cross-encoder ---------------------------------------------------------------

struct CrossEncoderModel {
  enc::EncoderParams encoder;
  Parameter head_w;  // d_model x 2; column 1 is the relevant logit
  Parameter head_b;
  gaze::GazeModel gaze_model;
  std::shared_ptr<const tok::Vocabulary> vocab;

  CrossEncoderModel(const enc::EncoderConfig& enc_cfg, const gaze::GazeConfig& gaze_cfg,
                    std::shared_ptr<const tok::Vocabulary> vocabulary, std::uint64_t seed);

  std::vector<Parameter*> ranker_parameters();
  std::vector<Parameter*> parameters();  // ranker + gaze

  tok::TokenSequence frame(const std::string& query, const std::string& doc) const;
};

// P(relevant) from the [CLS] row. `ranker_pm` binds encoder/head parameters,
// `gaze_pm` the gaze model (frozen or trainable independently).
Var score_cross_on_tape(ParamMap& ranker_pm, ParamMap& gaze_pm, const CrossEncoderModel& model,
                        const tok::TokenSequence& framed, CrossMode mode);

double score_cross(const CrossEncoderModel& model, const std::string& query, const std::string& doc, CrossMode mode);

// --- bi-encoder ------------------------------------------------------------------

struct BiEncoderConfig {
  enc::EncoderConfig encoder;
  int d_out = 32;          // cosine-space projection width
  int max_query_len = 32;  // query frame length, [MASK]-augmented
  int max_doc_len = 180;
  bool share_towers = true;
  double mask_gaze_weight = 1.0;  // neutral gaze for [MASK] augmentation rows

  void validate() const;
};

struct BiEncoderModel {
  BiEncoderConfig cfg;
  enc::EncoderParams query_tower;
  std::optional<enc::EncoderParams> doc_tower;  // engaged when towers are not shared
  Parameter projection;                         // d_model x d_out
  gaze::GazeModel gaze_model;
  std::shared_ptr<const tok::Vocabulary> vocab;
  IdfTable idf;  // required by Tfidf mode only

  BiEncoderModel(const BiEncoderConfig& config, const gaze::GazeConfig& gaze_cfg,
                 std::shared_ptr<const tok::Vocabulary> vocabulary, std::uint64_t seed);

  const enc::EncoderParams& tower_for_docs() const { return doc_tower ? *doc_tower : query_tower; }
  enc::EncoderParams& tower_for_docs() { return doc_tower ? *doc_tower : query_tower; }

  std::vector<Parameter*> ranker_parameters();
  std::vector<Parameter*> parameters();
};

// One tower's contribution to MaxSim: normalized projected embeddings for the
// kept rows plus their summation / max weights for the given mode.
struct EncodedPassage {
  Tensor embeddings;            // k x d_out, L2-normalized
  std::vector<double> weights;  // parallel to rows
};

EncodedPassage encode_query(const BiEncoderModel& model, const std::string& text, BiMode mode);
EncodedPassage encode_document(const BiEncoderModel& model, const std::string& text, BiMode mode);
double score_pair(const EncodedPassage& query, const EncodedPassage& doc);

Var score_bi_on_tape(ParamMap& ranker_pm, ParamMap& gaze_pm, const BiEncoderModel& model, const std::string& query,
                     const std::string& doc, BiMode mode);

double score_bi(const BiEncoderModel& model, const std::string& query, const std::string& doc, BiMode mode);

// --- training ---------------------------------------------------------------------

struct TrainRankerOptions {
  int epochs = 3;
  int batch_size = 8;
  double lr = 3e-6;
  double adam_eps = 1e-6;
  double clip_norm = 1.0;
  bool freeze_gaze = false;
  long max_steps = -1;  // optimizer-step cap, -1 = unlimited
  std::uint64_t shuffle_seed = 11;
  CrossMode cross_mode = CrossMode::LastLayer;
  BiMode bi_mode = BiMode::MaxSim;
};

struct TrainRankerResult {
  std::vector<double> loss_curve;  // one entry per optimizer step (batch mean)
  long steps = 0;
};

// Gradients flow into encoder, head, and gaze parameters jointly unless
// freeze_gaze is set. Throws NumericalError naming the step on a non-finite
// loss.
TrainRankerResult train_ranker(CrossEncoderModel& model, const std::vector<TrainingTriple>& triples,
                               const TrainRankerOptions& opt);
TrainRankerResult train_ranker(BiEncoderModel& model, const std::vector<TrainingTriple>& triples,
                               const TrainRankerOptions& opt);

}  // namespace gazby::rank
