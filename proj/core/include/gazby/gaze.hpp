#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "gazby/autodiff.hpp"
#include "gazby/encoder.hpp"
#include "gazby/tokenizer.hpp"

namespace gazby::gaze {

using enc::GazeScores;
using nn::Parameter;
using nn::ParamMap;
using nn::Tape;
using nn::Tensor;
using nn::Var;

// One (token, fixation duration) observation from an eye-tracking corpus.
// Tokens with the same (dataset_id, sentence_id) form a sentence in file
// order.
struct FixationRecord {
  std::string dataset_id;
  std::string sentence_id;
  std::string token;
  double fixation_ms = 0.0;
};

// `dataset_id \t sentence_id \t token \t fixation_ms`, with header line.
std::vector<FixationRecord> load_gaze_corpus(const std::string& path);

// `token v1 v2 ... v_dim` per line.
std::unordered_map<std::string, std::vector<double>> load_word_vectors(const std::string& path, int dim);

struct GazeSentence {
  std::string dataset_id;
  std::string sentence_id;
  std::vector<std::string> words;
  std::vector<double> word_labels;  // standardized to [0, 1]
};

// Min-max scales fixation durations to [0, 1] independently per dataset
// before merging; a dataset with constant durations maps to all zeros.
std::vector<GazeSentence> standardize_fixations(const std::vector<FixationRecord>& records);

struct GazeExample {
  tok::TokenSequence tokens;
  std::vector<double> targets;  // per token; exactly 0 at special positions

  void validate() const;
};

// Every subword inherits its source word's label; specials get 0.
std::vector<double> align_subword_labels(const std::vector<double>& word_labels, const tok::TokenSequence& tokens);

GazeExample make_gaze_example(const GazeSentence& sentence, const tok::Vocabulary& vocab, int pad_len);
std::vector<GazeExample> make_gaze_examples(const std::vector<GazeSentence>& sentences, const tok::Vocabulary& vocab,
                                            int pad_len);

struct GazeConfig {
  int vocab_size = 0;
  int embed_dim = 300;   // pretrained word-vector width
  int lstm_hidden = 128; // per direction; transformer width is 2x this
  int layers = 4;
  int heads = 4;
  int d_ff = 512;
  int pad_len = 10;      // training frame length

  int d_model() const { return 2 * lstm_hidden; }
  void validate() const;
};

struct LstmParams {
  Parameter wx;  // input x 4H (gate order: input, forget, cell, output)
  Parameter wh;  // H x 4H
  Parameter b;   // 4H

  LstmParams(const std::string& prefix, int input_dim, int hidden);
  void init(Rng& rng);
  void collect(std::vector<Parameter*>& out);
};

// Embedding -> single BiLSTM layer -> transformer encoder stack -> affine
// head with sigmoid, one fixation score per input token.
class GazeModel {
 public:
  GazeModel(const GazeConfig& config, std::uint64_t seed);

  const GazeConfig& config() const { return cfg_; }

  // Replaces embedding rows for tokens present in the table; all other rows
  // (subword pieces, specials, out-of-table words) keep their seeded
  // uniform(-0.05, 0.05) initialization and stay trainable.
  void load_word_vectors(const std::unordered_map<std::string, std::vector<double>>& table,
                         const tok::Vocabulary& vocab);

  GazeScores predict(const tok::TokenSequence& tokens) const;
  Var forward(ParamMap& pm, const tok::TokenSequence& tokens) const;

  std::vector<Parameter*> parameters();

 private:
  GazeConfig cfg_;                // declared first: validated before tensors allocate
  enc::EncoderConfig layer_cfg_;

 public:
  Parameter embedding;
  LstmParams lstm_fwd;
  LstmParams lstm_bwd;
  std::vector<enc::EncoderLayerParams> transformer;
  Parameter head_w;  // d_model x 1
  Parameter head_b;  // 1
};

struct TrainGazeOptions {
  int epochs = 100;
  double lr = 1e-4;
  int batch_size = 8;
  double target_mse = 0.0;  // > 0: stop after the first epoch whose training MSE falls below
  std::uint64_t shuffle_seed = 7;
};

struct TrainGazeResult {
  double final_mse = 0.0;  // clean full-pass MSE under the trained parameters
  std::vector<double> epoch_mse;
  int epochs_run = 0;
};

// Minimizes mean squared error between predictions and targets over every
// position (PAD positions included, target 0). Throws NumericalError with
// the failing step index if the loss goes non-finite.
TrainGazeResult train_gaze(GazeModel& model, const std::vector<GazeExample>& examples, const TrainGazeOptions& opt);

double evaluate_mse(const GazeModel& model, const std::vector<GazeExample>& examples);

struct CrossValidationResult {
  double mean_mse = 0.0;
  double std_mse = 0.0;  // sample standard deviation across folds
  std::vector<double> fold_mse;
};

// Sentence-level k-fold split (seeded shuffle, contiguous chunks); each fold
// trains a fresh model on the other k-1 folds and is evaluated held-out.
CrossValidationResult cross_validate_gaze(const GazeConfig& cfg, const std::vector<GazeExample>& examples, int k,
                                          const TrainGazeOptions& opt, std::uint64_t model_seed);

}  // namespace gazby::gaze
