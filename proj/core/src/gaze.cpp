#include "gazby/gaze.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "gazby/errors.hpp"
#include "gazby/optim.hpp"

namespace gazby::gaze {

std::vector<FixationRecord> load_gaze_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open gaze corpus: " + path);
  std::vector<FixationRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) continue;  // header
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != 4) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected 4 tab-separated fields, got " +
                            std::to_string(fields.size()));
    }
    FixationRecord r;
    r.dataset_id = fields[0];
    r.sentence_id = fields[1];
    r.token = fields[2];
    try {
      r.fixation_ms = std::stod(fields[3]);
    } catch (const std::exception&) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": fixation_ms is not a number: " + fields[3]);
    }
    if (r.fixation_ms < 0.0) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": negative fixation duration");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::unordered_map<std::string, std::vector<double>> load_word_vectors(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open word-vector file: " + path);
  std::unordered_map<std::string, std::vector<double>> table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string token;
    is >> token;
    std::vector<double> vec;
    vec.reserve(static_cast<std::size_t>(dim));
    double v;
    while (is >> v) vec.push_back(v);
    if (static_cast<int>(vec.size()) != dim) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                            " vector components, got " + std::to_string(vec.size()));
    }
    table[token] = std::move(vec);
  }
  return table;
}

std::vector<GazeSentence> standardize_fixations(const std::vector<FixationRecord>& records) {
  if (records.empty()) throw ValidationError("standardize_fixations: empty corpus");

  // per-dataset min/max over all durations
  std::unordered_map<std::string, std::pair<double, double>> range;
  for (const auto& r : records) {
    auto [it, inserted] = range.emplace(r.dataset_id, std::make_pair(r.fixation_ms, r.fixation_ms));
    if (!inserted) {
      it->second.first = std::min(it->second.first, r.fixation_ms);
      it->second.second = std::max(it->second.second, r.fixation_ms);
    }
  }

  std::vector<GazeSentence> sentences;
  std::unordered_map<std::string, std::size_t> index;  // (dataset, sentence) -> slot
  for (const auto& r : records) {
    const std::string key = r.dataset_id + "\x1f" + r.sentence_id;
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, sentences.size());
      sentences.push_back(GazeSentence{r.dataset_id, r.sentence_id, {}, {}});
      it = index.find(key);
    }
    const auto [lo, hi] = range.at(r.dataset_id);
    const double span = hi - lo;
    const double label = span > 0.0 ? (r.fixation_ms - lo) / span : 0.0;
    GazeSentence& s = sentences[it->second];
    s.words.push_back(r.token);
    s.word_labels.push_back(label);
  }
  return sentences;
}

void GazeExample::validate() const {
  tokens.validate();
  if (static_cast<int>(targets.size()) != tokens.size()) {
    throw ValidationError("gaze example targets length does not match token count");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0.0 || targets[i] > 1.0) {
      throw ValidationError("gaze target outside [0, 1] at position " + std::to_string(i));
    }
    const bool content = tokens.kinds[i] == tok::TokenKind::Regular || tokens.kinds[i] == tok::TokenKind::Unk;
    if (!content && targets[i] != 0.0) {
      throw ValidationError("special token carries a nonzero gaze target at position " + std::to_string(i));
    }
  }
}

std::vector<double> align_subword_labels(const std::vector<double>& word_labels, const tok::TokenSequence& tokens) {
  std::vector<double> targets(static_cast<std::size_t>(tokens.size()), 0.0);
  for (int i = 0; i < tokens.size(); ++i) {
    const int w = tokens.word_index[static_cast<std::size_t>(i)];
    if (w < 0) continue;
    if (w >= static_cast<int>(word_labels.size())) {
      throw ValidationError("word_index " + std::to_string(w) + " out of range for " +
                            std::to_string(word_labels.size()) + " word labels");
    }
    targets[static_cast<std::size_t>(i)] = word_labels[static_cast<std::size_t>(w)];
  }
  return targets;
}

GazeExample make_gaze_example(const GazeSentence& sentence, const tok::Vocabulary& vocab, int pad_len) {
  tok::WordPieces pieces = tok::tokenize_words(sentence.words, vocab);
  GazeExample ex;
  ex.tokens = tok::frame_gaze(pieces, pad_len, vocab);
  ex.targets = align_subword_labels(sentence.word_labels, ex.tokens);
  return ex;
}

std::vector<GazeExample> make_gaze_examples(const std::vector<GazeSentence>& sentences, const tok::Vocabulary& vocab,
                                            int pad_len) {
  std::vector<GazeExample> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(make_gaze_example(s, vocab, pad_len));
  return out;
}

void GazeConfig::validate() const {
  if (vocab_size < 1) throw ValidationError("gaze config vocab_size must be set");
  if (embed_dim < 1 || lstm_hidden < 1 || layers < 1 || heads < 1 || d_ff < 1 || pad_len < 3) {
    throw ValidationError("gaze config extents out of range");
  }
  if (d_model() % heads != 0) {
    throw ValidationError("gaze transformer width " + std::to_string(d_model()) + " not divisible by heads " +
                          std::to_string(heads));
  }
}

LstmParams::LstmParams(const std::string& prefix, int input_dim, int hidden)
    : wx(prefix + ".wx", Tensor({input_dim, 4 * hidden})),
      wh(prefix + ".wh", Tensor({hidden, 4 * hidden})),
      b(prefix + ".b", Tensor({4 * hidden})) {}

void LstmParams::init(Rng& rng) {
  nn::init_uniform_fan_in(wx.value, wx.value.rows(), rng);
  nn::init_uniform_fan_in(wh.value, wh.value.rows(), rng);
}

void LstmParams::collect(std::vector<Parameter*>& out) {
  out.push_back(&wx);
  out.push_back(&wh);
  out.push_back(&b);
}

namespace {

GazeConfig validated(GazeConfig cfg) {
  cfg.validate();
  return cfg;
}

enc::EncoderConfig gaze_layer_config(const GazeConfig& cfg) {
  enc::EncoderConfig lc;
  lc.layers = cfg.layers;
  lc.heads = cfg.heads;
  lc.d_model = cfg.d_model();
  lc.d_ff = cfg.d_ff;
  lc.max_len = 1;      // unused: input arrives from the BiLSTM
  lc.vocab_size = 1;   // unused
  return lc;
}

}  // namespace

GazeModel::GazeModel(const GazeConfig& config, std::uint64_t seed)
    : cfg_(validated(config)),
      layer_cfg_(gaze_layer_config(cfg_)),
      embedding("gaze.embedding", Tensor({cfg_.vocab_size, cfg_.embed_dim})),
      lstm_fwd("gaze.lstm_fwd", cfg_.embed_dim, cfg_.lstm_hidden),
      lstm_bwd("gaze.lstm_bwd", cfg_.embed_dim, cfg_.lstm_hidden),
      head_w("gaze.head_w", Tensor({cfg_.d_model(), 1})),
      head_b("gaze.head_b", Tensor({1})) {
  Rng rng(seed);
  nn::init_uniform(embedding.value, -0.05, 0.05, rng);
  lstm_fwd.init(rng);
  lstm_bwd.init(rng);
  transformer.reserve(static_cast<std::size_t>(cfg_.layers));
  for (int l = 0; l < cfg_.layers; ++l) {
    transformer.emplace_back("gaze.layer" + std::to_string(l), layer_cfg_, rng);
  }
  nn::init_uniform_fan_in(head_w.value, cfg_.d_model(), rng);
}

void GazeModel::load_word_vectors(const std::unordered_map<std::string, std::vector<double>>& table,
                                  const tok::Vocabulary& vocab) {
  if (vocab.size() != cfg_.vocab_size) {
    throw ValidationError("word-vector load: vocabulary size does not match gaze config");
  }
  for (int id = 0; id < vocab.size(); ++id) {
    auto it = table.find(vocab.token(id));
    if (it == table.end()) continue;
    if (static_cast<int>(it->second.size()) != cfg_.embed_dim) {
      throw ValidationError("word vector for '" + vocab.token(id) + "' has wrong width");
    }
    for (int j = 0; j < cfg_.embed_dim; ++j) {
      embedding.value(id, j) = it->second[static_cast<std::size_t>(j)];
    }
  }
  embedding.snap_to_f32();
}

std::vector<Parameter*> GazeModel::parameters() {
  std::vector<Parameter*> out{&embedding};
  lstm_fwd.collect(out);
  lstm_bwd.collect(out);
  for (auto& l : transformer) l.collect(out);
  out.push_back(&head_w);
  out.push_back(&head_b);
  return out;
}

namespace {

// One LSTM step: returns (h', c'); gate order i, f, g, o.
std::pair<Var, Var> lstm_step(Tape& tape, ParamMap& pm, const LstmParams& p, Var x_t, Var h, Var c, int hidden) {
  Var z = tape.add(tape.matmul(x_t, pm(p.wx)), tape.matmul(h, pm(p.wh)));
  z = tape.add_row_broadcast(z, pm(p.b));
  Var gi = tape.sigmoid(tape.slice_cols(z, 0, hidden));
  Var gf = tape.sigmoid(tape.slice_cols(z, hidden, hidden));
  Var gg = tape.tanh(tape.slice_cols(z, 2 * hidden, hidden));
  Var go = tape.sigmoid(tape.slice_cols(z, 3 * hidden, hidden));
  Var c_next = tape.add(tape.mul(gf, c), tape.mul(gi, gg));
  Var h_next = tape.mul(go, tape.tanh(c_next));
  return {h_next, c_next};
}

}  // namespace

Var GazeModel::forward(ParamMap& pm, const tok::TokenSequence& tokens) const {
  Tape& tape = pm.tape();
  const int n = tokens.size();
  if (n == 0) throw ValidationError("gaze forward: empty token sequence");
  for (int id : tokens.ids) {
    if (id < 0 || id >= cfg_.vocab_size) {
      throw ValidationError("gaze forward: token id " + std::to_string(id) + " outside embedding range");
    }
  }
  const int hidden = cfg_.lstm_hidden;
  Var emb = tape.embedding(pm(embedding), tokens.ids);

  std::vector<Var> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) rows.push_back(tape.row(emb, t));

  std::vector<Var> fwd(static_cast<std::size_t>(n));
  {
    Var h = tape.constant(Tensor({1, hidden}));
    Var c = tape.constant(Tensor({1, hidden}));
    for (int t = 0; t < n; ++t) {
      auto [hn, cn] = lstm_step(tape, pm, lstm_fwd, rows[static_cast<std::size_t>(t)], h, c, hidden);
      fwd[static_cast<std::size_t>(t)] = hn;
      h = hn;
      c = cn;
    }
  }
  std::vector<Var> bwd(static_cast<std::size_t>(n));
  {
    Var h = tape.constant(Tensor({1, hidden}));
    Var c = tape.constant(Tensor({1, hidden}));
    for (int t = n - 1; t >= 0; --t) {
      auto [hn, cn] = lstm_step(tape, pm, lstm_bwd, rows[static_cast<std::size_t>(t)], h, c, hidden);
      bwd[static_cast<std::size_t>(t)] = hn;
      h = hn;
      c = cn;
    }
  }

  std::vector<Var> merged;
  merged.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    merged.push_back(tape.concat_cols({fwd[static_cast<std::size_t>(t)], bwd[static_cast<std::size_t>(t)]}));
  }
  Var x = tape.concat_rows(merged);

  const auto keep = tokens.pad_keep_mask();
  for (const auto& layer : transformer) {
    x = enc::attention_layer(pm, x, layer, layer_cfg_, keep, Var{});
  }
  Var scores = tape.add_row_broadcast(tape.matmul(x, pm(head_w)), pm(head_b));
  scores = tape.sigmoid(scores);
  return tape.reshape(scores, {n});
}

GazeScores GazeModel::predict(const tok::TokenSequence& tokens) const {
  Tape tape;
  ParamMap pm = ParamMap::frozen(tape);
  Var out = forward(pm, tokens);
  const Tensor& t = tape.value(out);
  GazeScores g;
  g.values.assign(t.data(), t.data() + t.size());
  return g;
}

double evaluate_mse(const GazeModel& model, const std::vector<GazeExample>& examples) {
  if (examples.empty()) throw ValidationError("evaluate_mse: no examples");
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& ex : examples) {
    GazeScores pred = model.predict(ex.tokens);
    for (std::size_t i = 0; i < ex.targets.size(); ++i) {
      const double d = pred.values[i] - ex.targets[i];
      total += d * d;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

TrainGazeResult train_gaze(GazeModel& model, const std::vector<GazeExample>& examples, const TrainGazeOptions& opt) {
  if (examples.empty()) throw ValidationError("train_gaze: empty example set");
  if (opt.epochs < 0) throw ValidationError("train_gaze: negative epoch count");
  for (const auto& ex : examples) ex.validate();

  TrainGazeResult result;
  if (opt.epochs == 0) return result;

  std::vector<Parameter*> params = model.parameters();
  nn::Adam::Options adam_opt;
  adam_opt.lr = opt.lr;
  nn::Adam adam(params, adam_opt);

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(opt.shuffle_seed);

  long step = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batch_start = 0;
    while (batch_start < order.size()) {
      const std::size_t batch_end = std::min(order.size(), batch_start + static_cast<std::size_t>(opt.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(batch_end - batch_start);
      adam.zero_grad();
      for (std::size_t bi = batch_start; bi < batch_end; ++bi) {
        const GazeExample& ex = examples[order[bi]];
        Tape tape;
        ParamMap pm = ParamMap::trainable(tape);
        Var pred = model.forward(pm, ex.tokens);
        Var diff = tape.sub(pred, tape.constant(Tensor({ex.tokens.size()}, ex.targets)));
        Var loss = tape.mean_all(tape.mul(diff, diff));
        const double loss_value = tape.value(loss)[0];
        if (!std::isfinite(loss_value)) {
          throw NumericalError("train_gaze: non-finite loss at step " + std::to_string(step));
        }
        epoch_loss += loss_value;
        tape.backward(tape.scale(loss, inv_batch));
      }
      adam.step();
      ++step;
      batch_start = batch_end;
    }
    result.epoch_mse.push_back(epoch_loss / static_cast<double>(order.size()));
    result.epochs_run = epoch + 1;
    if (opt.target_mse > 0.0 && result.epoch_mse.back() < opt.target_mse) break;
  }
  result.final_mse = evaluate_mse(model, examples);
  return result;
}

CrossValidationResult cross_validate_gaze(const GazeConfig& cfg, const std::vector<GazeExample>& examples, int k,
                                          const TrainGazeOptions& opt, std::uint64_t model_seed) {
  if (k < 2) throw ValidationError("cross_validate_gaze: k must be at least 2");
  if (static_cast<int>(examples.size()) < k) {
    throw ValidationError("cross_validate_gaze: fewer examples (" + std::to_string(examples.size()) +
                          ") than folds (" + std::to_string(k) + ")");
  }
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(opt.shuffle_seed ^ 0xC7u);
  rng.shuffle(order);

  CrossValidationResult result;
  const std::size_t n = order.size();
  for (int fold = 0; fold < k; ++fold) {
    const std::size_t lo = n * static_cast<std::size_t>(fold) / static_cast<std::size_t>(k);
    const std::size_t hi = n * static_cast<std::size_t>(fold + 1) / static_cast<std::size_t>(k);
    std::vector<GazeExample> train_set, held_out;
    for (std::size_t i = 0; i < n; ++i) {
      (i >= lo && i < hi ? held_out : train_set).push_back(examples[order[i]]);
    }
    GazeModel model(cfg, model_seed + static_cast<std::uint64_t>(fold));
    train_gaze(model, train_set, opt);
    result.fold_mse.push_back(evaluate_mse(model, held_out));
  }
  double mean = 0.0;
  for (double v : result.fold_mse) mean += v;
  mean /= static_cast<double>(k);
  double var = 0.0;
  for (double v : result.fold_mse) var += (v - mean) * (v - mean);
  result.mean_mse = mean;
  result.std_mse = k > 1 ? std::sqrt(var / static_cast<double>(k - 1)) : 0.0;
  return result;
}

}  // namespace gazby::gaze
