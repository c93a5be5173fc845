#include "gazby/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <thread>
#include <unordered_map>

#include "gazby/checkpoint.hpp"
#include "gazby/errors.hpp"
#include "gazby/formats.hpp"
#include "gazby/gradcheck.hpp"
#include "gazby/synthetic.hpp"

namespace gazby::harness {

namespace {

std::shared_ptr<const tok::Vocabulary> load_vocab(const RunConfig& cfg) {
  cfg.require_files({"vocab"});
  return std::make_shared<tok::Vocabulary>(tok::Vocabulary::load(cfg.get_string("vocab")));
}

}  // namespace

gaze::GazeConfig gaze_config_from(const RunConfig& cfg, int vocab_size) {
  gaze::GazeConfig g;
  g.vocab_size = vocab_size;
  g.embed_dim = static_cast<int>(cfg.get_int("gaze_embed_dim", 300));
  g.lstm_hidden = static_cast<int>(cfg.get_int("gaze_lstm_hidden", 128));
  g.layers = static_cast<int>(cfg.get_int("gaze_layers", 4));
  g.heads = static_cast<int>(cfg.get_int("gaze_heads", 4));
  g.d_ff = static_cast<int>(cfg.get_int("gaze_d_ff", 512));
  g.pad_len = static_cast<int>(cfg.get_int("gaze_pad_len", 10));
  g.validate();
  return g;
}

enc::EncoderConfig encoder_config_from(const RunConfig& cfg, int vocab_size) {
  enc::EncoderConfig e;
  e.vocab_size = vocab_size;
  e.layers = static_cast<int>(cfg.get_int("enc_layers", 4));
  e.heads = static_cast<int>(cfg.get_int("enc_heads", 4));
  e.d_model = static_cast<int>(cfg.get_int("enc_d_model", 64));
  e.d_ff = static_cast<int>(cfg.get_int("enc_d_ff", 128));
  e.max_len = static_cast<int>(cfg.get_int("max_len", 128));
  e.attn_dropout = cfg.get_double("attn_dropout", 0.0);
  e.validate();
  return e;
}

rank::BiEncoderConfig bi_config_from(const RunConfig& cfg, int vocab_size) {
  rank::BiEncoderConfig b;
  b.encoder = encoder_config_from(cfg, vocab_size);
  b.d_out = static_cast<int>(cfg.get_int("d_out", 32));
  b.max_query_len = static_cast<int>(cfg.get_int("m_q", 32));
  b.max_doc_len = static_cast<int>(cfg.get_int("m_d", 180));
  b.share_towers = cfg.get_bool("share_towers", true);
  b.mask_gaze_weight = cfg.get_double("mask_gaze_weight", 1.0);
  b.validate();
  return b;
}

std::map<std::string, std::string> gaze_config_echo(const gaze::GazeConfig& cfg) {
  return {
      {"gaze_embed_dim", std::to_string(cfg.embed_dim)}, {"gaze_lstm_hidden", std::to_string(cfg.lstm_hidden)},
      {"gaze_layers", std::to_string(cfg.layers)},       {"gaze_heads", std::to_string(cfg.heads)},
      {"gaze_d_ff", std::to_string(cfg.d_ff)},           {"gaze_pad_len", std::to_string(cfg.pad_len)},
      {"vocab_size", std::to_string(cfg.vocab_size)},
  };
}

std::map<std::string, std::string> encoder_config_echo(const enc::EncoderConfig& cfg) {
  return {
      {"enc_layers", std::to_string(cfg.layers)}, {"enc_heads", std::to_string(cfg.heads)},
      {"enc_d_model", std::to_string(cfg.d_model)}, {"enc_d_ff", std::to_string(cfg.d_ff)},
      {"max_len", std::to_string(cfg.max_len)}, {"vocab_size", std::to_string(cfg.vocab_size)},
  };
}

namespace {

std::map<std::string, std::string> merge(std::map<std::string, std::string> a,
                                         const std::map<std::string, std::string>& b) {
  for (const auto& [k, v] : b) a[k] = v;
  return a;
}

}  // namespace

std::map<std::string, std::string> cross_config_echo(const rank::CrossEncoderModel& model) {
  return merge(encoder_config_echo(model.encoder.cfg), gaze_config_echo(model.gaze_model.config()));
}

std::map<std::string, std::string> bi_config_echo(const rank::BiEncoderModel& model) {
  auto echo = merge(encoder_config_echo(model.cfg.encoder), gaze_config_echo(model.gaze_model.config()));
  echo["d_out"] = std::to_string(model.cfg.d_out);
  echo["m_q"] = std::to_string(model.cfg.max_query_len);
  echo["m_d"] = std::to_string(model.cfg.max_doc_len);
  echo["share_towers"] = model.cfg.share_towers ? "true" : "false";
  echo["mask_gaze_weight"] = std::to_string(model.cfg.mask_gaze_weight);
  return echo;
}

void save_gaze_checkpoint(gaze::GazeModel& model, const std::string& path) {
  save_checkpoint(path, "gaze", gaze_config_echo(model.config()), model.parameters());
}

void load_gaze_checkpoint(gaze::GazeModel& model, const std::string& path) {
  load_checkpoint(path, "gaze", gaze_config_echo(model.config()), model.parameters());
}

void save_ranker_checkpoint(rank::CrossEncoderModel& model, const std::string& path) {
  save_checkpoint(path, "cross", cross_config_echo(model), model.parameters());
}

void save_ranker_checkpoint(rank::BiEncoderModel& model, const std::string& path) {
  save_checkpoint(path, "bi", bi_config_echo(model), model.parameters());
}

void load_ranker_checkpoint(rank::CrossEncoderModel& model, const std::string& path) {
  load_checkpoint(path, "cross", cross_config_echo(model), model.parameters());
}

void load_ranker_checkpoint(rank::BiEncoderModel& model, const std::string& path) {
  load_checkpoint(path, "bi", bi_config_echo(model), model.parameters());
}

// --- train-gaze -----------------------------------------------------------------

TrainGazeOutcome run_train_gaze(const RunConfig& cfg) {
  auto vocab = load_vocab(cfg);
  cfg.require_files({"gaze_corpus"});
  const auto records = gaze::load_gaze_corpus(cfg.get_string("gaze_corpus"));
  const auto sentences = gaze::standardize_fixations(records);
  const gaze::GazeConfig gaze_cfg = gaze_config_from(cfg, vocab->size());
  const auto examples = gaze::make_gaze_examples(sentences, *vocab, gaze_cfg.pad_len);

  gaze::GazeModel model(gaze_cfg, cfg.seed());
  if (cfg.has("word_vectors")) {
    cfg.require_files({"word_vectors"});
    model.load_word_vectors(gaze::load_word_vectors(cfg.get_string("word_vectors"), gaze_cfg.embed_dim), *vocab);
  }

  gaze::TrainGazeOptions opt;
  opt.epochs = static_cast<int>(cfg.get_int("epochs", 100));
  opt.lr = cfg.get_double("lr", 1e-4);
  opt.batch_size = static_cast<int>(cfg.get_int("batch_size", 8));
  opt.target_mse = cfg.get_double("target_mse", 0.0);
  opt.shuffle_seed = cfg.seed() + 1;

  const auto result = gaze::train_gaze(model, examples, opt);

  TrainGazeOutcome outcome;
  outcome.final_mse = result.final_mse;
  outcome.epochs_run = result.epochs_run;
  if (cfg.has("out_checkpoint")) {
    outcome.checkpoint_path = cfg.get_string("out_checkpoint");
    save_gaze_checkpoint(model, outcome.checkpoint_path);
  }
  const int cv_folds = static_cast<int>(cfg.get_int("cv", 0));
  if (cv_folds > 0) {
    const auto cv = gaze::cross_validate_gaze(gaze_cfg, examples, cv_folds, opt, cfg.seed() + 100);
    outcome.ran_cv = true;
    outcome.cv_mean = cv.mean_mse;
    outcome.cv_std = cv.std_mse;
  }
  return outcome;
}

// --- train-ranker ----------------------------------------------------------------

namespace {

rank::TrainRankerOptions ranker_options_from(const RunConfig& cfg) {
  rank::TrainRankerOptions opt;
  opt.epochs = static_cast<int>(cfg.get_int("epochs", 3));
  opt.batch_size = static_cast<int>(cfg.get_int("batch_size", 8));
  opt.lr = cfg.get_double("lr", 3e-6);
  opt.adam_eps = cfg.get_double("adam_eps", 1e-6);
  opt.clip_norm = cfg.get_double("clip_norm", 1.0);
  opt.freeze_gaze = cfg.get_bool("freeze_gaze", false);
  opt.max_steps = cfg.get_int("max_steps", -1);
  opt.shuffle_seed = cfg.seed() + 2;
  return opt;
}

}  // namespace

TrainRankerOutcome run_train_ranker(const RunConfig& cfg) {
  auto vocab = load_vocab(cfg);
  cfg.require_files({"triples"});
  const auto triples = load_triples(cfg.get_string("triples"));
  const std::string kind = cfg.get_string("ranker", "cross");
  const gaze::GazeConfig gaze_cfg = gaze_config_from(cfg, vocab->size());
  rank::TrainRankerOptions opt = ranker_options_from(cfg);

  TrainRankerOutcome outcome;
  rank::TrainRankerResult result;
  if (kind == "cross") {
    rank::CrossEncoderModel model(encoder_config_from(cfg, vocab->size()), gaze_cfg, vocab, cfg.seed());
    if (cfg.has("gaze_checkpoint")) {
      cfg.require_files({"gaze_checkpoint"});
      load_gaze_checkpoint(model.gaze_model, cfg.get_string("gaze_checkpoint"));
    }
    opt.cross_mode = rank::parse_cross_mode(cfg.get_string("mode", "last_layer"));
    result = rank::train_ranker(model, triples, opt);
    if (cfg.has("out_checkpoint")) {
      outcome.checkpoint_path = cfg.get_string("out_checkpoint");
      save_ranker_checkpoint(model, outcome.checkpoint_path);
    }
  } else if (kind == "bi") {
    rank::BiEncoderModel model(bi_config_from(cfg, vocab->size()), gaze_cfg, vocab, cfg.seed());
    if (cfg.has("gaze_checkpoint")) {
      cfg.require_files({"gaze_checkpoint"});
      load_gaze_checkpoint(model.gaze_model, cfg.get_string("gaze_checkpoint"));
    }
    opt.bi_mode = rank::parse_bi_mode(cfg.get_string("mode", "maxsim"));
    result = rank::train_ranker(model, triples, opt);
    if (cfg.has("out_checkpoint")) {
      outcome.checkpoint_path = cfg.get_string("out_checkpoint");
      save_ranker_checkpoint(model, outcome.checkpoint_path);
    }
  } else {
    throw ValidationError("ranker must be 'cross' or 'bi', got '" + kind + "'");
  }
  outcome.steps = result.steps;
  if (!result.loss_curve.empty()) {
    outcome.first_loss = result.loss_curve.front();
    outcome.last_loss = result.loss_curve.back();
  }
  return outcome;
}

// --- rerank -----------------------------------------------------------------------

namespace {

struct CandidateGroups {
  std::vector<std::string> qids;  // in first-appearance order
  std::unordered_map<std::string, std::vector<std::string>> docs_per_query;
};

CandidateGroups group_candidates(const std::vector<CandidateRecord>& candidates) {
  CandidateGroups g;
  for (const auto& c : candidates) {
    auto [it, inserted] = g.docs_per_query.emplace(c.qid, std::vector<std::string>{});
    if (inserted) g.qids.push_back(c.qid);
    it->second.push_back(c.docid);
  }
  return g;
}

// Deterministic parallel map over an index range: worker w handles indices
// congruent to w, results land by index.
void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const int workers = std::min(threads, n);
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

RerankOutcome run_rerank(const RunConfig& cfg) {
  auto vocab = load_vocab(cfg);
  cfg.require_files({"queries", "collection", "candidates", "ranker_checkpoint"});
  const auto queries = load_queries(cfg.get_string("queries"));
  const auto collection = load_collection(cfg.get_string("collection"));
  const auto groups = group_candidates(load_candidates(cfg.get_string("candidates")));
  const std::string ckpt_path = cfg.get_string("ranker_checkpoint");
  const CheckpointHeader header = read_checkpoint_header(ckpt_path);

  std::unordered_map<std::string, std::string> query_text, doc_text;
  for (const auto& q : queries) query_text[q.qid] = q.text;
  for (const auto& d : collection) doc_text[d.docid] = d.text;
  for (const auto& qid : groups.qids) {
    if (!query_text.count(qid)) throw ValidationError("candidates reference unknown query id " + qid);
    for (const auto& docid : groups.docs_per_query.at(qid)) {
      if (!doc_text.count(docid)) throw ValidationError("candidates reference unknown doc id " + docid);
    }
  }

  // model shape comes from the checkpoint's config echo
  RunConfig model_cfg;
  for (const auto& [k, v] : header.config) model_cfg.set(k, v);
  if (static_cast<int>(model_cfg.get_int("vocab_size", -1)) != vocab->size()) {
    throw ValidationError("checkpoint was built over a different vocabulary size");
  }
  const gaze::GazeConfig gaze_cfg = gaze_config_from(model_cfg, vocab->size());
  const int threads = static_cast<int>(cfg.get_int("threads", 1));

  eval::RankedRun run;
  int pairs = 0;

  if (header.kind == "cross") {
    rank::CrossEncoderModel model(encoder_config_from(model_cfg, vocab->size()), gaze_cfg, vocab, 0);
    load_ranker_checkpoint(model, ckpt_path);
    const rank::CrossMode mode = rank::parse_cross_mode(cfg.get_string("mode", "last_layer"));
    for (const auto& qid : groups.qids) {
      const auto& docs = groups.docs_per_query.at(qid);
      std::vector<std::pair<std::string, double>> scored(docs.size());
      parallel_for(static_cast<int>(docs.size()), threads, [&](int i) {
        const std::string& docid = docs[static_cast<std::size_t>(i)];
        scored[static_cast<std::size_t>(i)] = {docid,
                                               rank::score_cross(model, query_text.at(qid), doc_text.at(docid), mode)};
      });
      pairs += static_cast<int>(scored.size());
      run.per_query[qid] = eval::rank_candidates(scored);
    }
  } else if (header.kind == "bi") {
    rank::BiEncoderModel model(bi_config_from(model_cfg, vocab->size()), gaze_cfg, vocab, 0);
    if (cfg.has("collection")) {
      // Tfidf scoring needs document frequencies over the target collection
      model.idf = build_idf_table(collection, *vocab);
    }
    load_ranker_checkpoint(model, ckpt_path);
    const rank::BiMode mode = rank::parse_bi_mode(cfg.get_string("mode", "maxsim"));

    // encode every distinct candidate document once
    std::vector<std::string> distinct_docs;
    {
      std::set<std::string> seen;
      for (const auto& qid : groups.qids) {
        for (const auto& docid : groups.docs_per_query.at(qid)) {
          if (seen.insert(docid).second) distinct_docs.push_back(docid);
        }
      }
    }
    std::vector<rank::EncodedPassage> encoded_docs(distinct_docs.size());
    parallel_for(static_cast<int>(distinct_docs.size()), threads, [&](int i) {
      encoded_docs[static_cast<std::size_t>(i)] =
          rank::encode_document(model, doc_text.at(distinct_docs[static_cast<std::size_t>(i)]), mode);
    });
    std::unordered_map<std::string, const rank::EncodedPassage*> doc_cache;
    for (std::size_t i = 0; i < distinct_docs.size(); ++i) doc_cache[distinct_docs[i]] = &encoded_docs[i];

    for (const auto& qid : groups.qids) {
      const rank::EncodedPassage q = rank::encode_query(model, query_text.at(qid), mode);
      const auto& docs = groups.docs_per_query.at(qid);
      std::vector<std::pair<std::string, double>> scored(docs.size());
      parallel_for(static_cast<int>(docs.size()), threads, [&](int i) {
        const std::string& docid = docs[static_cast<std::size_t>(i)];
        scored[static_cast<std::size_t>(i)] = {docid, rank::score_pair(q, *doc_cache.at(docid))};
      });
      pairs += static_cast<int>(scored.size());
      run.per_query[qid] = eval::rank_candidates(scored);
    }
  } else {
    throw ValidationError("checkpoint kind '" + header.kind + "' is not a ranker");
  }

  RerankOutcome outcome;
  outcome.run_path = cfg.get_string("run_output", "run.txt");
  outcome.queries = static_cast<int>(groups.qids.size());
  outcome.pairs_scored = pairs;
  write_run_file(run, cfg.get_string("run_tag", "gazby"), outcome.run_path);
  return outcome;
}

// --- evaluate ----------------------------------------------------------------------

EvaluateOutcome run_evaluate(const RunConfig& cfg) {
  cfg.require_files({"run", "qrels"});
  const eval::RankedRun run = parse_run_file(cfg.get_string("run"));
  const eval::Qrels qrels = load_qrels_file(cfg.get_string("qrels"));
  EvaluateOutcome out;
  out.k = static_cast<int>(cfg.get_int("k", 10));
  out.gain = eval::parse_gain(cfg.get_string("gain", "exp"));
  out.precision = eval::precision_at_k(run, qrels, out.k);
  out.ndcg = eval::ndcg_at_k(run, qrels, out.k, out.gain);
  out.map = eval::mean_average_precision(run, qrels);
  out.rr = eval::mean_reciprocal_rank(run, qrels);
  return out;
}

// --- gradcheck ---------------------------------------------------------------------

GradcheckOutcome run_gradcheck(const RunConfig& cfg) {
  const std::uint64_t seed = cfg.seed();
  GradcheckOutcome out;
  out.tolerance = cfg.get_double("tolerance", 1e-4);

  auto vocab = std::make_shared<tok::Vocabulary>(tok::Vocabulary::from_tokens(
      {"[CLS]", "[SEP]", "[PAD]", "[MASK]", "[Q]", "[D]", "[UNK]", "alpha", "beta", "gamma", "delta", "epsilon"}));

  // gaze model end-to-end (MSE through BiLSTM + transformer + head)
  {
    gaze::GazeConfig gcfg;
    gcfg.vocab_size = vocab->size();
    gcfg.embed_dim = 8;
    gcfg.lstm_hidden = 8;
    gcfg.layers = 1;
    gcfg.heads = 2;
    gcfg.d_ff = 16;
    gcfg.pad_len = 6;
    gaze::GazeModel model(gcfg, seed);
    tok::WordPieces pieces = tok::wordpiece_tokenize_aligned("alpha beta gamma", *vocab);
    tok::TokenSequence tokens = tok::frame_gaze(pieces, gcfg.pad_len, *vocab);
    std::vector<double> targets = gaze::align_subword_labels({0.2, 0.9, 0.4}, tokens);
    auto params = model.parameters();
    const double err = nn::finite_difference_check(params, [&](nn::Tape& tape) {
      nn::ParamMap pm = nn::ParamMap::trainable(tape);
      nn::Var pred = model.forward(pm, tokens);
      nn::Var diff = tape.sub(pred, tape.constant(nn::Tensor({tokens.size()}, targets)));
      return tape.mean_all(tape.mul(diff, diff));
    });
    out.checks.emplace_back("gaze_model_mse", err);
  }

  // one gaze-modulated attention layer w.r.t. projections and gaze
  {
    enc::EncoderConfig ecfg;
    ecfg.layers = 1;
    ecfg.heads = 2;
    ecfg.d_model = 8;
    ecfg.d_ff = 16;
    ecfg.max_len = 8;
    ecfg.vocab_size = vocab->size();
    Rng rng(seed);
    enc::EncoderLayerParams layer("layer", ecfg, rng);
    const int n = 5;
    nn::Tensor embeddings({n, ecfg.d_model});
    nn::init_uniform(embeddings, -1.0, 1.0, rng);
    nn::Parameter gaze_param("gaze_input", nn::Tensor({n}, {0.3, 0.9, 0.5, 0.7, 0.2}));
    std::vector<nn::Parameter*> params{&layer.wq, &layer.wk, &layer.wv, &gaze_param};
    const std::vector<std::uint8_t> keep(n, 1);
    const double err = nn::finite_difference_check(params, [&](nn::Tape& tape) {
      nn::ParamMap pm = nn::ParamMap::trainable(tape);
      nn::Var g = tape.expand_cols(pm(gaze_param), ecfg.head_dim());
      nn::Var outv = enc::attention_layer(pm, tape.constant_ref(embeddings), layer, ecfg, keep, g);
      return tape.sum_all(outv);
    });
    out.checks.emplace_back("gaze_attention_layer", err);
  }

  // weighted MaxSim w.r.t. gaze weights and both embedding sets
  {
    Rng rng(seed + 3);
    nn::Tensor eq({3, 4}), ed({5, 4});
    nn::init_uniform(eq, -1.0, 1.0, rng);
    nn::init_uniform(ed, -1.0, 1.0, rng);
    nn::Parameter peq("query_embeddings", eq), ped("doc_embeddings", ed);
    nn::Parameter pgq("gq", nn::Tensor({3}, {0.4, 0.8, 0.6}));
    nn::Parameter pgd("gd", nn::Tensor({5}, {0.9, 0.3, 0.7, 0.5, 1.0}));
    std::vector<nn::Parameter*> params{&peq, &ped, &pgq, &pgd};
    const double err = nn::finite_difference_check(params, [&](nn::Tape& tape) {
      nn::ParamMap pm = nn::ParamMap::trainable(tape);
      nn::Var q = tape.l2_normalize_rows(pm(peq));
      nn::Var d = tape.l2_normalize_rows(pm(ped));
      return rank::weighted_maxsim(tape, q, d, pm(pgq), pm(pgd));
    });
    out.checks.emplace_back("gaze_maxsim", err);
  }

  // both losses
  {
    nn::Parameter ps("scores", nn::Tensor({2}, {0.62, 0.31}));
    std::vector<nn::Parameter*> params{&ps};
    const double err = nn::finite_difference_check(params, [&](nn::Tape& tape) {
      nn::ParamMap pm = nn::ParamMap::trainable(tape);
      nn::Var s = pm(ps);
      return rank::pointwise_bce_loss(tape, {{tape.pick(s, 0), true}, {tape.pick(s, 1), false}});
    });
    out.checks.emplace_back("pointwise_bce_loss", err);
  }
  {
    nn::Parameter ps("raw_scores", nn::Tensor({2}, {1.3, -0.4}));
    std::vector<nn::Parameter*> params{&ps};
    const double err = nn::finite_difference_check(params, [&](nn::Tape& tape) {
      nn::ParamMap pm = nn::ParamMap::trainable(tape);
      nn::Var s = pm(ps);
      return rank::pairwise_ce_loss(tape, tape.pick(s, 0), tape.pick(s, 1));
    });
    out.checks.emplace_back("pairwise_ce_loss", err);
  }

  out.worst = 0.0;
  for (const auto& [_, err] : out.checks) out.worst = std::max(out.worst, err);
  out.passed = out.worst < out.tolerance;
  if (!out.passed) {
    throw NumericalError("gradient check failed: max relative error " + std::to_string(out.worst) +
                         " exceeds tolerance " + std::to_string(out.tolerance));
  }
  return out;
}

// --- synth-data --------------------------------------------------------------------

std::string run_synth_data(const RunConfig& cfg) {
  SynthSpec spec;
  spec.seed = cfg.seed();
  spec.num_docs = static_cast<int>(cfg.get_int("docs", spec.num_docs));
  spec.num_eval_queries = static_cast<int>(cfg.get_int("eval_queries", spec.num_eval_queries));
  spec.num_train_queries = static_cast<int>(cfg.get_int("train_queries", spec.num_train_queries));
  spec.candidates_per_query = static_cast<int>(cfg.get_int("candidates_per_query", spec.candidates_per_query));
  spec.triples_per_query = static_cast<int>(cfg.get_int("triples_per_query", spec.triples_per_query));
  spec.num_gaze_sentences = static_cast<int>(cfg.get_int("gaze_sentences", spec.num_gaze_sentences));
  const std::string dir = cfg.get_string("out_dir", "synth");
  write_synthetic_data(make_synthetic_data(spec), dir);
  return dir;
}

}  // namespace gazby::harness
