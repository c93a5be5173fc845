// gazby command-line interface: gaze-model training, ranker training,
// candidate re-ranking, TREC-style evaluation, gradient verification, and
// synthetic corpus generation.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gazby/errors.hpp"
#include "gazby/pipeline.hpp"

namespace {

using gazby::harness::RunConfig;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key=value configuration file");
  cmd->add_option("--set", args.overrides, "override a config key (key=value, repeatable)");
}

RunConfig make_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = RunConfig::from_file(args.config_path);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw gazby::ValidationError("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.apply_env_seed();
  return cfg;
}

void print_metric(const char* name, const gazby::eval::MetricReport& report, bool per_query) {
  if (per_query) {
    for (const auto& [qid, v] : report.per_query) {
      std::printf("%-10s %-8s %.4f\n", name, qid.c_str(), v);
    }
  }
  std::printf("%-10s all      %.4f\n", name, report.mean);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GazBy: gaze-modulated passage re-ranking"};
  app.require_subcommand(1);

  CommonArgs train_gaze_args, train_ranker_args, rerank_args, evaluate_args, gradcheck_args, synth_args;

  auto* train_gaze = app.add_subcommand("train-gaze", "train the gaze fixation prediction model");
  add_common(train_gaze, train_gaze_args);
  std::string tg_corpus, tg_vocab, tg_out;
  train_gaze->add_option("--corpus", tg_corpus, "gaze corpus TSV");
  train_gaze->add_option("--vocab", tg_vocab, "vocabulary file");
  train_gaze->add_option("--out", tg_out, "output checkpoint path");

  auto* train_ranker = app.add_subcommand("train-ranker", "train a cross- or bi-encoder ranker");
  add_common(train_ranker, train_ranker_args);
  std::string tr_mode, tr_gaze_ckpt, tr_out;
  train_ranker->add_option("--mode", tr_mode, "gaze injection mode");
  train_ranker->add_option("--gaze-checkpoint", tr_gaze_ckpt, "pretrained gaze checkpoint");
  train_ranker->add_option("--out", tr_out, "output checkpoint path");

  auto* rerank = app.add_subcommand("rerank", "score and reorder provided candidate lists");
  add_common(rerank, rerank_args);
  std::string rr_mode, rr_ckpt, rr_out;
  rerank->add_option("--mode", rr_mode, "gaze injection mode");
  rerank->add_option("--ranker-checkpoint", rr_ckpt, "trained ranker checkpoint");
  rerank->add_option("--run-output", rr_out, "output run file");

  auto* evaluate = app.add_subcommand("evaluate", "TREC metrics over a run file and qrels");
  add_common(evaluate, evaluate_args);
  std::string ev_run, ev_qrels, ev_gain;
  int ev_k = 0;
  bool ev_per_query = false;
  evaluate->add_option("--run", ev_run, "run file to score");
  evaluate->add_option("--qrels", ev_qrels, "qrels file");
  evaluate->add_option("--k", ev_k, "metric cutoff (default 10)");
  evaluate->add_option("--gain", ev_gain, "nDCG gain: exp or linear");
  evaluate->add_flag("--per-query", ev_per_query, "print per-query metric values");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference verification of model gradients");
  add_common(gradcheck, gradcheck_args);

  auto* synth = app.add_subcommand("synth-data", "write the bundled synthetic corpora");
  add_common(synth, synth_args);
  std::string sy_dir;
  synth->add_option("--out-dir", sy_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_gaze->parsed()) {
      RunConfig cfg = make_config(train_gaze_args);
      if (!tg_corpus.empty()) cfg.set("gaze_corpus", tg_corpus);
      if (!tg_vocab.empty()) cfg.set("vocab", tg_vocab);
      if (!tg_out.empty()) cfg.set("out_checkpoint", tg_out);
      const auto out = gazby::harness::run_train_gaze(cfg);
      std::printf("train-gaze: final MSE %.6f after %d epochs\n", out.final_mse, out.epochs_run);
      if (out.ran_cv) {
        std::printf("train-gaze: %ld-fold CV MSE %.6f +/- %.6f\n", cfg.get_int("cv", 0), out.cv_mean, out.cv_std);
      }
      if (!out.checkpoint_path.empty()) {
        std::printf("train-gaze: checkpoint written to %s\n", out.checkpoint_path.c_str());
      }
    } else if (train_ranker->parsed()) {
      RunConfig cfg = make_config(train_ranker_args);
      if (!tr_mode.empty()) cfg.set("mode", tr_mode);
      if (!tr_gaze_ckpt.empty()) cfg.set("gaze_checkpoint", tr_gaze_ckpt);
      if (!tr_out.empty()) cfg.set("out_checkpoint", tr_out);
      const auto out = gazby::harness::run_train_ranker(cfg);
      std::printf("train-ranker: %ld steps, loss %.4f -> %.4f\n", out.steps, out.first_loss, out.last_loss);
      if (!out.checkpoint_path.empty()) {
        std::printf("train-ranker: checkpoint written to %s\n", out.checkpoint_path.c_str());
      }
    } else if (rerank->parsed()) {
      RunConfig cfg = make_config(rerank_args);
      if (!rr_mode.empty()) cfg.set("mode", rr_mode);
      if (!rr_ckpt.empty()) cfg.set("ranker_checkpoint", rr_ckpt);
      if (!rr_out.empty()) cfg.set("run_output", rr_out);
      const auto out = gazby::harness::run_rerank(cfg);
      std::printf("rerank: %d queries, %d pairs scored, run written to %s\n", out.queries, out.pairs_scored,
                  out.run_path.c_str());
    } else if (evaluate->parsed()) {
      RunConfig cfg = make_config(evaluate_args);
      if (!ev_run.empty()) cfg.set("run", ev_run);
      if (!ev_qrels.empty()) cfg.set("qrels", ev_qrels);
      if (ev_k > 0) cfg.set("k", std::to_string(ev_k));
      if (!ev_gain.empty()) cfg.set("gain", ev_gain);
      const auto out = gazby::harness::run_evaluate(cfg);
      const std::string p_name = "P@" + std::to_string(out.k);
      const std::string n_name = "nDCG@" + std::to_string(out.k);
      print_metric(p_name.c_str(), out.precision, ev_per_query);
      print_metric(n_name.c_str(), out.ndcg, ev_per_query);
      print_metric("MAP", out.map, ev_per_query);
      print_metric("RR", out.rr, ev_per_query);
    } else if (gradcheck->parsed()) {
      RunConfig cfg = make_config(gradcheck_args);
      const auto out = gazby::harness::run_gradcheck(cfg);
      for (const auto& [name, err] : out.checks) {
        std::printf("gradcheck: %-24s max relative error %.3e\n", name.c_str(), err);
      }
      std::printf("gradcheck: worst %.3e (tolerance %.1e) -> %s\n", out.worst, out.tolerance,
                  out.passed ? "ok" : "FAILED");
    } else if (synth->parsed()) {
      RunConfig cfg = make_config(synth_args);
      if (!sy_dir.empty()) cfg.set("out_dir", sy_dir);
      const std::string dir = gazby::harness::run_synth_data(cfg);
      std::printf("synth-data: corpora written under %s\n", dir.c_str());
    }
  } catch (const gazby::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const gazby::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
