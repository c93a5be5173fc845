#pragma once

#include <map>
#include <string>
#include <vector>

#include "gazby/config.hpp"
#include "gazby/encoder.hpp"
#include "gazby/gaze.hpp"
#include "gazby/metrics.hpp"
#include "gazby/ranker.hpp"

namespace gazby::harness {

// --- config plumbing ---------------------------------------------------------

gaze::GazeConfig gaze_config_from(const RunConfig& cfg, int vocab_size);
enc::EncoderConfig encoder_config_from(const RunConfig& cfg, int vocab_size);
rank::BiEncoderConfig bi_config_from(const RunConfig& cfg, int vocab_size);

std::map<std::string, std::string> gaze_config_echo(const gaze::GazeConfig& cfg);
std::map<std::string, std::string> encoder_config_echo(const enc::EncoderConfig& cfg);
std::map<std::string, std::string> cross_config_echo(const rank::CrossEncoderModel& model);
std::map<std::string, std::string> bi_config_echo(const rank::BiEncoderModel& model);

// --- checkpoint glue ---------------------------------------------------------

void save_gaze_checkpoint(gaze::GazeModel& model, const std::string& path);
void load_gaze_checkpoint(gaze::GazeModel& model, const std::string& path);
void save_ranker_checkpoint(rank::CrossEncoderModel& model, const std::string& path);
void save_ranker_checkpoint(rank::BiEncoderModel& model, const std::string& path);
void load_ranker_checkpoint(rank::CrossEncoderModel& model, const std::string& path);
void load_ranker_checkpoint(rank::BiEncoderModel& model, const std::string& path);

// --- pipelines (one per CLI subcommand) ---------------------------------------

struct TrainGazeOutcome {
  double final_mse = 0.0;
  int epochs_run = 0;
  bool ran_cv = false;
  double cv_mean = 0.0;
  double cv_std = 0.0;
  std::string checkpoint_path;
};
TrainGazeOutcome run_train_gaze(const RunConfig& cfg);

struct TrainRankerOutcome {
  long steps = 0;
  double first_loss = 0.0;
  double last_loss = 0.0;
  std::string checkpoint_path;
};
TrainRankerOutcome run_train_ranker(const RunConfig& cfg);

struct RerankOutcome {
  std::string run_path;
  int queries = 0;
  int pairs_scored = 0;
};
RerankOutcome run_rerank(const RunConfig& cfg);

struct EvaluateOutcome {
  int k = 10;
  eval::Gain gain = eval::Gain::Exp;
  eval::MetricReport precision;
  eval::MetricReport ndcg;
  eval::MetricReport map;
  eval::MetricReport rr;
};
EvaluateOutcome run_evaluate(const RunConfig& cfg);

struct GradcheckOutcome {
  std::vector<std::pair<std::string, double>> checks;  // (name, max relative error)
  double worst = 0.0;
  double tolerance = 1e-4;
  bool passed = false;
};
GradcheckOutcome run_gradcheck(const RunConfig& cfg);

std::string run_synth_data(const RunConfig& cfg);  // returns output directory

}  // namespace gazby::harness
