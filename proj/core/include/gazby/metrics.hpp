#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace gazby::eval {

// Graded relevance judgments on the four-point TREC DL scale.
class Qrels {
 public:
  // throws on grade outside [0, 3] or duplicate (qid, docid)
  void add(const std::string& qid, const std::string& docid, int grade);

  const std::map<std::string, std::map<std::string, int>>& entries() const { return entries_; }
  bool has_query(const std::string& qid) const { return entries_.count(qid) > 0; }
  int grade(const std::string& qid, const std::string& docid) const;  // 0 when unjudged
  std::size_t size() const;

 private:
  std::map<std::string, std::map<std::string, int>> entries_;  // ordered for determinism
};

// Relevant docs per judged query; queries with no relevant docs keep an empty
// set so they still enter the metric means.
using BinaryRelevance = std::map<std::string, std::set<std::string>>;

// Grades 2 and 3 map to relevant, 0 and 1 to irrelevant.
BinaryRelevance binarize_qrels(const Qrels& qrels);

struct RunEntry {
  std::string docid;
  double score = 0.0;
  int rank = 0;  // 1-based, consecutive
};

struct RankedRun {
  std::map<std::string, std::vector<RunEntry>> per_query;

  void validate() const;  // ranks consecutive from 1, scores non-increasing, docids unique
};

// Deterministic ranking of one query's scored candidates: score descending,
// ties broken by docid ascending. Throws on duplicate docid or non-finite
// score.
std::vector<RunEntry> rank_candidates(const std::vector<std::pair<std::string, double>>& scores);

enum class Gain { Exp, Linear };

Gain parse_gain(const std::string& name);

struct MetricReport {
  std::map<std::string, double> per_query;
  double mean = 0.0;
};

// All metrics evaluate the union of qrels queries and run queries: judged
// queries missing from the run score 0, run queries without judgments count
// zero relevant. The binary metrics accept graded qrels (binarized per the
// 2-3 -> relevant rule) or an already-binarized map.
MetricReport precision_at_k(const RankedRun& run, const Qrels& qrels, int k = 10);
MetricReport precision_at_k(const RankedRun& run, const BinaryRelevance& rel, int k = 10);

// DCG@k = sum gain(rel_i)/log2(i+1) with gain 2^rel - 1 (Exp, default) or rel
// (Linear); the ideal DCG uses the same gain over the qrels' own ordering.
// Queries with no relevant documents score 0.
MetricReport ndcg_at_k(const RankedRun& run, const Qrels& qrels, int k = 10, Gain gain = Gain::Exp);

MetricReport mean_average_precision(const RankedRun& run, const Qrels& qrels);
MetricReport mean_average_precision(const RankedRun& run, const BinaryRelevance& rel);

MetricReport mean_reciprocal_rank(const RankedRun& run, const Qrels& qrels);
MetricReport mean_reciprocal_rank(const RankedRun& run, const BinaryRelevance& rel);

}  // namespace gazby::eval
