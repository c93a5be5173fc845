#include "gazby/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "gazby/errors.hpp"

namespace gazby::eval {

void Qrels::add(const std::string& qid, const std::string& docid, int grade) {
  if (grade < 0 || grade > 3) {
    throw ValidationError("qrels grade " + std::to_string(grade) + " outside [0, 3] for (" + qid + ", " + docid + ")");
  }
  auto [_, inserted] = entries_[qid].emplace(docid, grade);
  if (!inserted) {
    throw ValidationError("duplicate qrels entry (" + qid + ", " + docid + ")");
  }
}

int Qrels::grade(const std::string& qid, const std::string& docid) const {
  auto qit = entries_.find(qid);
  if (qit == entries_.end()) return 0;
  auto dit = qit->second.find(docid);
  return dit == qit->second.end() ? 0 : dit->second;
}

std::size_t Qrels::size() const {
  std::size_t n = 0;
  for (const auto& [_, docs] : entries_) n += docs.size();
  return n;
}

BinaryRelevance binarize_qrels(const Qrels& qrels) {
  BinaryRelevance rel;
  for (const auto& [qid, docs] : qrels.entries()) {
    auto& set = rel[qid];  // keep zero-relevant queries present
    for (const auto& [docid, grade] : docs) {
      if (grade >= 2) set.insert(docid);
    }
  }
  return rel;
}

void RankedRun::validate() const {
  for (const auto& [qid, entries] : per_query) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].rank != static_cast<int>(i) + 1) {
        throw ValidationError("run for query " + qid + " has non-consecutive rank at position " + std::to_string(i));
      }
      if (i > 0 && entries[i].score > entries[i - 1].score) {
        throw ValidationError("run for query " + qid + " has increasing score at rank " +
                              std::to_string(entries[i].rank));
      }
      if (!seen.insert(entries[i].docid).second) {
        throw ValidationError("run for query " + qid + " repeats docid " + entries[i].docid);
      }
    }
  }
}

std::vector<RunEntry> rank_candidates(const std::vector<std::pair<std::string, double>>& scores) {
  std::set<std::string> seen;
  for (const auto& [docid, score] : scores) {
    if (!std::isfinite(score)) throw ValidationError("rank_candidates: non-finite score for doc " + docid);
    if (!seen.insert(docid).second) throw ValidationError("rank_candidates: duplicate doc id " + docid);
  }
  std::vector<std::pair<std::string, double>> sorted = scores;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<RunEntry> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.push_back(RunEntry{sorted[i].first, sorted[i].second, static_cast<int>(i) + 1});
  }
  return out;
}

Gain parse_gain(const std::string& name) {
  if (name == "exp") return Gain::Exp;
  if (name == "linear") return Gain::Linear;
  throw ValidationError("unknown gain '" + name + "' (expected exp or linear)");
}

namespace {

const std::vector<RunEntry> kEmptyRun;

// union of judged and retrieved query ids; run-only queries are flagged
std::vector<std::string> evaluation_queries(const RankedRun& run, const std::set<std::string>& judged) {
  std::set<std::string> qids = judged;
  for (const auto& [qid, _] : run.per_query) {
    if (qids.insert(qid).second) {
      std::cerr << "note: query " << qid << " appears in the run but not in the qrels; counted with zero relevant\n";
    }
  }
  return {qids.begin(), qids.end()};
}

std::set<std::string> judged_queries(const BinaryRelevance& rel) {
  std::set<std::string> out;
  for (const auto& [qid, _] : rel) out.insert(qid);
  return out;
}

const std::vector<RunEntry>& run_for(const RankedRun& run, const std::string& qid) {
  auto it = run.per_query.find(qid);
  return it == run.per_query.end() ? kEmptyRun : it->second;
}

MetricReport finalize(std::map<std::string, double> per_query) {
  MetricReport report;
  report.per_query = std::move(per_query);
  if (!report.per_query.empty()) {
    double total = 0.0;
    for (const auto& [_, v] : report.per_query) total += v;
    report.mean = total / static_cast<double>(report.per_query.size());
  }
  return report;
}

double gain_value(int grade, Gain gain) {
  return gain == Gain::Exp ? std::exp2(static_cast<double>(grade)) - 1.0 : static_cast<double>(grade);
}

}  // namespace

MetricReport precision_at_k(const RankedRun& run, const Qrels& qrels, int k) {
  return precision_at_k(run, binarize_qrels(qrels), k);
}

MetricReport precision_at_k(const RankedRun& run, const BinaryRelevance& rel, int k) {
  if (k < 1) throw ValidationError("precision_at_k: k must be >= 1");
  std::map<std::string, double> per_query;
  for (const auto& qid : evaluation_queries(run, judged_queries(rel))) {
    const auto& entries = run_for(run, qid);
    auto rit = rel.find(qid);
    int hits = 0;
    for (std::size_t i = 0; i < entries.size() && static_cast<int>(i) < k; ++i) {
      if (rit != rel.end() && rit->second.count(entries[i].docid)) ++hits;
    }
    // short result lists keep k in the denominator
    per_query[qid] = static_cast<double>(hits) / static_cast<double>(k);
  }
  return finalize(std::move(per_query));
}

MetricReport ndcg_at_k(const RankedRun& run, const Qrels& qrels, int k, Gain gain) {
  if (k < 1) throw ValidationError("ndcg_at_k: k must be >= 1");
  std::map<std::string, double> per_query;
  std::set<std::string> judged;
  for (const auto& [qid, _] : qrels.entries()) judged.insert(qid);
  for (const auto& qid : evaluation_queries(run, judged)) {
    const auto& entries = run_for(run, qid);
    double dcg = 0.0;
    for (std::size_t i = 0; i < entries.size() && static_cast<int>(i) < k; ++i) {
      const int grade = qrels.grade(qid, entries[i].docid);
      dcg += gain_value(grade, gain) / std::log2(static_cast<double>(i) + 2.0);
    }
    // ideal ordering over the query's own judgments, same gain
    std::vector<int> grades;
    auto qit = qrels.entries().find(qid);
    if (qit != qrels.entries().end()) {
      for (const auto& [_, g] : qit->second) {
        if (g > 0) grades.push_back(g);
      }
    }
    std::sort(grades.begin(), grades.end(), std::greater<int>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < grades.size() && static_cast<int>(i) < k; ++i) {
      idcg += gain_value(grades[i], gain) / std::log2(static_cast<double>(i) + 2.0);
    }
    per_query[qid] = idcg > 0.0 ? dcg / idcg : 0.0;
  }
  return finalize(std::move(per_query));
}

MetricReport mean_average_precision(const RankedRun& run, const Qrels& qrels) {
  return mean_average_precision(run, binarize_qrels(qrels));
}

MetricReport mean_average_precision(const RankedRun& run, const BinaryRelevance& rel) {
  std::map<std::string, double> per_query;
  for (const auto& qid : evaluation_queries(run, judged_queries(rel))) {
    const auto& entries = run_for(run, qid);
    auto rit = rel.find(qid);
    const std::size_t total_relevant = rit == rel.end() ? 0 : rit->second.size();
    if (total_relevant == 0) {
      per_query[qid] = 0.0;
      continue;
    }
    int hits = 0;
    double ap = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (rit->second.count(entries[i].docid)) {
        ++hits;
        ap += static_cast<double>(hits) / static_cast<double>(i + 1);
      }
    }
    per_query[qid] = ap / static_cast<double>(total_relevant);
  }
  return finalize(std::move(per_query));
}

MetricReport mean_reciprocal_rank(const RankedRun& run, const Qrels& qrels) {
  return mean_reciprocal_rank(run, binarize_qrels(qrels));
}

MetricReport mean_reciprocal_rank(const RankedRun& run, const BinaryRelevance& rel) {
  std::map<std::string, double> per_query;
  for (const auto& qid : evaluation_queries(run, judged_queries(rel))) {
    const auto& entries = run_for(run, qid);
    auto rit = rel.find(qid);
    double rr = 0.0;
    if (rit != rel.end()) {
      for (const auto& e : entries) {
        if (rit->second.count(e.docid)) {
          rr = 1.0 / static_cast<double>(e.rank);
          break;
        }
      }
    }
    per_query[qid] = rr;
  }
  return finalize(std::move(per_query));
}

}  // namespace gazby::eval
