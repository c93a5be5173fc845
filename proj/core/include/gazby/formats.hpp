#pragma once

#include <string>
#include <vector>

#include "gazby/metrics.hpp"
#include "gazby/ranker.hpp"
#include "gazby/tokenizer.hpp"

namespace gazby::harness {

struct QueryRecord {
  std::string qid;
  std::string text;
};

struct DocRecord {
  std::string docid;
  std::string text;
};

struct CandidateRecord {
  std::string qid;
  std::string docid;
  int rank = 0;
};

// Tab-separated loaders. Malformed lines are rejected with the file name and
// line number; QUERIES and COLLECTION reject duplicate ids.
std::vector<QueryRecord> load_queries(const std::string& path);
std::vector<DocRecord> load_collection(const std::string& path);
std::vector<rank::TrainingTriple> load_triples(const std::string& path);
// preserves the provided per-query order; rejects duplicate (qid, docid)
std::vector<CandidateRecord> load_candidates(const std::string& path);

// TREC qrels: `qid 0 docid grade`, whitespace-separated, grades in [0, 3].
eval::Qrels load_qrels_file(const std::string& path);
void write_qrels_file(const eval::Qrels& qrels, const std::string& path);

// TREC run lines `qid Q0 docid rank score tag`, scores printed with six
// decimals; byte-deterministic for a fixed run.
void write_run_file(const eval::RankedRun& run, const std::string& tag, const std::string& path);
eval::RankedRun parse_run_file(const std::string& path);

// Document frequency over this artifact's wordpiece pieces, counted once per
// document.
rank::IdfTable build_idf_table(const std::vector<DocRecord>& collection, const tok::Vocabulary& vocab);

}  // namespace gazby::harness
