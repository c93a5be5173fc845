#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gazby/formats.hpp"
#include "gazby/gaze.hpp"
#include "gazby/metrics.hpp"
#include "gazby/ranker.hpp"

namespace gazby::harness {

// Seeded generator for the bundled desk-scale corpora. One vocabulary backs
// both corpora so a gaze checkpoint pretrained on the gaze corpus drops into
// the rankers unchanged.
//
// Retrieval ground truth is lexical overlap: each query names three distinct
// content words from one topic, and a document's grade is the number of those
// words it contains (0..3). Candidate lists are emitted in a seeded random
// order so the provided ranking carries no signal.
//
// The gaze corpus encodes a word-length signal: every word's fixation
// duration is an affine function of its character length, so the
// standardized target is learnable exactly.
struct SynthSpec {
  std::uint64_t seed = 42;
  int num_docs = 200;
  int num_eval_queries = 50;
  int num_train_queries = 100;
  int candidates_per_query = 20;
  int triples_per_query = 20;
  int num_gaze_sentences = 2000;
  int doc_words_min = 20;
  int doc_words_max = 35;
};

struct SynthData {
  std::vector<std::string> vocab_tokens;
  std::vector<DocRecord> docs;
  std::vector<QueryRecord> eval_queries;
  std::vector<CandidateRecord> candidates;
  eval::Qrels qrels;
  std::vector<rank::TrainingTriple> triples;
  std::vector<gaze::FixationRecord> gaze_records;
};

SynthData make_synthetic_data(const SynthSpec& spec);

// Writes vocab.txt, collection.tsv, queries.tsv, candidates.tsv, qrels.txt,
// triples.tsv and gaze.tsv under `dir` (created if needed).
void write_synthetic_data(const SynthData& data, const std::string& dir);

}  // namespace gazby::harness
