#include "gazby/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_set>

#include "gazby/errors.hpp"
#include "gazby/rng.hpp"

namespace gazby::harness {

namespace {

constexpr int kNumTopics = 10;
constexpr int kWordsPerTopic = 8;

const std::vector<std::string> kFunctionWords = {"the", "a", "of", "is", "in", "on", "for", "with", "and", "to"};

const std::vector<std::string> kSyllables = {"ba", "ce", "di", "fo", "gu", "ka", "lem", "mi", "no", "pa",
                                             "qu", "ru", "se", "ti", "vo", "wa", "xe", "yo", "zu", "ha"};

// Topic vocabulary: distinct two-syllable words; syllables have distinct
// spellings so concatenations cannot collide for distinct index pairs.
std::vector<std::vector<std::string>> make_topic_words() {
  std::vector<std::vector<std::string>> topics;
  std::set<std::string> used;
  int i = 0, j = 1;
  for (int t = 0; t < kNumTopics; ++t) {
    std::vector<std::string> words;
    while (static_cast<int>(words.size()) < kWordsPerTopic) {
      const std::string w = kSyllables[static_cast<std::size_t>(i)] + kSyllables[static_cast<std::size_t>(j)];
      if (used.insert(w).second) words.push_back(w);
      j = (j + 1) % static_cast<int>(kSyllables.size());
      if (j == 0) i = (i + 1) % static_cast<int>(kSyllables.size());
    }
    topics.push_back(std::move(words));
  }
  return topics;
}

// Gaze pool: words of exact lengths 2..12, ten per length, so fixation
// duration can be a clean function of character count.
std::vector<std::string> make_gaze_words() {
  const std::string letters = "bcdfglmnprst";
  std::vector<std::string> words;
  for (int len = 2; len <= 12; ++len) {
    for (int k = 0; k < 10; ++k) {
      std::string w;
      w.push_back(letters[static_cast<std::size_t>(k)]);
      w.push_back(letters[static_cast<std::size_t>((k + len) % letters.size())]);
      while (static_cast<int>(w.size()) < len) w.push_back('e');
      words.push_back(std::move(w));
    }
  }
  return words;
}

}  // namespace

SynthData make_synthetic_data(const SynthSpec& spec) {
  if (spec.num_docs < kNumTopics || spec.candidates_per_query < 4) {
    throw ValidationError("synthetic spec too small: need at least one doc per topic and four candidates");
  }
  SynthData data;
  const auto topics = make_topic_words();
  const auto gaze_words = make_gaze_words();

  // vocabulary: specials, function words, topic words, gaze words, two
  // subword-split demo words
  data.vocab_tokens = {"[CLS]", "[SEP]", "[PAD]", "[MASK]", "[Q]", "[D]", "[UNK]"};
  for (const auto& w : kFunctionWords) data.vocab_tokens.push_back(w);
  for (const auto& t : topics) {
    for (const auto& w : t) data.vocab_tokens.push_back(w);
  }
  for (const auto& w : gaze_words) data.vocab_tokens.push_back(w);
  for (const char* p : {"wi", "##fi", "blue", "##tooth"}) data.vocab_tokens.emplace_back(p);

  Rng rng(spec.seed);
  Rng doc_rng = rng.fork(1);
  Rng query_rng = rng.fork(2);
  Rng gaze_rng = rng.fork(3);

  // --- documents -------------------------------------------------------
  std::vector<int> doc_topic(static_cast<std::size_t>(spec.num_docs));
  std::vector<std::vector<std::string>> doc_words(static_cast<std::size_t>(spec.num_docs));
  for (int d = 0; d < spec.num_docs; ++d) {
    const int t = d % kNumTopics;
    doc_topic[static_cast<std::size_t>(d)] = t;
    const int len = doc_rng.uniform_int(spec.doc_words_min, spec.doc_words_max);
    std::vector<std::string> words;
    words.reserve(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) {
      if (doc_rng.uniform() < 0.25) {
        words.push_back(kFunctionWords[static_cast<std::size_t>(
            doc_rng.uniform_int(0, static_cast<int>(kFunctionWords.size()) - 1))]);
      } else {
        words.push_back(topics[static_cast<std::size_t>(t)][static_cast<std::size_t>(
            doc_rng.uniform_int(0, kWordsPerTopic - 1))]);
      }
    }
    doc_words[static_cast<std::size_t>(d)] = words;
    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) text += ' ';
      text += words[i];
    }
    data.docs.push_back(DocRecord{"d" + std::to_string(d), text});
  }

  auto overlap_grade = [&](const std::vector<std::string>& query_terms, int d) {
    const std::unordered_set<std::string> bag(doc_words[static_cast<std::size_t>(d)].begin(),
                                              doc_words[static_cast<std::size_t>(d)].end());
    int hit = 0;
    for (const auto& term : query_terms) {
      if (bag.count(term)) ++hit;
    }
    return hit;  // 0..3 with three distinct query terms
  };

  auto sample_query_terms = [&](Rng& r, int topic) {
    std::vector<int> idx = {0, 1, 2, 3, 4, 5, 6, 7};
    r.shuffle(idx);
    std::vector<std::string> terms;
    for (int i = 0; i < 3; ++i) {
      terms.push_back(topics[static_cast<std::size_t>(topic)][static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])]);
    }
    return terms;
  };

  // --- evaluation queries, candidates, qrels ---------------------------
  for (int q = 0; q < spec.num_eval_queries; ++q) {
    const int topic = query_rng.uniform_int(0, kNumTopics - 1);
    const auto terms = sample_query_terms(query_rng, topic);
    const std::string qid = "q" + std::to_string(q);
    data.eval_queries.push_back(QueryRecord{qid, terms[0] + " " + terms[1] + " " + terms[2]});

    std::vector<int> graded[4];
    for (int d = 0; d < spec.num_docs; ++d) {
      graded[overlap_grade(terms, d)].push_back(d);
    }
    // candidate pattern: a few relevant, the rest irrelevant
    std::vector<int> picked;
    auto take = [&](int grade, int want) {
      auto& pool = graded[grade];
      query_rng.shuffle(pool);
      for (int i = 0; i < want && i < static_cast<int>(pool.size()); ++i) picked.push_back(pool[static_cast<std::size_t>(i)]);
    };
    take(3, 2);
    take(2, 1);
    take(1, 1);
    std::vector<int>& zeros = graded[0];
    query_rng.shuffle(zeros);
    for (int i = 0; static_cast<int>(picked.size()) < spec.candidates_per_query && i < static_cast<int>(zeros.size());
         ++i) {
      picked.push_back(zeros[static_cast<std::size_t>(i)]);
    }
    query_rng.shuffle(picked);  // the provided order carries no signal
    for (std::size_t i = 0; i < picked.size(); ++i) {
      const int d = picked[i];
      data.candidates.push_back(CandidateRecord{qid, "d" + std::to_string(d), static_cast<int>(i) + 1});
      data.qrels.add(qid, "d" + std::to_string(d), overlap_grade(terms, d));
    }
  }

  // --- training triples over held-out query texts ----------------------
  for (int q = 0; q < spec.num_train_queries; ++q) {
    const int topic = query_rng.uniform_int(0, kNumTopics - 1);
    const auto terms = sample_query_terms(query_rng, topic);
    const std::string qtext = terms[0] + " " + terms[1] + " " + terms[2];
    std::vector<int> positives, negatives;
    for (int d = 0; d < spec.num_docs; ++d) {
      const int g = overlap_grade(terms, d);
      if (g >= 2) positives.push_back(d);
      if (g == 0) negatives.push_back(d);
    }
    if (positives.empty() || negatives.empty()) continue;
    for (int i = 0; i < spec.triples_per_query; ++i) {
      const int pos = positives[static_cast<std::size_t>(query_rng.uniform_int(0, static_cast<int>(positives.size()) - 1))];
      const int neg = negatives[static_cast<std::size_t>(query_rng.uniform_int(0, static_cast<int>(negatives.size()) - 1))];
      data.triples.push_back(rank::TrainingTriple{qtext, data.docs[static_cast<std::size_t>(pos)].text,
                                                  data.docs[static_cast<std::size_t>(neg)].text});
    }
  }

  // --- gaze corpus -------------------------------------------------------
  // Two synthetic datasets with different affine duration scales; per-dataset
  // min-max standardization maps both onto the same length-derived target.
  for (int s = 0; s < spec.num_gaze_sentences; ++s) {
    const bool second = s % 2 == 1;
    const std::string dataset = second ? "zuco_synth" : "geco_synth";
    const std::string sid = "s" + std::to_string(s);
    const int len = gaze_rng.uniform_int(4, 8);
    for (int w = 0; w < len; ++w) {
      std::string word;
      const double roll = gaze_rng.uniform();
      if (roll < 0.02) {
        word = "wifi";
      } else if (roll < 0.04) {
        word = "bluetooth";
      } else {
        word = gaze_words[static_cast<std::size_t>(gaze_rng.uniform_int(0, static_cast<int>(gaze_words.size()) - 1))];
      }
      const double ms = second ? 83.0 * static_cast<double>(word.size()) + 11.0
                               : 37.0 * static_cast<double>(word.size());
      data.gaze_records.push_back(gaze::FixationRecord{dataset, sid, word, ms});
    }
  }
  return data;
}

void write_synthetic_data(const SynthData& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto path = [&](const char* name) { return dir + "/" + name; };

  {
    std::ofstream out(path("vocab.txt"), std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path("vocab.txt"));
    for (const auto& t : data.vocab_tokens) out << t << '\n';
  }
  {
    std::ofstream out(path("collection.tsv"), std::ios::binary);
    for (const auto& d : data.docs) out << d.docid << '\t' << d.text << '\n';
  }
  {
    std::ofstream out(path("queries.tsv"), std::ios::binary);
    for (const auto& q : data.eval_queries) out << q.qid << '\t' << q.text << '\n';
  }
  {
    std::ofstream out(path("candidates.tsv"), std::ios::binary);
    for (const auto& c : data.candidates) out << c.qid << '\t' << c.docid << '\t' << c.rank << '\n';
  }
  write_qrels_file(data.qrels, path("qrels.txt"));
  {
    std::ofstream out(path("triples.tsv"), std::ios::binary);
    for (const auto& t : data.triples) out << t.query << '\t' << t.positive << '\t' << t.negative << '\n';
  }
  {
    std::ofstream out(path("gaze.tsv"), std::ios::binary);
    out << "dataset_id\tsentence_id\ttoken\tfixation_ms\n";
    char buf[32];
    for (const auto& r : data.gaze_records) {
      std::snprintf(buf, sizeof(buf), "%.3f", r.fixation_ms);
      out << r.dataset_id << '\t' << r.sentence_id << '\t' << r.token << '\t' << buf << '\n';
    }
  }
}

}  // namespace gazby::harness
