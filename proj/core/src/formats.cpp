#include "gazby/formats.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "gazby/errors.hpp"

namespace gazby::harness {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

[[noreturn]] void bad_line(const std::string& path, std::size_t lineno, const std::string& what) {
  throw ValidationError(path + ":" + std::to_string(lineno) + ": " + what);
}

void expect_fields(const std::string& path, std::size_t lineno, const std::vector<std::string>& fields,
                   std::size_t expected) {
  if (fields.size() != expected) {
    bad_line(path, lineno, "expected " + std::to_string(expected) + " tab-separated fields, got " +
                                std::to_string(fields.size()));
  }
  for (const auto& f : fields) {
    if (f.empty()) bad_line(path, lineno, "empty field");
  }
}

}  // namespace

std::vector<QueryRecord> load_queries(const std::string& path) {
  std::vector<QueryRecord> out;
  std::unordered_set<std::string> seen;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    expect_fields(path, i + 1, fields, 2);
    if (!seen.insert(fields[0]).second) bad_line(path, i + 1, "duplicate query id " + fields[0]);
    out.push_back(QueryRecord{fields[0], fields[1]});
  }
  return out;
}

std::vector<DocRecord> load_collection(const std::string& path) {
  std::vector<DocRecord> out;
  std::unordered_set<std::string> seen;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    expect_fields(path, i + 1, fields, 2);
    if (!seen.insert(fields[0]).second) bad_line(path, i + 1, "duplicate doc id " + fields[0]);
    out.push_back(DocRecord{fields[0], fields[1]});
  }
  return out;
}

std::vector<rank::TrainingTriple> load_triples(const std::string& path) {
  std::vector<rank::TrainingTriple> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    expect_fields(path, i + 1, fields, 3);
    if (fields[1] == fields[2]) bad_line(path, i + 1, "positive and negative passages are identical");
    out.push_back(rank::TrainingTriple{fields[0], fields[1], fields[2]});
  }
  return out;
}

std::vector<CandidateRecord> load_candidates(const std::string& path) {
  std::vector<CandidateRecord> out;
  std::set<std::pair<std::string, std::string>> seen;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    expect_fields(path, i + 1, fields, 3);
    int rank_value = 0;
    try {
      rank_value = std::stoi(fields[2]);
    } catch (const std::exception&) {
      bad_line(path, i + 1, "rank is not an integer: " + fields[2]);
    }
    if (!seen.emplace(fields[0], fields[1]).second) {
      bad_line(path, i + 1, "duplicate candidate (" + fields[0] + ", " + fields[1] + ")");
    }
    out.push_back(CandidateRecord{fields[0], fields[1], rank_value});
  }
  return out;
}

eval::Qrels load_qrels_file(const std::string& path) {
  eval::Qrels qrels;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::istringstream is(lines[i]);
    std::string qid, zero, docid, extra;
    int grade = 0;
    if (!(is >> qid >> zero >> docid >> grade)) {
      bad_line(path, i + 1, "expected `qid 0 docid grade`");
    }
    if (is >> extra) bad_line(path, i + 1, "trailing fields after grade");
    try {
      qrels.add(qid, docid, grade);
    } catch (const ValidationError& e) {
      bad_line(path, i + 1, e.what());
    }
  }
  return qrels;
}

void write_qrels_file(const eval::Qrels& qrels, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write qrels file: " + path);
  for (const auto& [qid, docs] : qrels.entries()) {
    for (const auto& [docid, grade] : docs) {
      out << qid << " 0 " << docid << ' ' << grade << '\n';
    }
  }
}

void write_run_file(const eval::RankedRun& run, const std::string& tag, const std::string& path) {
  run.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write run file: " + path);
  char score_buf[64];
  for (const auto& [qid, entries] : run.per_query) {
    for (const auto& e : entries) {
      std::snprintf(score_buf, sizeof(score_buf), "%.6f", e.score);
      out << qid << " Q0 " << e.docid << ' ' << e.rank << ' ' << score_buf << ' ' << tag << '\n';
    }
  }
  if (!out) throw ValidationError("write failed for run file: " + path);
}

eval::RankedRun parse_run_file(const std::string& path) {
  eval::RankedRun run;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::istringstream is(lines[i]);
    std::string qid, q0, docid, tag;
    int rank_value = 0;
    double score = 0.0;
    if (!(is >> qid >> q0 >> docid >> rank_value >> score >> tag)) {
      bad_line(path, i + 1, "expected `qid Q0 docid rank score tag`");
    }
    run.per_query[qid].push_back(eval::RunEntry{docid, score, rank_value});
  }
  run.validate();
  return run;
}

rank::IdfTable build_idf_table(const std::vector<DocRecord>& collection, const tok::Vocabulary& vocab) {
  if (collection.empty()) throw ValidationError("build_idf_table: empty collection");
  rank::IdfTable table;
  table.collection_size = static_cast<long>(collection.size());
  for (const auto& doc : collection) {
    std::unordered_set<std::string> distinct;
    for (const auto& piece : tok::wordpiece_tokenize(doc.text, vocab)) {
      distinct.insert(piece);
    }
    for (const auto& piece : distinct) ++table.df[piece];
  }
  return table;
}

}  // namespace gazby::harness
