#include "gazby/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "gazby/errors.hpp"

namespace gazby::tok {

namespace {

constexpr int kMaxWordChars = 100;  // longer words are always [UNK]

const char* kCls = "[CLS]";
const char* kSep = "[SEP]";
const char* kPad = "[PAD]";
const char* kMask = "[MASK]";
const char* kQ = "[Q]";
const char* kD = "[D]";
const char* kUnk = "[UNK]";

bool is_ascii_punct(unsigned char c) {
  return std::ispunct(c) != 0;
}

}  // namespace

const char* token_kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::Regular: return "REGULAR";
    case TokenKind::Cls: return "CLS";
    case TokenKind::Sep: return "SEP";
    case TokenKind::Pad: return "PAD";
    case TokenKind::Mask: return "MASK";
    case TokenKind::QMark: return "Q_MARK";
    case TokenKind::DMark: return "D_MARK";
    case TokenKind::Unk: return "UNK";
  }
  return "?";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return from_tokens(tokens);
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw ValidationError("empty vocabulary");
  Vocabulary v;
  v.tokens_ = tokens;
  v.ids_.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].empty()) {
      throw ValidationError("vocabulary line " + std::to_string(i + 1) + " is empty");
    }
    auto [_, inserted] = v.ids_.emplace(tokens[i], static_cast<int>(i));
    if (!inserted) {
      throw ValidationError("duplicate vocabulary token '" + tokens[i] + "' at line " + std::to_string(i + 1));
    }
  }
  v.index_specials();
  return v;
}

void Vocabulary::index_specials() {
  auto need = [&](const char* tok) {
    auto it = ids_.find(tok);
    if (it == ids_.end()) throw ValidationError(std::string("vocabulary is missing special token ") + tok);
    return it->second;
  };
  cls_id_ = need(kCls);
  sep_id_ = need(kSep);
  pad_id_ = need(kPad);
  mask_id_ = need(kMask);
  q_id_ = need(kQ);
  d_id_ = need(kD);
  unk_id_ = need(kUnk);
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? -1 : it->second;
}

std::vector<std::uint8_t> TokenSequence::pad_keep_mask() const {
  std::vector<std::uint8_t> keep(ids.size(), 1);
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (kinds[i] == TokenKind::Pad) keep[i] = 0;
  }
  return keep;
}

void TokenSequence::validate() const {
  const std::size_t n = ids.size();
  if (kinds.size() != n || word_index.size() != n) {
    throw ValidationError("TokenSequence parallel arrays disagree in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const bool content = kinds[i] == TokenKind::Regular || kinds[i] == TokenKind::Unk;
    if (content != (word_index[i] >= 0)) {
      throw ValidationError("TokenSequence word_index inconsistent at position " + std::to_string(i));
    }
    if (kinds[i] == TokenKind::Cls && i != 0) {
      throw ValidationError("TokenSequence [CLS] not at position 0");
    }
  }
}

std::vector<std::string> basic_tokenize(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&]() {
    if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      words.emplace_back(1, static_cast<char>(c));
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return words;
}

WordPieces tokenize_words(const std::vector<std::string>& words, const Vocabulary& vocab) {
  WordPieces out;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::string& word = words[w];
    const int word_ord = static_cast<int>(w);
    if (word.size() > kMaxWordChars) {
      out.pieces.emplace_back("[UNK]");
      out.word_index.push_back(word_ord);
      continue;
    }
    std::vector<std::string> sub;
    std::size_t start = 0;
    bool bad = false;
    while (start < word.size()) {
      std::size_t end = word.size();
      std::string match;
      while (start < end) {
        std::string candidate = word.substr(start, end - start);
        if (start > 0) candidate = "##" + candidate;
        if (vocab.contains(candidate)) {
          match = std::move(candidate);
          break;
        }
        --end;
      }
      if (match.empty()) {
        bad = true;
        break;
      }
      sub.push_back(std::move(match));
      start = end;
    }
    if (bad) {
      out.pieces.emplace_back("[UNK]");
      out.word_index.push_back(word_ord);
    } else {
      for (auto& p : sub) {
        out.pieces.push_back(std::move(p));
        out.word_index.push_back(word_ord);
      }
    }
  }
  return out;
}

std::vector<std::string> wordpiece_tokenize(const std::string& text, const Vocabulary& vocab) {
  return wordpiece_tokenize_aligned(text, vocab).pieces;
}

WordPieces wordpiece_tokenize_aligned(const std::string& text, const Vocabulary& vocab) {
  return tokenize_words(basic_tokenize(text), vocab);
}

namespace {

void append_piece(TokenSequence& seq, const std::string& piece, int word_ord, const Vocabulary& vocab) {
  const int id = vocab.id(piece);
  if (piece == "[UNK]" || id < 0) {
    seq.ids.push_back(vocab.unk_id());
    seq.kinds.push_back(TokenKind::Unk);
  } else {
    seq.ids.push_back(id);
    seq.kinds.push_back(TokenKind::Regular);
  }
  seq.word_index.push_back(word_ord);
}

void append_special(TokenSequence& seq, int id, TokenKind kind) {
  seq.ids.push_back(id);
  seq.kinds.push_back(kind);
  seq.word_index.push_back(-1);
}

}  // namespace

TokenSequence frame_cross(const WordPieces& query, const WordPieces& doc, int max_len, const Vocabulary& vocab) {
  if (max_len < 4) {
    throw ValidationError("frame_cross max_len " + std::to_string(max_len) +
                          " cannot hold the special tokens plus one query token");
  }
  // 3 specials: [CLS], two [SEP]
  int q_keep = static_cast<int>(query.pieces.size());
  int d_keep = static_cast<int>(doc.pieces.size());
  const int budget = max_len - 3;
  if (q_keep + d_keep > budget) {
    d_keep = std::max(0, budget - q_keep);
    if (q_keep > budget) q_keep = budget;
  }
  TokenSequence seq;
  append_special(seq, vocab.cls_id(), TokenKind::Cls);
  for (int i = 0; i < q_keep; ++i) append_piece(seq, query.pieces[static_cast<std::size_t>(i)],
                                                query.word_index[static_cast<std::size_t>(i)], vocab);
  append_special(seq, vocab.sep_id(), TokenKind::Sep);
  for (int i = 0; i < d_keep; ++i) append_piece(seq, doc.pieces[static_cast<std::size_t>(i)],
                                                doc.word_index[static_cast<std::size_t>(i)], vocab);
  append_special(seq, vocab.sep_id(), TokenKind::Sep);
  seq.qlen = q_keep;
  seq.dlen = d_keep;
  return seq;
}

TokenSequence frame_bi(const WordPieces& pieces, FrameRole role, int max_query_len, int max_doc_len,
                       const Vocabulary& vocab) {
  const int target = role == FrameRole::Query ? max_query_len : max_doc_len;
  if (target < 4) {
    throw ValidationError("frame_bi target length " + std::to_string(target) + " is smaller than 4");
  }
  const int capacity = target - 3;  // [CLS], marker, [SEP]
  const int keep = std::min<int>(capacity, static_cast<int>(pieces.pieces.size()));
  TokenSequence seq;
  append_special(seq, vocab.cls_id(), TokenKind::Cls);
  if (role == FrameRole::Query) {
    append_special(seq, vocab.q_id(), TokenKind::QMark);
  } else {
    append_special(seq, vocab.d_id(), TokenKind::DMark);
  }
  for (int i = 0; i < keep; ++i) {
    append_piece(seq, pieces.pieces[static_cast<std::size_t>(i)], pieces.word_index[static_cast<std::size_t>(i)],
                 vocab);
  }
  append_special(seq, vocab.sep_id(), TokenKind::Sep);
  if (role == FrameRole::Query) {
    while (seq.size() < target) append_special(seq, vocab.mask_id(), TokenKind::Mask);
    seq.qlen = keep;
  } else {
    while (seq.size() < target) append_special(seq, vocab.pad_id(), TokenKind::Pad);
    seq.dlen = keep;
  }
  return seq;
}

TokenSequence frame_gaze(const WordPieces& pieces, int pad_len, const Vocabulary& vocab) {
  if (pad_len < 3) throw ValidationError("frame_gaze pad_len must be at least 3");
  const int keep = std::min<int>(pad_len - 2, static_cast<int>(pieces.pieces.size()));
  TokenSequence seq;
  append_special(seq, vocab.cls_id(), TokenKind::Cls);
  for (int i = 0; i < keep; ++i) {
    append_piece(seq, pieces.pieces[static_cast<std::size_t>(i)], pieces.word_index[static_cast<std::size_t>(i)],
                 vocab);
  }
  append_special(seq, vocab.sep_id(), TokenKind::Sep);
  while (seq.size() < pad_len) append_special(seq, vocab.pad_id(), TokenKind::Pad);
  return seq;
}

}  // namespace gazby::tok
