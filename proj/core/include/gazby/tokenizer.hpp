#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace gazby::tok {

enum class TokenKind : std::uint8_t { Regular, Cls, Sep, Pad, Mask, QMark, DMark, Unk };

const char* token_kind_name(TokenKind k);

// Plain-text vocabulary: one token per line, id = line number. The seven
// special tokens must all appear. Immutable after load.
class Vocabulary {
 public:
  static Vocabulary load(const std::string& path);
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  // -1 if absent
  int id(const std::string& token) const;
  const std::string& token(int token_id) const { return tokens_[static_cast<std::size_t>(token_id)]; }
  bool contains(const std::string& token) const { return id(token) >= 0; }

  int cls_id() const { return cls_id_; }
  int sep_id() const { return sep_id_; }
  int pad_id() const { return pad_id_; }
  int mask_id() const { return mask_id_; }
  int q_id() const { return q_id_; }
  int d_id() const { return d_id_; }
  int unk_id() const { return unk_id_; }

 private:
  void index_specials();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  int cls_id_ = -1, sep_id_ = -1, pad_id_ = -1, mask_id_ = -1, q_id_ = -1, d_id_ = -1, unk_id_ = -1;
};

// Framed token ids with parallel kind and subword-to-word alignment arrays.
// word_index is -1 at special positions and the source-word ordinal at
// Regular/Unk positions.
struct TokenSequence {
  std::vector<int> ids;
  std::vector<TokenKind> kinds;
  std::vector<int> word_index;
  int qlen = 0;  // query content pieces
  int dlen = 0;  // document content pieces

  int size() const { return static_cast<int>(ids.size()); }
  // 1 for every non-PAD position
  std::vector<std::uint8_t> pad_keep_mask() const;
  void validate() const;
};

// Lower-cases ASCII, splits on whitespace, and breaks punctuation into
// standalone tokens (uncased BERT convention).
std::vector<std::string> basic_tokenize(const std::string& text);

struct WordPieces {
  std::vector<std::string> pieces;
  std::vector<int> word_index;  // parallel to pieces
};

// Greedy longest-match-first subword split of pre-split words; continuation
// pieces carry the "##" prefix, undecomposable words become [UNK].
WordPieces tokenize_words(const std::vector<std::string>& words, const Vocabulary& vocab);

// Convenience over basic_tokenize + tokenize_words.
std::vector<std::string> wordpiece_tokenize(const std::string& text, const Vocabulary& vocab);
WordPieces wordpiece_tokenize_aligned(const std::string& text, const Vocabulary& vocab);

// [CLS] q [SEP] d [SEP]; when over max_len the document is truncated first,
// then the query, keeping both trailing [SEP]s.
TokenSequence frame_cross(const WordPieces& query, const WordPieces& doc, int max_len, const Vocabulary& vocab);

enum class FrameRole { Query, Document };

// Query: [CLS] [Q] t1..tq [SEP] then [MASK] augmentation to exactly max_query_len.
// Document: [CLS] [D] t1..td [SEP] then [PAD] to exactly max_doc_len.
TokenSequence frame_bi(const WordPieces& pieces, FrameRole role, int max_query_len, int max_doc_len,
                       const Vocabulary& vocab);

// [CLS] t1..tn [SEP] padded with [PAD] to pad_len (gaze-model framing).
// Sequences longer than pad_len - 2 are truncated; pad_len < 3 is an error.
TokenSequence frame_gaze(const WordPieces& pieces, int pad_len, const Vocabulary& vocab);

}  // namespace gazby::tok
