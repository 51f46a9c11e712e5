#include "mvsearch/encoder/vocab.h"

#include <algorithm>
#include <map>

#include "mvsearch/common/errors.h"

namespace mvsearch::encoder {

namespace {

constexpr const char* kSpecialNames[ModelVocab::kNumSpecials] = {"[PAD]", "[UNK]", "[BOS]",
                                                                 "[SEP]"};

bool IsUpper(char c) { return c >= 'A' && c <= 'Z'; }
bool IsLower(char c) { return (c >= 'a' && c <= 'z') || static_cast<unsigned char>(c) >= 0x80; }
bool IsDigit(char c) { return c >= '0' && c <= '9'; }
bool IsWordChar(char c) { return IsUpper(c) || IsLower(c) || IsDigit(c); }

char Lower(char c) { return IsUpper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

void SplitWord(std::string_view w, std::vector<std::string>& out) {
  std::size_t start = 0;
  for (std::size_t i = 1; i <= w.size(); ++i) {
    bool cut = i == w.size();
    if (!cut) {
      const char p = w[i - 1];
      const char c = w[i];
      cut = (IsDigit(p) != IsDigit(c)) || (IsLower(p) && IsUpper(c)) ||
            // "HTMLParser": cut before the last capital of a run.
            (IsUpper(p) && IsUpper(c) && i + 1 < w.size() && IsLower(w[i + 1]));
    }
    if (cut) {
      std::string piece;
      for (char c : w.substr(start, i - start)) piece += Lower(c);
      out.push_back(std::move(piece));
      start = i;
    }
  }
}

}  // namespace

std::vector<std::string> ModelPieces(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!IsWordChar(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && IsWordChar(text[j])) ++j;
    SplitWord(text.substr(i, j - i), out);
    i = j;
  }
  return out;
}

ModelVocab::ModelVocab() {
  for (int i = 0; i < kNumSpecials; ++i) {
    tokens_.emplace_back(kSpecialNames[i]);
    index_[tokens_.back()] = i;
  }
}

ModelVocab ModelVocab::FromTokens(const std::vector<std::string>& tokens,
                                  std::size_t min_frequency) {
  ModelVocab v;
  v.min_frequency_ = min_frequency;
  for (const auto& t : tokens) {
    if (t.empty() || !v.index_.emplace(t, static_cast<int>(v.tokens_.size())).second) {
      throw FormatError("vocabulary token '" + t + "' is empty or repeated");
    }
    v.tokens_.push_back(t);
  }
  return v;
}

int ModelVocab::Lookup(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  // Special names never come out of ModelPieces, but a caller could pass
  // one; they stay unknown rather than aliasing a control index.
  if (it == index_.end() || it->second < kNumSpecials) return kUnk;
  return it->second;
}

std::string ModelVocab::Serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

ModelVocab ModelVocab::Parse(std::string_view text, std::size_t min_frequency) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    lines.emplace_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  if (lines.size() < kNumSpecials) throw FormatError("vocabulary is missing special tokens");
  for (int i = 0; i < kNumSpecials; ++i) {
    if (lines[static_cast<std::size_t>(i)] != kSpecialNames[i]) {
      throw FormatError("vocabulary special token " + std::to_string(i) + " is wrong");
    }
  }
  return FromTokens({lines.begin() + kNumSpecials, lines.end()}, min_frequency);
}

ModelVocab BuildVocab(const std::vector<corpus::PairExample>& examples,
                      std::size_t min_frequency) {
  MVSEARCH_REQUIRE(!examples.empty(), "vocabulary needs a non-empty dataset");
  std::map<std::string, std::size_t> counts;
  for (const auto& x : examples) {
    for (auto& p : ModelPieces(x.query)) ++counts[std::move(p)];
    for (auto& p : ModelPieces(x.code)) ++counts[std::move(p)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [piece, n] : counts) {
    if (n >= min_frequency) kept.emplace_back(piece, n);
  }
  // counts is already bytewise ordered, so a stable sort on count keeps
  // ties in lexicographic order.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [piece, n] : kept) tokens.push_back(std::move(piece));
  return ModelVocab::FromTokens(tokens, min_frequency);
}

std::vector<int> ModelTokenize(std::string_view query, std::string_view code,
                               const ModelVocab& vocab, std::size_t max_length) {
  MVSEARCH_REQUIRE(max_length >= 2, "max_length must leave room for BOS and SEP");
  std::vector<int> seq = {ModelVocab::kBos};
  const auto q = ModelPieces(query);
  // Queries are kept whole unless they alone overflow the budget.
  const std::size_t q_keep = std::min(q.size(), max_length - 2);
  for (std::size_t i = 0; i < q_keep; ++i) seq.push_back(vocab.Lookup(q[i]));
  seq.push_back(ModelVocab::kSep);
  for (const auto& p : ModelPieces(code)) {
    if (seq.size() >= max_length) break;
    seq.push_back(vocab.Lookup(p));
  }
  return seq;
}

}  // namespace mvsearch::encoder
