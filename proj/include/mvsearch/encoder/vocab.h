#ifndef MVSEARCH_ENCODER_VOCAB_H_
#define MVSEARCH_ENCODER_VOCAB_H_

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mvsearch/corpus/dataset.h"

namespace mvsearch::encoder {

// Splits text into model pieces: runs of letters and digits separated by
// anything else, then camelCase, acronym and letter/digit boundaries, all
// lowercased. "getFieldLabel()" -> get field label; "HTMLParser2" -> html
// parser 2; "max_len" -> max len. Bytes >= 0x80 count as letters.
std::vector<std::string> ModelPieces(std::string_view text);

class ModelVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kSep = 3;
  static constexpr int kNumSpecials = 4;
  static constexpr std::size_t kNoMinimum = std::numeric_limits<std::size_t>::max();

  ModelVocab();  // specials only

  // `tokens` lists the non-special entries in index order.
  static ModelVocab FromTokens(const std::vector<std::string>& tokens,
                               std::size_t min_frequency);

  int Lookup(std::string_view piece) const;
  const std::string& Token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const { return tokens_.size(); }
  std::size_t min_frequency() const { return min_frequency_; }

  // One token per line, specials included, index order.
  std::string Serialize() const;
  static ModelVocab Parse(std::string_view text, std::size_t min_frequency);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  std::size_t min_frequency_ = 1;
};

// Counts pieces over every example's query and code. Keeps pieces seen at
// least min_frequency times, ordered by count descending, then bytewise.
ModelVocab BuildVocab(const std::vector<corpus::PairExample>& examples,
                      std::size_t min_frequency);

// [BOS] query [SEP] code, cut to max_length by dropping code pieces first.
// max_length must be at least 2.
std::vector<int> ModelTokenize(std::string_view query, std::string_view code,
                               const ModelVocab& vocab, std::size_t max_length = 256);

}  // namespace mvsearch::encoder

#endif  // MVSEARCH_ENCODER_VOCAB_H_
