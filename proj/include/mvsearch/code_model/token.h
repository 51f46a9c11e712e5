#ifndef MVSEARCH_CODE_MODEL_TOKEN_H_
#define MVSEARCH_CODE_MODEL_TOKEN_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mvsearch::code_model {

// Byte range [begin, end) into the method source.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool Contains(const Span& other) const {
    return begin <= other.begin && other.end <= end;
  }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class TokenKind {
  kIdentifier,
  kKeyword,
  kLiteral,
  kOperator,
  kPunctuation,
  kComment,
  kWhitespace,
};

std::string_view TokenKindName(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string text;
  Span span;

  bool IsTrivia() const {
    return kind == TokenKind::kComment || kind == TokenKind::kWhitespace;
  }
  bool Is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool IsPunct(std::string_view t) const {
    return (kind == TokenKind::kPunctuation || kind == TokenKind::kOperator) &&
           text == t;
  }
};

// Lossless Java lexer: the texts of the returned tokens concatenate to
// `source`. Throws LexError on an unterminated string, char literal, text
// block or block comment.
std::vector<Token> TokenizeSource(std::string_view source);

// Concatenation of all token texts.
std::string JoinTokens(const std::vector<Token>& tokens);

bool IsJavaKeyword(std::string_view word);

}  // namespace mvsearch::code_model

#endif  // MVSEARCH_CODE_MODEL_TOKEN_H_
