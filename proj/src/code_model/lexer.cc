#include <algorithm>
#include <array>
#include <cctype>

#include "mvsearch/code_model/token.h"
#include "mvsearch/common/errors.h"

namespace mvsearch::code_model {
namespace {

constexpr std::array<std::string_view, 50> kKeywords = {
    "abstract",   "assert",       "boolean",   "break",      "byte",
    "case",       "catch",        "char",      "class",      "const",
    "continue",   "default",      "do",        "double",     "else",
    "enum",       "extends",      "final",     "finally",    "float",
    "for",        "goto",         "if",        "implements", "import",
    "instanceof", "int",          "interface", "long",       "native",
    "new",        "package",      "private",   "protected",  "public",
    "return",     "short",        "static",    "strictfp",   "super",
    "switch",     "synchronized", "this",      "throw",      "throws",
    "transient",  "try",          "void",      "volatile",   "while",
};

// Longest first so a prefix scan finds the maximal munch.
constexpr std::array<std::string_view, 39> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "->", "::", "++", "--", "&&", "||",
    "==",   "!=",  "<=",  ">=",  "+=", "-=", "*=", "/=", "&=", "|=",
    "^=",   "%=",  "<<",  ">>",  "+",  "-",  "*",  "/",  "%",  "=",
    "<",    ">",   "!",   "~",   "?",  ":",  "&",  "|",  "^",
};

bool IsIdentStart(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool IsIdentPart(unsigned char c) { return IsIdentStart(c) || std::isdigit(c); }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> Run() {
    while (pos_ < src_.size()) {
      const std::size_t start = pos_;
      const TokenKind kind = Scan();
      out_.push_back(Token{kind, std::string(src_.substr(start, pos_ - start)),
                           Span{start, pos_}});
    }
    return std::move(out_);
  }

 private:
  char Peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  TokenKind Scan() {
    const auto c = static_cast<unsigned char>(Peek());
    if (std::isspace(c)) {
      while (pos_ < src_.size() &&
             std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
      }
      return TokenKind::kWhitespace;
    }
    if (c == '/' && Peek(1) == '/') {
      while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      return TokenKind::kComment;
    }
    if (c == '/' && Peek(1) == '*') {
      const std::size_t close = src_.find("*/", pos_ + 2);
      if (close == std::string_view::npos) {
        throw LexError("unterminated block comment", pos_);
      }
      pos_ = close + 2;
      return TokenKind::kComment;
    }
    if (c == '"') {
      if (Peek(1) == '"' && Peek(2) == '"') return ScanTextBlock();
      return ScanQuoted('"', "unterminated string literal");
    }
    if (c == '\'') return ScanQuoted('\'', "unterminated char literal");
    if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(Peek(1))))) {
      return ScanNumber();
    }
    if (IsIdentStart(c)) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && IsIdentPart(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
      }
      const std::string_view word = src_.substr(start, pos_ - start);
      if (word == "true" || word == "false" || word == "null") {
        return TokenKind::kLiteral;
      }
      return IsJavaKeyword(word) ? TokenKind::kKeyword : TokenKind::kIdentifier;
    }
    if (src_.substr(pos_, 3) == "...") {
      pos_ += 3;
      return TokenKind::kPunctuation;
    }
    for (std::string_view op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        pos_ += op.size();
        return TokenKind::kOperator;
      }
    }
    // Anything else, including stray bytes, becomes one punctuation byte so
    // the token stream stays lossless.
    ++pos_;
    return TokenKind::kPunctuation;
  }

  TokenKind ScanQuoted(char quote, const char* error) {
    const std::size_t start = pos_;
    ++pos_;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\\') {
        pos_ += 2;
        continue;
      }
      if (c == '\n') break;
      ++pos_;
      if (c == quote) return TokenKind::kLiteral;
    }
    throw LexError(error, start);
  }

  TokenKind ScanTextBlock() {
    const std::size_t start = pos_;
    pos_ += 3;
    while (pos_ < src_.size()) {
      if (src_[pos_] == '\\') {
        pos_ += 2;
        continue;
      }
      if (src_.substr(pos_, 3) == "\"\"\"") {
        pos_ += 3;
        return TokenKind::kLiteral;
      }
      ++pos_;
    }
    throw LexError("unterminated text block", start);
  }

  TokenKind ScanNumber() {
    // Loose numeric scan: digits, letters (hex digits, exponents, type
    // suffixes), underscores, dots and signed exponents.
    const bool hex = Peek() == '0' && (Peek(1) == 'x' || Peek(1) == 'X');
    while (pos_ < src_.size()) {
      const auto c = static_cast<unsigned char>(src_[pos_]);
      if (std::isalnum(c) || c == '_' || c == '.') {
        ++pos_;
        continue;
      }
      const char prev = src_[pos_ - 1];
      const bool exponent = hex ? (prev == 'p' || prev == 'P')
                                : (prev == 'e' || prev == 'E');
      if ((c == '+' || c == '-') && exponent) {
        ++pos_;
        continue;
      }
      break;
    }
    return TokenKind::kLiteral;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<Token> out_;
};

}  // namespace

std::string_view TokenKindName(TokenKind kind) {
  switch (kind) {
    case TokenKind::kIdentifier: return "identifier";
    case TokenKind::kKeyword: return "keyword";
    case TokenKind::kLiteral: return "literal";
    case TokenKind::kOperator: return "operator";
    case TokenKind::kPunctuation: return "punctuation";
    case TokenKind::kComment: return "comment";
    case TokenKind::kWhitespace: return "whitespace";
  }
  return "unknown";
}

bool IsJavaKeyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> TokenizeSource(std::string_view source) {
  return Lexer(source).Run();
}

std::string JoinTokens(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) out += t.text;
  return out;
}

}  // namespace mvsearch::code_model
