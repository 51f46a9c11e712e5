#include "mvsearch/transforms/api_catalog.h"

#include <algorithm>
#include <map>
#include <sstream>

#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"
#include "mvsearch/common/io.h"

namespace mvsearch::transforms {

extern const char kDefaultCatalogText[];

using code_model::Token;
using code_model::TokenKind;

ApiCatalog ApiCatalog::Parse(std::string_view text) {
  ApiCatalog catalog;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string kind;
    if (!(fields >> kind)) continue;
    std::string a;
    std::string b;
    std::string extra;
    const std::string where = "catalog line " + std::to_string(line_no);
    if (kind == "prefix") {
      if (!(fields >> a) || (fields >> extra)) throw FormatError(where + ": expected `prefix <pkg>`");
      catalog.prefixes_.push_back(a);
    } else if (kind == "type") {
      if (!(fields >> a >> b) || (fields >> extra)) {
        throw FormatError(where + ": expected `type <SimpleName> <package>`");
      }
      auto [it, inserted] = catalog.types_.emplace(a, b);
      if (!inserted && it->second != b) {
        throw FormatError(where + ": type " + a + " mapped to both " + it->second +
                          " and " + b);
      }
    } else if (kind == "entry") {
      if (!(fields >> a) || (fields >> extra) || a.find('.') == std::string::npos) {
        throw FormatError(where + ": expected `entry <Type.method>`");
      }
      catalog.entries_.insert(a);
    } else {
      throw FormatError(where + ": unknown record `" + kind + "`");
    }
  }
  std::sort(catalog.prefixes_.begin(), catalog.prefixes_.end());
  catalog.prefixes_.erase(std::unique(catalog.prefixes_.begin(), catalog.prefixes_.end()),
                          catalog.prefixes_.end());
  return catalog;
}

ApiCatalog ApiCatalog::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path));
}

const ApiCatalog& ApiCatalog::Default() {
  static const ApiCatalog catalog = Parse(kDefaultCatalogText);
  return catalog;
}

bool ApiCatalog::HasPrefix(std::string_view qualified) const {
  return std::any_of(prefixes_.begin(), prefixes_.end(), [&](const std::string& p) {
    return qualified.size() > p.size() && qualified.substr(0, p.size()) == p;
  });
}

std::string ApiCatalog::Hash() const {
  std::string canon;
  for (const auto& p : prefixes_) canon += "prefix " + p + "\n";
  for (const auto& [t, pkg] : types_) canon += "type " + t + " " + pkg + "\n";
  for (const auto& e : entries_) canon += "entry " + e + "\n";
  return Sha256Hex(canon);
}

namespace {

class Detector {
 public:
  Detector(const std::vector<Token>& tokens, const ApiCatalog& catalog)
      : tokens_(tokens), catalog_(catalog) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!tokens[i].IsTrivia()) sig_.push_back(i);
    }
  }

  ApiMatch Run() {
    CollectVariableTypes();
    for (std::size_t k = 0; k < sig_.size(); ++k) {
      if (!IsIdent(k) || Is(k - 1, ".")) continue;
      const std::string& name = Text(k);
      // Fully qualified names.
      if (Is(k + 1, ".") && IsIdent(k + 2)) {
        std::string qualified = name;
        std::size_t q = k;
        while (Is(q + 1, ".") && IsIdent(q + 2)) {
          qualified += "." + Text(q + 2);
          q += 2;
        }
        if (catalog_.HasPrefix(qualified)) {
          Add(qualified);
          k = q;
          continue;
        }
      }
      // Type.method( and entry points.
      if (Is(k + 1, ".") && IsIdent(k + 2) && Is(k + 3, "(")) {
        const std::string call = name + "." + Text(k + 2);
        if (catalog_.IsKnownType(name) || catalog_.static_entry_points().count(call)) {
          Add(call);
          continue;
        }
        if (auto it = declared_.find(name); it != declared_.end()) {
          Add(call);
          continue;
        }
        if (auto it = inferred_.find(name); it != inferred_.end()) {
          Add(it->second + "." + Text(k + 2));
          continue;
        }
      }
      // new Type(...) / new Type<...>(...)
      if (IsKeyword(k - 1, "new") && catalog_.IsKnownType(name) &&
          (Is(k + 1, "(") || Is(k + 1, "<"))) {
        Add("new " + name);
      }
    }
    return ApiMatch{!matched_.empty(), matched_};
  }

 private:
  bool Valid(std::size_t p) const { return p < sig_.size(); }
  const std::string& Text(std::size_t p) const { return tokens_[sig_[p]].text; }
  bool Is(std::size_t p, std::string_view t) const {
    return Valid(p) && (tokens_[sig_[p]].kind == TokenKind::kOperator ||
                        tokens_[sig_[p]].kind == TokenKind::kPunctuation) &&
           Text(p) == t;
  }
  bool IsKeyword(std::size_t p, std::string_view t) const {
    return Valid(p) && tokens_[sig_[p]].kind == TokenKind::kKeyword && Text(p) == t;
  }
  bool IsIdent(std::size_t p) const {
    return Valid(p) && tokens_[sig_[p]].kind == TokenKind::kIdentifier;
  }

  // `KnownType [<...>] [[]] name` declares name; `name = KnownType.m(`
  // types an undeclared name through the factory call.
  void CollectVariableTypes() {
    for (std::size_t k = 0; k < sig_.size(); ++k) {
      if (!IsIdent(k) || Is(k - 1, ".")) continue;
      const std::string& name = Text(k);
      if (catalog_.IsKnownType(name) && !Is(k + 1, ".")) {
        std::size_t q = k + 1;
        if (Is(q, "<")) {
          int depth = 0;
          for (; Valid(q); ++q) {
            if (Is(q, "<")) ++depth;
            if (Is(q, ">")) --depth;
            if (Is(q, ">>")) depth -= 2;
            if (Is(q, ">>>")) depth -= 3;
            if (depth <= 0 || Is(q, ";") || Is(q, "{")) break;
          }
          ++q;
        }
        while (Is(q, "[") && Is(q + 1, "]")) q += 2;
        if (IsIdent(q) && (Is(q + 1, "=") || Is(q + 1, ";") || Is(q + 1, ",") ||
                           Is(q + 1, ")") || Is(q + 1, ":"))) {
          declared_.emplace(Text(q), name);
        }
      }
      if (Is(k + 1, "=") && IsIdent(k + 2) && catalog_.IsKnownType(Text(k + 2)) &&
          Is(k + 3, ".") && IsIdent(k + 4) && Is(k + 5, "(")) {
        inferred_.emplace(name, Text(k + 2));
      }
    }
    for (const auto& [name, type] : declared_) inferred_.erase(name);
  }

  void Add(const std::string& witness) {
    if (std::find(matched_.begin(), matched_.end(), witness) == matched_.end()) {
      matched_.push_back(witness);
    }
  }

  const std::vector<Token>& tokens_;
  const ApiCatalog& catalog_;
  std::vector<std::size_t> sig_;
  std::map<std::string, std::string> declared_;
  std::map<std::string, std::string> inferred_;
  std::vector<std::string> matched_;
};

}  // namespace

ApiMatch HasJvmApiInvocation(const std::vector<Token>& tokens, const ApiCatalog& catalog) {
  return Detector(tokens, catalog).Run();
}

ApiMatch HasJvmApiInvocation(const code_model::MethodAst& ast, const ApiCatalog& catalog) {
  return Detector(ast.tokens, catalog).Run();
}

}  // namespace mvsearch::transforms
