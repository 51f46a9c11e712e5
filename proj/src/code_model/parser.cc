#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <unordered_map>

#include "mvsearch/code_model/method_ast.h"
#include "mvsearch/common/errors.h"

namespace mvsearch::code_model {
namespace {

constexpr std::array<std::string_view, 8> kPrimitiveTypes = {
    "boolean", "byte", "char", "short", "int", "long", "float", "double"};

constexpr std::array<std::string_view, 11> kModifiers = {
    "public",   "private",  "protected", "static",       "final",   "abstract",
    "synchronized", "native", "strictfp", "transient", "volatile"};

constexpr std::array<std::string_view, 12> kAssignOps = {
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="};

template <std::size_t N>
bool OneOf(const std::array<std::string_view, N>& set, std::string_view s) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

// Recursive-descent parser over the significant (non-trivia) tokens.
// Positions named `p`, `q`, ... index into `sig_`, not into `tokens`.
class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) {
    ast_.tokens = std::move(tokens);
    ast_.source = JoinTokens(ast_.tokens);
    for (std::size_t i = 0; i < ast_.tokens.size(); ++i) {
      if (!ast_.tokens[i].IsTrivia()) sig_.push_back(i);
    }
  }

  MethodAst Run() {
    std::size_t p = SkipModifiersAndAnnotations(0);
    if (IsKeyword(p, "class") || IsKeyword(p, "interface") ||
        IsKeyword(p, "enum")) {
      Fail("unsupported top-level construct", p);
    }
    if (Is(p, "<")) {
      auto after = SkipTypeArgs(p);
      if (!after) Fail("bad type parameters", p);
      p = *after;
    }
    // Constructor: `Name (`; method: `Type Name (`.
    if (!(IsIdent(p) && Is(p + 1, "("))) {
      if (IsKeyword(p, "void")) {
        ++p;
      } else {
        auto after = SkipType(p);
        if (!after) Fail("expected method declaration", p);
        p = *after;
      }
    }
    if (!IsIdent(p) || !Is(p + 1, "(")) Fail("expected method name", p);
    ast_.signature.name = Text(p);
    scopes_.emplace_back();
    p = ParseParameters(p + 1);
    while (Is(p, "[") && Is(p + 1, "]")) p += 2;
    if (IsKeyword(p, "throws")) {
      ++p;
      while (p < sig_.size() && !Is(p, "{") && !Is(p, ";")) ++p;
    }
    if (Is(p, ";")) Fail("method has no body", p);
    if (!Is(p, "{")) Fail("expected method body", p);
    std::size_t end = 0;
    ast_.body = ParseBlock(p, &end);
    if (end != sig_.size()) Fail("unexpected tokens after method body", end);
    scopes_.pop_back();
    Finish();
    return std::move(ast_);
  }

 private:
  // --- token helpers -------------------------------------------------------
  const Token* At(std::size_t p) const {
    return p < sig_.size() ? &ast_.tokens[sig_[p]] : nullptr;
  }
  const std::string& Text(std::size_t p) const { return At(p)->text; }
  bool Is(std::size_t p, std::string_view text) const {
    const Token* t = At(p);
    return t && (t->kind == TokenKind::kOperator ||
                 t->kind == TokenKind::kPunctuation) &&
           t->text == text;
  }
  bool IsKeyword(std::size_t p, std::string_view text) const {
    const Token* t = At(p);
    return t && t->kind == TokenKind::kKeyword && t->text == text;
  }
  bool IsIdent(std::size_t p) const {
    const Token* t = At(p);
    return t && t->kind == TokenKind::kIdentifier;
  }
  std::size_t Offset(std::size_t p) const {
    if (p < sig_.size()) return ast_.tokens[sig_[p]].span.begin;
    return ast_.source.size();
  }

  [[noreturn]] std::size_t Fail(const std::string& what, std::size_t p) const {
    throw ParseError(what, Offset(p));
  }

  // Index just past the bracket matching the opener at p.
  std::size_t Match(std::size_t p) const {
    std::vector<char> stack;
    for (std::size_t q = p; q < sig_.size(); ++q) {
      const std::string& t = Text(q);
      if (At(q)->kind != TokenKind::kPunctuation) continue;
      if (t == "(" || t == "[" || t == "{") {
        stack.push_back(t[0]);
      } else if (t == ")" || t == "]" || t == "}") {
        const char open = t == ")" ? '(' : t == "]" ? '[' : '{';
        if (stack.empty() || stack.back() != open) Fail("unbalanced brackets", q);
        stack.pop_back();
        if (stack.empty()) return q + 1;
      }
    }
    Fail("unbalanced brackets", p);
  }

  // First position in [p, limit) holding `text` outside any brackets.
  std::optional<std::size_t> FindTopLevel(std::size_t p, std::size_t limit,
                                          std::string_view text) const {
    for (std::size_t q = p; q < limit;) {
      if (Is(q, text)) return q;
      if (Is(q, "(") || Is(q, "[") || Is(q, "{")) {
        q = Match(q);
        continue;
      }
      if (Is(q, ")") || Is(q, "]") || Is(q, "}")) return std::nullopt;
      ++q;
    }
    return std::nullopt;
  }

  std::size_t ExpectSemicolon(std::size_t p) const {
    auto semi = FindTopLevel(p, sig_.size(), ";");
    if (!semi) Fail("expected ';'", p);
    return *semi;
  }

  // --- types and modifiers -------------------------------------------------
  std::size_t SkipAnnotation(std::size_t p) const {
    ++p;  // '@'
    if (IsKeyword(p, "interface")) Fail("unsupported top-level construct", p);
    while (IsIdent(p)) {
      ++p;
      if (Is(p, ".") && IsIdent(p + 1)) {
        ++p;
      } else {
        break;
      }
    }
    if (Is(p, "(")) p = Match(p);
    return p;
  }

  std::size_t SkipModifiersAndAnnotations(std::size_t p) const {
    while (p < sig_.size()) {
      if (Is(p, "@")) {
        p = SkipAnnotation(p);
      } else if ((At(p)->kind == TokenKind::kKeyword &&
                  (OneOf(kModifiers, Text(p)) || Text(p) == "default"))) {
        ++p;
      } else {
        break;
      }
    }
    return p;
  }

  std::optional<std::size_t> SkipTypeArgs(std::size_t p) const {
    int depth = 0;
    for (std::size_t q = p; q < sig_.size(); ++q) {
      const Token& t = *At(q);
      if (Is(q, "<")) {
        ++depth;
      } else if (Is(q, ">")) {
        depth -= 1;
      } else if (Is(q, ">>")) {
        depth -= 2;
      } else if (Is(q, ">>>")) {
        depth -= 3;
      } else if (t.kind == TokenKind::kIdentifier || Is(q, ",") || Is(q, ".") ||
                 Is(q, "?") || Is(q, "[") || Is(q, "]") || Is(q, "&") ||
                 Is(q, "@") || IsKeyword(q, "extends") || IsKeyword(q, "super") ||
                 (t.kind == TokenKind::kKeyword && OneOf(kPrimitiveTypes, t.text))) {
        continue;
      } else {
        return std::nullopt;
      }
      if (depth == 0) return q + 1;
      if (depth < 0) return std::nullopt;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> SkipType(std::size_t p) const {
    if (At(p) && At(p)->kind == TokenKind::kKeyword && OneOf(kPrimitiveTypes, Text(p))) {
      ++p;
    } else if (IsIdent(p)) {
      ++p;
      while (true) {
        if (Is(p, "<")) {
          auto after = SkipTypeArgs(p);
          if (!after) return std::nullopt;
          p = *after;
        }
        if (Is(p, ".") && IsIdent(p + 1)) {
          p += 2;
          continue;
        }
        break;
      }
    } else {
      return std::nullopt;
    }
    while (Is(p, "[") && Is(p + 1, "]")) p += 2;
    return p;
  }

  // Start of `[final] [@Ann] Type name (=|;|,|[|:)`.
  std::optional<std::size_t> DeclarationName(std::size_t p) const {
    while (IsKeyword(p, "final") || Is(p, "@")) {
      p = Is(p, "@") ? SkipAnnotation(p) : p + 1;
    }
    auto after = SkipType(p);
    if (!after || !IsIdent(*after)) return std::nullopt;
    const std::size_t name = *after;
    if (Is(name + 1, "=") || Is(name + 1, ";") || Is(name + 1, ",") ||
        Is(name + 1, "[") || Is(name + 1, ":") || Is(name + 1, ")")) {
      return name;
    }
    return std::nullopt;
  }

  // --- scopes and bindings -------------------------------------------------
  std::optional<BindingId> Lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto found = it->find(name);
      if (found != it->end()) return found->second;
    }
    return std::nullopt;
  }

  void Declare(std::size_t p, BindingKind kind) {
    const BindingId id = ast_.bindings.size();
    const Token& t = *At(p);
    VariableBinding b;
    b.original_name = t.text;
    b.kind = kind;
    b.declaration_site = t.span;
    b.occurrences.push_back(t.span);
    b.occurrence_tokens.push_back(sig_[p]);
    ast_.bindings.push_back(std::move(b));
    scopes_.back()[t.text] = id;
    ast_.refs.push_back(VariableRef{sig_[p], id, true, false, false});
  }

  // Resolves identifiers in [p, end) against the current scopes.
  void ScanExpression(std::size_t p, std::size_t end) {
    for (std::size_t k = p; k < end; ++k) {
      if (!IsIdent(k)) continue;
      if (k > 0 && (Is(k - 1, ".") || Is(k - 1, "::") || Is(k - 1, "@") ||
                    IsKeyword(k - 1, "new"))) {
        continue;
      }
      if (Is(k + 1, "(") || IsIdent(k + 1)) continue;
      const std::string& name = Text(k);
      const auto binding = Lookup(name);
      if (!binding && std::isupper(static_cast<unsigned char>(name[0]))) {
        continue;  // type or constant name
      }
      VariableRef ref{sig_[k], binding, false, false, false};
      ref.is_receiver = Is(k + 1, ".") && IsIdent(k + 2) && Is(k + 3, "(");
      std::size_t j = k + 1;
      bool chained = false;
      while (j < end) {
        if (Is(j, "[")) {
          j = Match(j);
          chained = true;
        } else if (Is(j, ".") && IsIdent(j + 1) && !Is(j + 2, "(")) {
          j += 2;
          chained = true;
        } else {
          break;
        }
      }
      const bool assigned = At(j) && At(j)->kind == TokenKind::kOperator &&
                            OneOf(kAssignOps, Text(j));
      const bool stepped = Is(j, "++") || Is(j, "--") ||
                           (k > 0 && (Is(k - 1, "++") || Is(k - 1, "--")));
      if (assigned && Text(j) == "=" && !chained) {
        ref.is_def = true;
      } else if (assigned || stepped) {
        ref.is_def = true;
        ref.is_use = true;
      } else {
        ref.is_use = true;
      }
      if (binding) {
        auto& b = ast_.bindings[*binding];
        b.occurrences.push_back(At(k)->span);
        b.occurrence_tokens.push_back(sig_[k]);
      }
      ast_.refs.push_back(ref);
    }
  }

  // `name [dims] [= init] (, name ...)*` starting at the first name; `end`
  // is the terminating ';' / ')' position.
  void ParseDeclarators(std::size_t name, std::size_t end, BindingKind kind) {
    std::size_t q = name;
    while (q < end) {
      if (!IsIdent(q)) Fail("expected variable name", q);
      Declare(q, kind);
      ++q;
      while (Is(q, "[") && Is(q + 1, "]")) q += 2;
      if (Is(q, "=")) {
        std::size_t init = q + 1;
        std::size_t stop = end;
        for (std::size_t s = init; s < end;) {
          auto comma = FindTopLevel(s, end, ",");
          if (!comma) break;
          // A comma only starts a new declarator when a name follows.
          if (IsIdent(*comma + 1) &&
              (Is(*comma + 2, "=") || Is(*comma + 2, ",") ||
               Is(*comma + 2, "[") || *comma + 2 == end)) {
            stop = *comma;
            break;
          }
          s = *comma + 1;
        }
        ScanExpression(init, stop);
        q = stop;
      }
      if (q < end) {
        if (!Is(q, ",")) Fail("malformed declaration", q);
        ++q;
      }
    }
  }

  std::size_t ParseParameters(std::size_t open) {
    const std::size_t close = Match(open) - 1;
    std::size_t p = open + 1;
    while (p < close) {
      while (IsKeyword(p, "final") || Is(p, "@")) {
        p = Is(p, "@") ? SkipAnnotation(p) : p + 1;
      }
      auto after = SkipType(p);
      if (!after) Fail("malformed parameter", p);
      p = *after;
      if (Is(p, "...")) ++p;
      if (IsKeyword(p, "this")) {
        ++p;  // receiver parameter
      } else {
        if (!IsIdent(p)) Fail("expected parameter name", p);
        Declare(p, BindingKind::kParameter);
        ast_.signature.parameters.push_back(ast_.bindings.size() - 1);
        ++p;
      }
      while (Is(p, "[") && Is(p + 1, "]")) p += 2;
      if (Is(p, ",")) {
        ++p;
      } else if (p != close) {
        Fail("malformed parameter list", p);
      }
    }
    return close + 1;
  }

  // --- statements ----------------------------------------------------------
  StatementNode MakeNode(StatementKind kind, std::size_t first, std::size_t end) const {
    StatementNode n;
    n.kind = kind;
    n.first_token = sig_[first];
    n.last_token = sig_[end - 1] + 1;
    n.span = Span{ast_.tokens[n.first_token].span.begin,
                  ast_.tokens[n.last_token - 1].span.end};
    return n;
  }

  StatementNode ParseBlock(std::size_t p, std::size_t* end) {
    if (!Is(p, "{")) Fail("expected '{'", p);
    const std::size_t close = Match(p) - 1;
    scopes_.emplace_back();
    std::vector<StatementNode> children;
    std::size_t q = p + 1;
    while (q < close) {
      std::size_t next = 0;
      children.push_back(ParseStatement(q, &next));
      q = next;
    }
    if (q != close) Fail("statement overruns block", q);
    scopes_.pop_back();
    StatementNode n = MakeNode(StatementKind::kBlock, p, close + 1);
    n.children = std::move(children);
    std::vector<std::size_t> all(n.children.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    n.statement_lists.push_back(std::move(all));
    *end = close + 1;
    return n;
  }

  // Parses one statement in its own scope (branch or loop body).
  StatementNode ParseScoped(std::size_t p, std::size_t* end) {
    scopes_.emplace_back();
    StatementNode n = ParseStatement(p, end);
    scopes_.pop_back();
    return n;
  }

  static void AddSingletonLists(StatementNode& n) {
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      n.statement_lists.push_back({i});
    }
  }

  std::size_t ExpectParenthesized(std::size_t p) {
    if (!Is(p, "(")) Fail("expected '('", p);
    const std::size_t after = Match(p);
    ScanExpression(p + 1, after - 1);
    return after;
  }

  StatementNode ParseStatement(std::size_t p, std::size_t* end) {
    if (p >= sig_.size()) Fail("unexpected end of input", p);
    if (Is(p, "{")) return ParseBlock(p, end);
    if (Is(p, ";")) {
      *end = p + 1;
      return MakeNode(StatementKind::kOther, p, p + 1);
    }
    const Token& t = *At(p);
    if (t.kind == TokenKind::kKeyword) {
      const std::string& kw = t.text;
      if (kw == "if") return ParseIf(p, end);
      if (kw == "for") return ParseFor(p, end);
      if (kw == "while") {
        const std::size_t body = ExpectParenthesized(p + 1);
        StatementNode n;
        std::size_t stop = 0;
        StatementNode child = ParseScoped(body, &stop);
        n = MakeNode(StatementKind::kWhile, p, stop);
        n.children.push_back(std::move(child));
        AddSingletonLists(n);
        *end = stop;
        return n;
      }
      if (kw == "do") {
        std::size_t q = 0;
        StatementNode child = ParseScoped(p + 1, &q);
        if (!IsKeyword(q, "while")) Fail("expected 'while'", q);
        q = ExpectParenthesized(q + 1);
        if (!Is(q, ";")) Fail("expected ';'", q);
        StatementNode n = MakeNode(StatementKind::kWhile, p, q + 1);
        n.children.push_back(std::move(child));
        AddSingletonLists(n);
        *end = q + 1;
        return n;
      }
      if (kw == "try") return ParseTry(p, end);
      if (kw == "switch") return ParseSwitch(p, end);
      if (kw == "return") {
        const std::size_t semi = ExpectSemicolon(p);
        ScanExpression(p + 1, semi);
        *end = semi + 1;
        return MakeNode(StatementKind::kReturn, p, semi + 1);
      }
      if (kw == "throw" || kw == "assert") {
        const std::size_t semi = ExpectSemicolon(p);
        ScanExpression(p + 1, semi);
        *end = semi + 1;
        return MakeNode(StatementKind::kOther, p, semi + 1);
      }
      if (kw == "break" || kw == "continue") {
        const std::size_t semi = ExpectSemicolon(p);
        *end = semi + 1;
        return MakeNode(StatementKind::kOther, p, semi + 1);
      }
      if (kw == "synchronized" && Is(p + 1, "(")) {
        const std::size_t body = ExpectParenthesized(p + 1);
        std::size_t stop = 0;
        StatementNode child = ParseBlock(body, &stop);
        StatementNode n = MakeNode(StatementKind::kOther, p, stop);
        n.children.push_back(std::move(child));
        AddSingletonLists(n);
        *end = stop;
        return n;
      }
      if (kw == "class" || kw == "interface" || kw == "enum" ||
          ((kw == "abstract" || kw == "static") &&
           (IsKeyword(p + 1, "class") || IsKeyword(p + 1, "interface")))) {
        return SkipLocalType(p, end);
      }
      if (kw == "else" || kw == "catch" || kw == "finally" || kw == "case" ||
          kw == "default") {
        Fail("unexpected '" + kw + "'", p);
      }
    }
    if (IsIdent(p) && Text(p) == "record" && IsIdent(p + 1) && Is(p + 2, "(")) {
      return SkipLocalType(p, end);
    }
    if (IsIdent(p) && Is(p + 1, ":")) {
      std::size_t stop = 0;
      StatementNode child = ParseStatement(p + 2, &stop);
      StatementNode n = MakeNode(StatementKind::kOther, p, stop);
      n.children.push_back(std::move(child));
      AddSingletonLists(n);
      *end = stop;
      return n;
    }
    if (auto name = DeclarationName(p)) {
      const std::size_t semi = ExpectSemicolon(p);
      ParseDeclarators(*name, semi, BindingKind::kLocal);
      *end = semi + 1;
      return MakeNode(StatementKind::kDeclaration, p, semi + 1);
    }
    const std::size_t semi = ExpectSemicolon(p);
    ScanExpression(p, semi);
    *end = semi + 1;
    return MakeNode(StatementKind::kExpression, p, semi + 1);
  }

  StatementNode SkipLocalType(std::size_t p, std::size_t* end) {
    std::size_t q = p;
    while (q < sig_.size() && !Is(q, "{")) {
      if (Is(q, "(")) {
        q = Match(q);
      } else {
        ++q;
      }
    }
    if (q >= sig_.size()) Fail("expected type body", p);
    const std::size_t stop = Match(q);
    *end = stop;
    return MakeNode(StatementKind::kOther, p, stop);
  }

  StatementNode ParseIf(std::size_t p, std::size_t* end) {
    const std::size_t body = ExpectParenthesized(p + 1);
    std::size_t stop = 0;
    std::vector<StatementNode> children;
    children.push_back(ParseScoped(body, &stop));
    if (IsKeyword(stop, "else")) {
      children.push_back(ParseScoped(stop + 1, &stop));
    }
    StatementNode n = MakeNode(StatementKind::kIf, p, stop);
    n.children = std::move(children);
    AddSingletonLists(n);
    *end = stop;
    return n;
  }

  StatementNode ParseFor(std::size_t p, std::size_t* end) {
    if (!Is(p + 1, "(")) Fail("expected '('", p + 1);
    const std::size_t close = Match(p + 1) - 1;
    scopes_.emplace_back();
    const std::size_t head = p + 2;
    // A top-level ':' not paired with '?' marks the enhanced form.
    std::optional<std::size_t> colon;
    int pending_ternary = 0;
    for (std::size_t q = head; q < close;) {
      if (Is(q, "(") || Is(q, "[") || Is(q, "{")) {
        q = Match(q);
        continue;
      }
      if (Is(q, "?")) ++pending_ternary;
      if (Is(q, ":")) {
        if (pending_ternary == 0) {
          colon = q;
          break;
        }
        --pending_ternary;
      }
      ++q;
    }
    if (colon) {
      auto name = DeclarationName(head);
      if (!name || *name + 1 != *colon) Fail("malformed enhanced for", head);
      Declare(*name, BindingKind::kLoopVariable);
      ScanExpression(*colon + 1, close);
    } else {
      auto first_semi = FindTopLevel(head, close, ";");
      if (!first_semi) Fail("malformed for header", head);
      auto second_semi = FindTopLevel(*first_semi + 1, close, ";");
      if (!second_semi) Fail("malformed for header", *first_semi);
      if (auto name = DeclarationName(head); name && *name < *first_semi) {
        ParseDeclarators(*name, *first_semi, BindingKind::kLoopVariable);
      } else {
        ScanExpression(head, *first_semi);
      }
      ScanExpression(*first_semi + 1, *second_semi);
      ScanExpression(*second_semi + 1, close);
    }
    std::size_t stop = 0;
    StatementNode child = ParseScoped(close + 1, &stop);
    scopes_.pop_back();
    StatementNode n = MakeNode(StatementKind::kFor, p, stop);
    n.children.push_back(std::move(child));
    AddSingletonLists(n);
    *end = stop;
    return n;
  }

  StatementNode ParseTry(std::size_t p, std::size_t* end) {
    scopes_.emplace_back();
    std::size_t q = p + 1;
    if (Is(q, "(")) {
      const std::size_t close = Match(q) - 1;
      std::size_t r = q + 1;
      while (r < close) {
        const std::size_t stop = FindTopLevel(r, close, ";").value_or(close);
        if (auto name = DeclarationName(r); name && *name < stop) {
          ParseDeclarators(*name, stop, BindingKind::kLocal);
        } else {
          ScanExpression(r, stop);
        }
        r = stop < close ? stop + 1 : close;
      }
      q = close + 1;
    }
    std::vector<StatementNode> children;
    children.push_back(ParseBlock(q, &q));
    while (IsKeyword(q, "catch")) {
      if (!Is(q + 1, "(")) Fail("expected '('", q + 1);
      const std::size_t close = Match(q + 1) - 1;
      std::size_t r = q + 2;
      while (IsKeyword(r, "final") || Is(r, "@")) {
        r = Is(r, "@") ? SkipAnnotation(r) : r + 1;
      }
      while (true) {
        auto after = SkipType(r);
        if (!after) Fail("malformed catch parameter", r);
        r = *after;
        if (!Is(r, "|")) break;
        ++r;
      }
      if (!IsIdent(r) || r + 1 != close) Fail("malformed catch parameter", r);
      scopes_.emplace_back();
      Declare(r, BindingKind::kLocal);
      children.push_back(ParseBlock(close + 1, &q));
      scopes_.pop_back();
    }
    if (IsKeyword(q, "finally")) {
      children.push_back(ParseBlock(q + 1, &q));
    }
    if (children.size() == 1 && !Is(p + 1, "(")) {
      Fail("try without catch or finally", q);
    }
    scopes_.pop_back();
    StatementNode n = MakeNode(StatementKind::kTry, p, q);
    n.children = std::move(children);
    AddSingletonLists(n);
    *end = q;
    return n;
  }

  StatementNode ParseSwitch(std::size_t p, std::size_t* end) {
    const std::size_t open = ExpectParenthesized(p + 1);
    if (!Is(open, "{")) Fail("expected '{'", open);
    const std::size_t close = Match(open) - 1;
    scopes_.emplace_back();
    std::vector<StatementNode> children;
    std::vector<std::vector<std::size_t>> groups;
    std::size_t q = open + 1;
    while (q < close) {
      const bool is_case = IsKeyword(q, "case");
      if (!is_case && !IsKeyword(q, "default")) {
        if (groups.empty()) Fail("statement before case label", q);
        std::size_t next = 0;
        children.push_back(ParseStatement(q, &next));
        groups.back().push_back(children.size() - 1);
        q = next;
        continue;
      }
      // Label runs to the first top-level ':' or '->'.
      std::size_t r = q + 1;
      int pending_ternary = 0;
      while (r < close) {
        if (Is(r, "(") || Is(r, "[") || Is(r, "{")) {
          r = Match(r);
          continue;
        }
        if (Is(r, "->")) break;
        if (Is(r, "?")) ++pending_ternary;
        if (Is(r, ":")) {
          if (pending_ternary == 0) break;
          --pending_ternary;
        }
        ++r;
      }
      if (r >= close) Fail("malformed case label", q);
      groups.emplace_back();
      if (Is(r, ":")) {
        q = r + 1;
        continue;
      }
      // Arrow form: one body per label.
      std::size_t next = 0;
      if (Is(r + 1, "{") || IsKeyword(r + 1, "throw")) {
        children.push_back(ParseStatement(r + 1, &next));
      } else {
        const std::size_t semi = ExpectSemicolon(r + 1);
        ScanExpression(r + 1, semi);
        children.push_back(MakeNode(StatementKind::kExpression, r + 1, semi + 1));
        next = semi + 1;
      }
      groups.back().push_back(children.size() - 1);
      groups.emplace_back();
      q = next;
    }
    scopes_.pop_back();
    StatementNode n = MakeNode(StatementKind::kOther, p, close + 1);
    n.children = std::move(children);
    for (auto& g : groups) {
      if (!g.empty()) n.statement_lists.push_back(std::move(g));
    }
    *end = close + 1;
    return n;
  }

  void Finish() {
    for (auto& b : ast_.bindings) {
      std::vector<std::size_t> order(b.occurrences.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return b.occurrences[x].begin < b.occurrences[y].begin;
      });
      std::vector<Span> spans;
      std::vector<std::size_t> toks;
      for (std::size_t i : order) {
        spans.push_back(b.occurrences[i]);
        toks.push_back(b.occurrence_tokens[i]);
      }
      b.occurrences = std::move(spans);
      b.occurrence_tokens = std::move(toks);
    }
    std::sort(ast_.refs.begin(), ast_.refs.end(),
              [](const VariableRef& a, const VariableRef& b) { return a.token < b.token; });
  }

  MethodAst ast_;
  std::vector<std::size_t> sig_;
  std::vector<std::unordered_map<std::string, BindingId>> scopes_;
};

bool SameTree(const StatementNode& a, const StatementNode& b) {
  if (a.kind != b.kind || a.children.size() != b.children.size() ||
      a.statement_lists != b.statement_lists) {
    return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!SameTree(a.children[i], b.children[i])) return false;
  }
  return true;
}

}  // namespace

std::string_view BindingKindName(BindingKind kind) {
  switch (kind) {
    case BindingKind::kParameter: return "parameter";
    case BindingKind::kLocal: return "local";
    case BindingKind::kLoopVariable: return "loop-variable";
  }
  return "unknown";
}

std::string_view StatementKindName(StatementKind kind) {
  switch (kind) {
    case StatementKind::kExpression: return "expression";
    case StatementKind::kDeclaration: return "declaration";
    case StatementKind::kIf: return "if";
    case StatementKind::kFor: return "for";
    case StatementKind::kWhile: return "while";
    case StatementKind::kTry: return "try";
    case StatementKind::kReturn: return "return";
    case StatementKind::kBlock: return "block";
    case StatementKind::kOther: return "other";
  }
  return "unknown";
}

MethodAst ParseMethod(std::vector<Token> tokens) {
  return Parser(std::move(tokens)).Run();
}

MethodAst ParseMethodSource(std::string_view source) {
  return ParseMethod(TokenizeSource(source));
}

std::string PrintMethod(const MethodAst& ast) { return JoinTokens(ast.tokens); }

bool StructurallyEqual(const MethodAst& a, const MethodAst& b) {
  if (a.signature.name != b.signature.name ||
      a.signature.parameters != b.signature.parameters ||
      a.bindings.size() != b.bindings.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.bindings.size(); ++i) {
    const auto& x = a.bindings[i];
    const auto& y = b.bindings[i];
    if (x.original_name != y.original_name || x.kind != y.kind ||
        x.occurrences.size() != y.occurrences.size()) {
      return false;
    }
  }
  return SameTree(a.body, b.body);
}

}  // namespace mvsearch::code_model
