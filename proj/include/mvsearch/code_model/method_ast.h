#ifndef MVSEARCH_CODE_MODEL_METHOD_AST_H_
#define MVSEARCH_CODE_MODEL_METHOD_AST_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvsearch/code_model/token.h"

namespace mvsearch::code_model {

using BindingId = std::size_t;

enum class BindingKind { kParameter, kLocal, kLoopVariable };

std::string_view BindingKindName(BindingKind kind);

// One local variable or parameter. Shadowing declarations get their own
// binding even when they reuse a name.
struct VariableBinding {
  std::string original_name;
  BindingKind kind;
  Span declaration_site;
  std::vector<Span> occurrences;  // sorted; front() == declaration_site
  std::vector<std::size_t> occurrence_tokens;  // token indices, same order
};

enum class StatementKind {
  kExpression,
  kDeclaration,
  kIf,
  kFor,
  kWhile,
  kTry,
  kReturn,
  kBlock,
  kOther,
};

std::string_view StatementKindName(StatementKind kind);

struct StatementNode {
  StatementKind kind = StatementKind::kOther;
  Span span;
  // Token index range [first_token, last_token) into MethodAst::tokens.
  std::size_t first_token = 0;
  std::size_t last_token = 0;
  std::vector<StatementNode> children;
  // Straight-line runs of direct children, in source order. Each inner
  // vector indexes into `children`. Case groups of a switch are separate
  // lists so a case label always ends a run.
  std::vector<std::vector<std::size_t>> statement_lists;
};

// How a resolved identifier occurrence touches its variable.
struct VariableRef {
  std::size_t token = 0;
  std::optional<BindingId> binding;  // empty: field, static or unknown name
  bool is_def = false;
  bool is_use = false;
  bool is_receiver = false;  // `name.method(...)`
};

struct MethodSignature {
  std::string name;
  std::vector<BindingId> parameters;
};

struct MethodAst {
  std::string source;
  std::vector<Token> tokens;
  MethodSignature signature;
  StatementNode body;  // kind kBlock, spans the braces
  std::vector<VariableBinding> bindings;  // ordered by declaration site
  // Every variable-position identifier: bound ones plus unbound names that
  // are read or written like variables.
  std::vector<VariableRef> refs;
};

// Parses a single method or constructor declaration. Throws ParseError.
MethodAst ParseMethod(std::vector<Token> tokens);

// TokenizeSource followed by ParseMethod.
MethodAst ParseMethodSource(std::string_view source);

// Inverse of parsing: the verbatim source text.
std::string PrintMethod(const MethodAst& ast);

// Same statement tree shape and kinds, same binding names, kinds and
// occurrence counts. Spans are ignored.
bool StructurallyEqual(const MethodAst& a, const MethodAst& b);

}  // namespace mvsearch::code_model

#endif  // MVSEARCH_CODE_MODEL_METHOD_AST_H_
