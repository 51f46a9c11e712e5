#ifndef MVSEARCH_CODE_MODEL_ANALYSIS_H_
#define MVSEARCH_CODE_MODEL_ANALYSIS_H_

#include <set>
#include <string>
#include <vector>

#include "mvsearch/code_model/method_ast.h"

namespace mvsearch::code_model {

struct DefUse {
  std::set<BindingId> defs;
  std::set<BindingId> uses;
  // Names that do not resolve to a local. They never take part in the
  // default independence check; the conservative check looks at them.
  std::set<std::string> unbound_defs;
  std::set<std::string> unbound_refs;
  std::set<std::string> unbound_receivers;

  friend bool operator==(const DefUse&, const DefUse&) = default;
};

// Locals defined and used anywhere inside `statement`, nested statements
// included. `statement` must come from `ast`.
DefUse ComputeDefUse(const StatementNode& statement, const MethodAst& ast);

struct BasicBlock {
  std::vector<const StatementNode*> statements;
  Span parent_span;
};

bool IsStraightLine(StatementKind kind);

// Maximal runs of consecutive expression and declaration statements, in
// source order. Pointers refer into `ast.body`.
std::vector<BasicBlock> BasicBlocks(const MethodAst& ast);

}  // namespace mvsearch::code_model

#endif  // MVSEARCH_CODE_MODEL_ANALYSIS_H_
