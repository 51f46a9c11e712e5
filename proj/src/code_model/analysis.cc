#include "mvsearch/code_model/analysis.h"

#include <algorithm>

namespace mvsearch::code_model {

DefUse ComputeDefUse(const StatementNode& statement, const MethodAst& ast) {
  DefUse du;
  auto it = std::lower_bound(
      ast.refs.begin(), ast.refs.end(), statement.first_token,
      [](const VariableRef& r, std::size_t tok) { return r.token < tok; });
  for (; it != ast.refs.end() && it->token < statement.last_token; ++it) {
    const VariableRef& r = *it;
    if (r.binding) {
      if (r.is_def) du.defs.insert(*r.binding);
      if (r.is_use) du.uses.insert(*r.binding);
      continue;
    }
    const std::string& name = ast.tokens[r.token].text;
    du.unbound_refs.insert(name);
    if (r.is_def) du.unbound_defs.insert(name);
    if (r.is_receiver) du.unbound_receivers.insert(name);
  }
  return du;
}

bool IsStraightLine(StatementKind kind) {
  return kind == StatementKind::kExpression || kind == StatementKind::kDeclaration;
}

namespace {

void Collect(const StatementNode& node, std::vector<BasicBlock>& out) {
  for (const auto& list : node.statement_lists) {
    BasicBlock current{{}, node.span};
    for (std::size_t idx : list) {
      const StatementNode& child = node.children[idx];
      if (IsStraightLine(child.kind)) {
        current.statements.push_back(&child);
      } else if (!current.statements.empty()) {
        out.push_back(std::move(current));
        current = BasicBlock{{}, node.span};
      }
    }
    if (!current.statements.empty()) out.push_back(std::move(current));
  }
  // Nested blocks are reported after the enclosing lists; callers rely on
  // the order being a pure function of the tree shape.
  for (const auto& child : node.children) Collect(child, out);
}

}  // namespace

std::vector<BasicBlock> BasicBlocks(const MethodAst& ast) {
  std::vector<BasicBlock> out;
  Collect(ast.body, out);
  return out;
}

}  // namespace mvsearch::code_model
