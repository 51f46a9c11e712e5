#ifndef MVSEARCH_TRANSFORMS_RENAME_H_
#define MVSEARCH_TRANSFORMS_RENAME_H_

#include <map>
#include <string>
#include <string_view>

#include "mvsearch/code_model/method_ast.h"
#include "mvsearch/transforms/transform_record.h"

namespace mvsearch::transforms {

enum class RenameOrder {
  // By original name; digit runs compare numerically so `var2` < `var10`.
  kLexicographic,
  // By declaration site.
  kDeclaration,
};

struct RenameResult {
  code_model::MethodAst ast;
  RenameMap map;
  TransformRecord record;
};

// Rewrites every local and parameter to `varN`. Only the identifier tokens
// of bindings change.
RenameResult RenameVariables(const code_model::MethodAst& ast,
                             RenameOrder order = RenameOrder::kLexicographic);

// Replaces the occurrences of the listed bindings and re-parses.
code_model::MethodAst ApplyRename(
    const code_model::MethodAst& ast,
    const std::map<code_model::BindingId, std::string>& names);

// Undoes `map` on the output of RenameVariables.
code_model::MethodAst InvertRename(const code_model::MethodAst& renamed,
                                   const RenameMap& map);

// Digit-aware ordering used by kLexicographic.
bool NaturalLess(std::string_view a, std::string_view b);

}  // namespace mvsearch::transforms

#endif  // MVSEARCH_TRANSFORMS_RENAME_H_
