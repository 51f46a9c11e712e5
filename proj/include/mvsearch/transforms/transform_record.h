#ifndef MVSEARCH_TRANSFORMS_TRANSFORM_RECORD_H_
#define MVSEARCH_TRANSFORMS_TRANSFORM_RECORD_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvsearch/code_model/method_ast.h"

namespace mvsearch::transforms {

struct RenameEntry {
  code_model::BindingId binding = 0;
  std::string original_name;
  std::string fresh_name;
};

// Binding -> `varN`. Entries are listed in assignment order, so entry i
// carries `var<i>` unless that name was taken by a non-local identifier.
struct RenameMap {
  std::vector<RenameEntry> entries;

  // No bindings, or every binding already carries its fresh name.
  bool IsIdentity() const;
};

// Positions are indices into a BasicBlock's statement list; `block` indexes
// BasicBlocks(ast).
struct SwapSite {
  std::size_t block = 0;
  std::size_t first = 0;
  std::size_t second = 0;
  friend bool operator==(const SwapSite&, const SwapSite&) = default;
};

enum class TransformKind { kRename, kPermute };

std::string_view TransformKindName(TransformKind kind);

struct TransformRecord {
  TransformKind kind = TransformKind::kRename;
  std::string input_hash;  // SHA-256 of the input source
  std::string output_source;
  std::optional<RenameMap> rename;
  std::optional<SwapSite> swap;
};

}  // namespace mvsearch::transforms

#endif  // MVSEARCH_TRANSFORMS_TRANSFORM_RECORD_H_
