#ifndef MVSEARCH_TRANSFORMS_PERMUTE_H_
#define MVSEARCH_TRANSFORMS_PERMUTE_H_

#include <cstdint>
#include <vector>

#include "mvsearch/code_model/analysis.h"
#include "mvsearch/code_model/method_ast.h"
#include "mvsearch/transforms/transform_record.h"

namespace mvsearch::transforms {

struct PermuteOptions {
  // Emit every eligible single swap instead of a seeded selection.
  bool all_variants = false;
  // Number of distinct swaps to select when all_variants is false.
  std::size_t variants_per_entry = 1;
  // Allow swapping non-adjacent statements that are also independent of
  // everything between them.
  bool nonadjacent = false;
  // Also treat shared unbound receivers and unbound writes as conflicts.
  bool conservative = false;
};

// True iff the two statements share no local in a def/def, def/use or
// use/def position. Both statements must sit in the same basic block of
// `ast` with `first` before `second`; throws ContractError otherwise.
bool Independent(const code_model::StatementNode& first,
                 const code_model::StatementNode& second,
                 const code_model::MethodAst& ast, bool conservative = false);

// The same predicate on precomputed def/use sets; no precondition check.
bool IndependentSets(const code_model::DefUse& a, const code_model::DefUse& b,
                     bool conservative = false);

// All swaps licensed under `options`, in block then position order.
std::vector<SwapSite> EligibleSwaps(const code_model::MethodAst& ast,
                                    const PermuteOptions& options = {});

// Exchanges the source text of the two statements and re-parses.
code_model::MethodAst ApplySwap(const code_model::MethodAst& ast, const SwapSite& site);

struct PermuteResult {
  code_model::MethodAst ast;
  TransformRecord record;
};

// Selection is seeded by `rng_seed` mixed with the hash of the source, so
// each snippet gets its own deterministic choice.
std::vector<PermuteResult> PermuteStatements(const code_model::MethodAst& ast,
                                             std::uint64_t rng_seed,
                                             const PermuteOptions& options = {});

}  // namespace mvsearch::transforms

#endif  // MVSEARCH_TRANSFORMS_PERMUTE_H_
