#include "mvsearch/transforms/permute.h"

#include <algorithm>

#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"
#include "mvsearch/common/rng.h"

namespace mvsearch::transforms {

using code_model::BasicBlock;
using code_model::DefUse;
using code_model::MethodAst;
using code_model::StatementNode;

namespace {

template <typename T>
bool Intersects(const std::set<T>& a, const std::set<T>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

std::vector<std::vector<DefUse>> BlockDefUse(const MethodAst& ast,
                                             const std::vector<BasicBlock>& blocks) {
  std::vector<std::vector<DefUse>> out;
  for (const auto& bb : blocks) {
    auto& row = out.emplace_back();
    for (const StatementNode* s : bb.statements) row.push_back(ComputeDefUse(*s, ast));
  }
  return out;
}

}  // namespace

bool IndependentSets(const DefUse& a, const DefUse& b, bool conservative) {
  if (Intersects(a.defs, b.uses) || Intersects(a.uses, b.defs) ||
      Intersects(a.defs, b.defs)) {
    return false;
  }
  if (conservative) {
    if (Intersects(a.unbound_defs, b.unbound_refs) ||
        Intersects(a.unbound_refs, b.unbound_defs) ||
        Intersects(a.unbound_receivers, b.unbound_receivers)) {
      return false;
    }
  }
  return true;
}

bool Independent(const StatementNode& first, const StatementNode& second,
                 const MethodAst& ast, bool conservative) {
  bool same_block = false;
  for (const auto& bb : code_model::BasicBlocks(ast)) {
    auto i = std::find(bb.statements.begin(), bb.statements.end(), &first);
    auto j = std::find(bb.statements.begin(), bb.statements.end(), &second);
    if (i != bb.statements.end() && j != bb.statements.end() && i < j) {
      same_block = true;
      break;
    }
  }
  MVSEARCH_REQUIRE(same_block,
                   "independence is only defined for ordered statements of one basic block");
  return IndependentSets(ComputeDefUse(first, ast), ComputeDefUse(second, ast),
                         conservative);
}

std::vector<SwapSite> EligibleSwaps(const MethodAst& ast, const PermuteOptions& options) {
  const auto blocks = code_model::BasicBlocks(ast);
  const auto du = BlockDefUse(ast, blocks);
  std::vector<SwapSite> sites;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& row = du[b];
    for (std::size_t i = 0; i + 1 < row.size(); ++i) {
      const std::size_t last = options.nonadjacent ? row.size() - 1 : i + 1;
      for (std::size_t j = i + 1; j <= last; ++j) {
        // Moving s_i past s_k and s_k past s_j needs every pair among the
        // affected statements to commute.
        bool ok = IndependentSets(row[i], row[j], options.conservative);
        for (std::size_t k = i + 1; ok && k < j; ++k) {
          ok = IndependentSets(row[i], row[k], options.conservative) &&
               IndependentSets(row[k], row[j], options.conservative);
        }
        if (ok) sites.push_back({b, i, j});
      }
    }
  }
  return sites;
}

MethodAst ApplySwap(const MethodAst& ast, const SwapSite& site) {
  const auto blocks = code_model::BasicBlocks(ast);
  MVSEARCH_REQUIRE(site.block < blocks.size(), "swap block out of range");
  const auto& stmts = blocks[site.block].statements;
  MVSEARCH_REQUIRE(site.first < site.second && site.second < stmts.size(),
                   "swap positions out of range");
  const auto a = stmts[site.first]->span;
  const auto b = stmts[site.second]->span;
  const std::string& src = ast.source;
  std::string out;
  out.reserve(src.size());
  out.append(src, 0, a.begin);
  out.append(src, b.begin, b.size());
  out.append(src, a.end, b.begin - a.end);
  out.append(src, a.begin, a.size());
  out.append(src, b.end, std::string::npos);
  return code_model::ParseMethodSource(out);
}

std::vector<PermuteResult> PermuteStatements(const MethodAst& ast, std::uint64_t rng_seed,
                                             const PermuteOptions& options) {
  std::vector<SwapSite> sites = EligibleSwaps(ast, options);
  if (!options.all_variants && sites.size() > options.variants_per_entry) {
    Rng rng(MixSeed(rng_seed, Hash64(ast.source)));
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    for (std::size_t i = 0; i < options.variants_per_entry; ++i) {
      std::swap(sites[i], sites[i + rng.UniformIndex(sites.size() - i)]);
    }
    sites.resize(options.variants_per_entry);
  }
  const std::string input_hash = Sha256Hex(ast.source);
  std::vector<PermuteResult> out;
  for (const auto& site : sites) {
    PermuteResult r;
    r.ast = ApplySwap(ast, site);
    r.record.kind = TransformKind::kPermute;
    r.record.input_hash = input_hash;
    r.record.output_source = r.ast.source;
    r.record.swap = site;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace mvsearch::transforms
