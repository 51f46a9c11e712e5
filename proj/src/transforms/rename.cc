#include "mvsearch/transforms/rename.h"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include "mvsearch/common/errors.h"
#include "mvsearch/common/hash.h"

namespace mvsearch::transforms {

using code_model::BindingId;
using code_model::MethodAst;

bool RenameMap::IsIdentity() const {
  return std::all_of(entries.begin(), entries.end(), [](const RenameEntry& e) {
    return e.original_name == e.fresh_name;
  });
}

std::string_view TransformKindName(TransformKind kind) {
  return kind == TransformKind::kRename ? "rename" : "permute";
}

bool NaturalLess(std::string_view a, std::string_view b) {
  std::size_t i = 0;
  std::size_t j = 0;
  auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  while (i < a.size() && j < b.size()) {
    if (digit(a[i]) && digit(b[j])) {
      std::size_t ei = i;
      std::size_t ej = j;
      while (ei < a.size() && digit(a[ei])) ++ei;
      while (ej < b.size() && digit(b[ej])) ++ej;
      std::string_view ra = a.substr(i, ei - i);
      std::string_view rb = b.substr(j, ej - j);
      // Compare numerically without overflow: strip zeros, then length.
      auto strip = [](std::string_view r) {
        const auto nz = r.find_first_not_of('0');
        return nz == std::string_view::npos ? std::string_view{} : r.substr(nz);
      };
      const std::string_view na = strip(ra);
      const std::string_view nb = strip(rb);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      if (ra.size() != rb.size()) return ra.size() < rb.size();
      i = ei;
      j = ej;
      continue;
    }
    if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
    ++i;
    ++j;
  }
  return a.size() - i < b.size() - j;
}

MethodAst ApplyRename(const MethodAst& ast, const std::map<BindingId, std::string>& names) {
  std::vector<code_model::Token> tokens = ast.tokens;
  for (const auto& [id, name] : names) {
    MVSEARCH_REQUIRE(id < ast.bindings.size(), "rename of unknown binding");
    for (std::size_t tok : ast.bindings[id].occurrence_tokens) tokens[tok].text = name;
  }
  // Re-lex: spans shift when name lengths change.
  return code_model::ParseMethodSource(code_model::JoinTokens(tokens));
}

RenameResult RenameVariables(const MethodAst& ast, RenameOrder order) {
  std::vector<BindingId> ids(ast.bindings.size());
  std::iota(ids.begin(), ids.end(), BindingId{0});
  if (order == RenameOrder::kLexicographic) {
    std::stable_sort(ids.begin(), ids.end(), [&](BindingId a, BindingId b) {
      return NaturalLess(ast.bindings[a].original_name, ast.bindings[b].original_name);
    });
  }

  // Identifiers that are not local variables keep their text, so fresh
  // names must avoid them.
  std::set<std::size_t> binding_tokens;
  for (const auto& b : ast.bindings) {
    binding_tokens.insert(b.occurrence_tokens.begin(), b.occurrence_tokens.end());
  }
  std::set<std::string> taken;
  for (std::size_t i = 0; i < ast.tokens.size(); ++i) {
    if (ast.tokens[i].kind == code_model::TokenKind::kIdentifier && !binding_tokens.count(i)) {
      taken.insert(ast.tokens[i].text);
    }
  }

  RenameResult result;
  std::map<BindingId, std::string> names;
  std::size_t next = 0;
  for (BindingId id : ids) {
    std::string fresh;
    do {
      fresh = "var" + std::to_string(next++);
    } while (taken.count(fresh));
    names[id] = fresh;
    result.map.entries.push_back({id, ast.bindings[id].original_name, fresh});
  }
  result.ast = names.empty() ? ast : ApplyRename(ast, names);
  result.record.kind = TransformKind::kRename;
  result.record.input_hash = Sha256Hex(ast.source);
  result.record.output_source = result.ast.source;
  result.record.rename = result.map;
  return result;
}

MethodAst InvertRename(const MethodAst& renamed, const RenameMap& map) {
  std::map<BindingId, std::string> names;
  for (const auto& e : map.entries) names[e.binding] = e.original_name;
  return names.empty() ? renamed : ApplyRename(renamed, names);
}

}  // namespace mvsearch::transforms
