#ifndef MVSEARCH_TRANSFORMS_API_CATALOG_H_
#define MVSEARCH_TRANSFORMS_API_CATALOG_H_

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mvsearch/code_model/method_ast.h"
#include "mvsearch/code_model/token.h"

namespace mvsearch::transforms {

// JVM standard-library membership table.
//
// File format, one record per line, `#` starts a comment:
//   prefix java.
//   type Cipher javax.crypto
//   entry Objects.requireNonNull
class ApiCatalog {
 public:
  static ApiCatalog Parse(std::string_view text);
  static ApiCatalog Load(const std::filesystem::path& path);
  // The catalog shipped in data/jvm_api_catalog.txt, compiled in.
  static const ApiCatalog& Default();

  const std::vector<std::string>& package_prefixes() const { return prefixes_; }
  const std::map<std::string, std::string>& known_types() const { return types_; }
  const std::set<std::string>& static_entry_points() const { return entries_; }

  bool IsKnownType(const std::string& simple_name) const {
    return types_.count(simple_name) > 0;
  }
  bool HasPrefix(std::string_view qualified) const;

  // SHA-256 of a canonical rendering; independent of record order.
  std::string Hash() const;

 private:
  std::vector<std::string> prefixes_;
  std::map<std::string, std::string> types_;
  std::set<std::string> entries_;
};

struct ApiMatch {
  bool found = false;
  std::vector<std::string> matched;  // first-occurrence order, no repeats
};

// Token-level detector, usable on snippets the parser rejects.
ApiMatch HasJvmApiInvocation(const std::vector<code_model::Token>& tokens,
                             const ApiCatalog& catalog);
ApiMatch HasJvmApiInvocation(const code_model::MethodAst& ast,
                             const ApiCatalog& catalog);

}  // namespace mvsearch::transforms

#endif  // MVSEARCH_TRANSFORMS_API_CATALOG_H_
