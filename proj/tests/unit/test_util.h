#ifndef MVSEARCH_TESTS_TEST_UTIL_H_
#define MVSEARCH_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cctype>
#include <string>

#include "mvsearch/common/io.h"

namespace mvsearch::testing {

inline std::string DataFile(const std::string& name) {
  return ReadFile(std::string(MVSEARCH_TEST_DATA) + "/" + name);
}

inline std::string StripWhitespace(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(),
                         [](unsigned char c) { return std::isspace(c); }),
          s.end());
  return s;
}

}  // namespace mvsearch::testing

#endif  // MVSEARCH_TESTS_TEST_UTIL_H_
