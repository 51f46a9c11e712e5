#ifndef MVSEARCH_COMMON_ERRORS_H_
#define MVSEARCH_COMMON_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvsearch {

// Root of every error the library throws. The CLI maps each subclass to a
// distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

// Malformed or tampered on-disk artifact (manifest, tensors, catalog).
class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "format"; }
};

class LexError : public Error {
 public:
  LexError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  const char* kind() const noexcept override { return "lex"; }

 private:
  std::size_t offset_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  const char* kind() const noexcept override { return "parse"; }

 private:
  std::size_t offset_;
};

class IngestError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "ingest"; }
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "divergence"; }
};

#define MVSEARCH_REQUIRE(cond, msg)                  \
  do {                                               \
    if (!(cond)) throw ::mvsearch::ContractError(msg); \
  } while (0)

}  // namespace mvsearch

#endif  // MVSEARCH_COMMON_ERRORS_H_
