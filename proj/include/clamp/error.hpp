#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clamp {

enum class ErrorCode {
  kInvalidArgument,
  kSyntax,
  kUndefinedNonterminal,
  kDuplicateStart,
  kEmptyLanguage,
  kExplosion,
  kRejected,
  kDisallowedToken,
  kType,
  kIo,
  kData,
  kNoViableHypothesis,
  kScorer,
  kNotSupported,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a code so the C layer can map
// it onto a status value without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& msg)
      : Error(ErrorCode::kSyntax, "line " + std::to_string(line) + ", column " +
                                      std::to_string(column) + ": " + msg),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace clamp
