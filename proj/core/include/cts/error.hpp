#pragma once

#include <stdexcept>
#include <string>

namespace cts {

/// Base of all errors raised by the pipeline. The kind selects the process
/// exit code when the error escapes to the command-line tool.
class Error : public std::runtime_error {
 public:
  enum class Kind { kConfig, kData, kNumeric };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Kind::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Kind::kData, what) {}
};

/// Training diverged or produced non-finite values.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Kind::kNumeric, what) {}
};

}  // namespace cts
