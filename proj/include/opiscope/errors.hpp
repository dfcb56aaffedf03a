#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace opiscope {

// Bad flags, bad config values, missing configuration. CLI exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input data. CLI exit code 2. Carries file/line context when known.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
  DataError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_ = 0;
};

class QuantityParseError : public DataError {
 public:
  using DataError::DataError;
};

class PriceParseError : public DataError {
 public:
  using DataError::DataError;
};

class ListingParseError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace opiscope
