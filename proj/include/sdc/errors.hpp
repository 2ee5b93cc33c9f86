#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sdc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes do not compose.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Value outside the domain of a function (log of non-positive, zero-norm vector, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A caller broke a precondition of the API.
class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace sdc
