#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace colphys {

/// Raised when an operation is requested for a moisture mode that does not support it.
class InvalidMode : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Configuration validation failure; `field()` names the offending key path.
class InvalidConfig : public std::invalid_argument {
 public:
  InvalidConfig(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A column kernel threw while processing `column()`.
class ColumnFailure : public std::runtime_error {
 public:
  ColumnFailure(std::int64_t column, const std::string& message)
      : std::runtime_error("column " + std::to_string(column) + ": " + message), column_(column) {}

  std::int64_t column() const noexcept { return column_; }

 private:
  std::int64_t column_;
};

}  // namespace colphys
