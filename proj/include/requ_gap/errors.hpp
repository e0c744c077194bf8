#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace requ_gap {

/// Raised when an operation's input violates a documented precondition.
/// `constraint()` names the violated condition, e.g. "L >= 5".
class PreconditionError : public std::invalid_argument {
 public:
  PreconditionError(std::string constraint, const std::string& message)
      : std::invalid_argument(message), constraint_(std::move(constraint)) {}

  [[nodiscard]] const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

/// Raised by the network reader. Carries the byte offset for syntax errors and
/// the offending layer for structural ones.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& message, std::optional<std::size_t> byte_offset,
              std::optional<std::size_t> layer = std::nullopt)
      : std::runtime_error(message), byte_offset_(byte_offset), layer_(layer) {}

  [[nodiscard]] std::optional<std::size_t> byte_offset() const noexcept { return byte_offset_; }
  [[nodiscard]] std::optional<std::size_t> layer() const noexcept { return layer_; }

 private:
  std::optional<std::size_t> byte_offset_;
  std::optional<std::size_t> layer_;
};

inline void require(bool ok, const char* constraint, const std::string& message) {
  if (!ok) throw PreconditionError(constraint, message);
}

}  // namespace requ_gap
