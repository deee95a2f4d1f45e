#pragma once

#include <stdexcept>
#include <string>

namespace valleyfinder {

/// Failure categories. The numeric values double as CLI exit codes.
enum class error_kind : int {
  usage = 1,
  data = 2,
  numerical = 3,
};

class error : public std::runtime_error {
public:
  error(error_kind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {
  }

  error_kind kind() const noexcept {
    return kind_;
  }

private:
  error_kind kind_;
};

/// Invalid parameters or configuration.
struct usage_error : error {
  explicit usage_error(const std::string& what)
    : error(error_kind::usage, what) {
  }
};

/// Input that cannot be read, parsed, or is insufficient for the request.
struct data_error : error {
  explicit data_error(const std::string& what)
    : error(error_kind::data, what) {
  }
};

/// Fits that degenerate, roots that cannot be bracketed, non-finite values.
struct numerical_error : error {
  explicit numerical_error(const std::string& what)
    : error(error_kind::numerical, what) {
  }
};

} // namespace valleyfinder
