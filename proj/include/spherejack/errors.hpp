#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spherejack {

/// Raised when an integrand or profile produces a non-finite value.
class numerical_domain_error : public std::domain_error {
 public:
  numerical_domain_error(const std::string& what, double node)
      : std::domain_error(what), node_(node) {}

  /// Abscissa at which the non-finite value appeared.
  double node() const noexcept { return node_; }

 private:
  double node_;
};

/// Operands built for different sphere dimensions were combined.
class dimension_mismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The sphere S^{n-1} is only supported for n >= 3.
class unsupported_dimension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A direct (grid based) computation was asked for at a resolution that
/// cannot resolve the integrand.
class resolution_error : public std::invalid_argument {
 public:
  resolution_error(const std::string& what, int required)
      : std::invalid_argument(what), required_(required) {}

  int required() const noexcept { return required_; }

 private:
  int required_;
};

/// A log-log fit was requested on data that cannot be log transformed.
class fit_error : public std::invalid_argument {
 public:
  fit_error(const std::string& what, std::vector<std::size_t> rows)
      : std::invalid_argument(what), rows_(std::move(rows)) {}

  const std::vector<std::size_t>& offending_rows() const noexcept { return rows_; }

 private:
  std::vector<std::size_t> rows_;
};

}  // namespace spherejack
