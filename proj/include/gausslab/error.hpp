#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gausslab {

enum class ErrorKind {
  invalid_spectrum,
  ordering,
  domain,
  empty_batch,
  shape,
  config,
  degenerate,
  singular_mode,
  divergent_integral,
  integrability,
  stiffness,
  convention,
  test_class,
  accuracy,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so that
/// callers (and tests) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace gausslab
