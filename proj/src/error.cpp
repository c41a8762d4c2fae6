#include "gausslab/error.hpp"

namespace gausslab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_spectrum: return "invalid-spectrum";
    case ErrorKind::ordering: return "ordering";
    case ErrorKind::domain: return "domain";
    case ErrorKind::empty_batch: return "empty-batch";
    case ErrorKind::shape: return "shape";
    case ErrorKind::config: return "config";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::singular_mode: return "singular-mode";
    case ErrorKind::divergent_integral: return "divergent-integral";
    case ErrorKind::integrability: return "integrability";
    case ErrorKind::stiffness: return "stiffness";
    case ErrorKind::convention: return "convention";
    case ErrorKind::test_class: return "test-class";
    case ErrorKind::accuracy: return "accuracy";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace gausslab
