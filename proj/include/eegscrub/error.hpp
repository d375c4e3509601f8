#pragma once

#include <stdexcept>
#include <string>

namespace eegscrub {

enum class ErrorKind {
  invalid_argument,
  invalid_spec,
  too_short,
  invalid_levels,
  numeric_degeneracy,
  degenerate_input,
  divergence,
  stratification,
  shape_mismatch,
  unknown_kind,
  parse,
  io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_spec: return "invalid-spec";
    case ErrorKind::too_short: return "too-short";
    case ErrorKind::invalid_levels: return "invalid-levels";
    case ErrorKind::numeric_degeneracy: return "numeric-degeneracy";
    case ErrorKind::degenerate_input: return "degenerate-input";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::stratification: return "stratification";
    case ErrorKind::shape_mismatch: return "shape-mismatch";
    case ErrorKind::unknown_kind: return "unknown-kind";
    case ErrorKind::parse: return "parse";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace eegscrub
