#ifndef MVLRT_ERRORS_HPP
#define MVLRT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mvlrt {

/// Failure classes. The CLI maps these onto its exit codes.
enum class ErrorKind {
  Input,        // malformed or non-finite data, bad arguments
  Dimension,    // p >= n1 + n2 and similar shape violations
  Assumption,   // y1 == 1 or y2 == 1
  Conditioning, // pooled scatter numerically singular
  Degenerate,   // rank-deficient data, nonpositive variance estimates
  Calibration,  // nonpositive nu_n^2
  Io,
  Internal,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Assumption: return "assumption";
    case ErrorKind::Conditioning: return "conditioning";
    case ErrorKind::Degenerate: return "degenerate-data";
    case ErrorKind::Calibration: return "calibration";
    case ErrorKind::Io: return "io";
    case ErrorKind::Internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Re-throws `e` with `context` prefixed to its message, keeping the kind.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
  throw Error(e.kind(), context + ": " + e.what());
}

}  // namespace mvlrt

#endif  // MVLRT_ERRORS_HPP
