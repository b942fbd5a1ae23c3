#pragma once

#include <stdexcept>
#include <string>

namespace coxthin {

// Error kinds surfaced by the CLI as machine-readable JSON.
enum class ErrorKind {
  kParameter,   // bad numeric parameter (lambda <= 0, ...)
  kContract,    // caller contract violated (intensity above envelope, ...)
  kStructural,  // malformed container (missing colour label, field mismatch)
  kDomain,      // point outside the declared domain
  kSize,        // guard tripped (enumeration blow-up, grid too large)
  kIo,          // file / format problems
  kSampling,    // sampler failed to make progress (rejection cap)
  kNumeric      // factorization failure that the caller may recover from
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  const char* kind_name() const {
    switch (kind_) {
      case ErrorKind::kParameter: return "parameter";
      case ErrorKind::kContract: return "contract";
      case ErrorKind::kStructural: return "structural";
      case ErrorKind::kDomain: return "domain";
      case ErrorKind::kSize: return "size";
      case ErrorKind::kIo: return "io";
      case ErrorKind::kSampling: return "sampling";
      case ErrorKind::kNumeric: return "numeric";
    }
    return "unknown";
  }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

}  // namespace coxthin
