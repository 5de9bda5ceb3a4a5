#ifndef PRIMTRACE_ERROR_HPP
#define PRIMTRACE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace primtrace {

// Mirrors pt_status in primtrace.h; values must stay in sync.
enum class ErrorCode {
  kParse = 1,
  kIntegrity = 2,
  kLookup = 3,
  kParameter = 4,
  kAlignment = 5,
  kData = 6,
  kStructure = 7,
  kIo = 8,
  kUsage = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace primtrace

#endif  // PRIMTRACE_ERROR_HPP
