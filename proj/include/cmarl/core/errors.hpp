#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmarl {

enum class ErrorCode {
  UnknownKey,
  BadExtra,
  BadConfig,
  Closed,
  EpisodeOver,
  BadAction,
  UnsatisfiableSpawn,
  DimMismatch,
  StaleTape,
  Underfilled,
  BadId,
  EmptyStream,
  BadFrame,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (notably the wire protocol) can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cmarl
