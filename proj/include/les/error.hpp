#pragma once

#include <stdexcept>
#include <string>

namespace les {

/// Failure category. Maps onto the CLI exit codes (1, 2, 3).
enum class ErrorKind { io, config, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_io(const std::string& msg) { throw Error(ErrorKind::io, msg); }
[[noreturn]] inline void throw_config(const std::string& msg) { throw Error(ErrorKind::config, msg); }
[[noreturn]] inline void throw_numerical(const std::string& msg) {
  throw Error(ErrorKind::numerical, msg);
}

/// Same kind, message prefixed with `context: `.
inline Error with_context(const Error& e, const std::string& context) {
  return Error(e.kind(), context + ": " + e.what());
}

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io:
      return 1;
    case ErrorKind::config:
      return 2;
    case ErrorKind::numerical:
      return 3;
  }
  return 3;
}

}  // namespace les
