#pragma once

#include <stdexcept>
#include <string>

namespace billiards {

/// Failure categories. The CLI maps each to a process exit code.
enum class ErrorKind {
  config,       // schema, range, smoothness, convexity
  no_eclipse,   // condition (H) violated
  solver,       // non-convergence, grazing solution, ill-conditioning
  grazing,      // tangential impact during shooting
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error config_error(const std::string& what) {
  return Error(ErrorKind::config, what);
}
inline Error solver_error(const std::string& what) {
  return Error(ErrorKind::solver, what);
}
inline Error grazing_error(const std::string& what) {
  return Error(ErrorKind::grazing, what);
}
inline Error io_error(const std::string& what) {
  return Error(ErrorKind::io, what);
}

}  // namespace billiards
