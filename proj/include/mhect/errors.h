#ifndef MHECT_ERRORS_H_
#define MHECT_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mhect {

// Base of every error the library throws. `exit_code` is the CLI status the
// error maps to.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, int exit_code = 1)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

// Bad dimensions, misaligned grids, malformed files.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, 2) {}
};

// Argument outside the domain of a function (signal time, k(t), ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what, 2) {}
};

// Horizon too short for the contraction condition, or T <= delta_bar.
class HorizonError : public Error {
 public:
  explicit HorizonError(const std::string& what) : Error(what, 3) {}
};

// LMI synthesis found no strictly feasible point.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(what, 3) {}
};

// Non-finite state during integration; `time` is where it happened.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double time)
      : Error(what, 1), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Bound audit could not be run (missing truth) or failed.
class AuditError : public Error {
 public:
  explicit AuditError(const std::string& what) : Error(what, 4) {}
};

// A result failed its own post-check. Indicates a bug.
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(what, 1) {}
};

}  // namespace mhect

#endif  // MHECT_ERRORS_H_
