#pragma once

#include <stdexcept>
#include <string>

namespace qmetro {

// Error categories. The CLI maps them onto exit codes:
// parse -> 2, usage/validation/domain -> 3, numerical integrity -> 4.
enum class ErrorKind { parse, usage, validation, domain, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class NumericalIntegrityError : public Error {
 public:
  explicit NumericalIntegrityError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

// Finite-difference step too coarse for the requested accuracy.
class StepSizeError : public NumericalIntegrityError {
 public:
  StepSizeError(const std::string& what, double suggested_eps)
      : NumericalIntegrityError(what), suggested_eps_(suggested_eps) {}
  double suggested_eps() const noexcept { return suggested_eps_; }

 private:
  double suggested_eps_;
};

// h_max == h_min: there is no pair of distinct extreme eigenvectors to superpose.
class DegenerateGeneratorError : public DomainError {
 public:
  explicit DegenerateGeneratorError(const std::string& what) : DomainError(what) {}
};

class StationaryPointError : public DomainError {
 public:
  explicit StationaryPointError(const std::string& what) : DomainError(what) {}
};

class PovmError : public ValidationError {
 public:
  explicit PovmError(const std::string& what) : ValidationError(what) {}
};

const char* to_string(ErrorKind kind) noexcept;
int exit_code(ErrorKind kind) noexcept;

}  // namespace qmetro
