#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace penalearn {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class TraceError : public Error {
 public:
  using Error::Error;
};

class RegistryError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class OracleFailedError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

// Bad command line / config surface. The CLI maps this to exit status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Non-finite objective or constraint value. `constraint_index` is -1 for the
// objective, otherwise the index into inequalities followed by equalities.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, long constraint_index)
      : Error(what), constraint_index_(constraint_index) {}
  long constraint_index() const noexcept { return constraint_index_; }

 private:
  long constraint_index_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& what, int epoch, long sample)
      : Error(what), epoch_(epoch), sample_(sample) {}
  int epoch() const noexcept { return epoch_; }
  // -1 when the divergence is a batch aggregate rather than one sample.
  long sample() const noexcept { return sample_; }

 private:
  int epoch_;
  long sample_;
};

}  // namespace penalearn
