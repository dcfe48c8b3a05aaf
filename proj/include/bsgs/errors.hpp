#pragma once

#include <stdexcept>
#include <string>

namespace bsgs {

// Base type for all recoverable errors raised by the library. The CLI maps
// these to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class NearSingularRotation : public Error {
 public:
  explicit NearSingularRotation(const std::string& what) : Error(what) {}
};

class ParameterOutOfRange : public Error {
 public:
  explicit ParameterOutOfRange(const std::string& what) : Error(what) {}
};

class InsufficientPoints : public Error {
 public:
  explicit InsufficientPoints(const std::string& what) : Error(what) {}
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& what) : Error(what) {}
};

class EmptyStack : public Error {
 public:
  explicit EmptyStack(const std::string& what) : Error(what) {}
};

class DivergedTraining : public Error {
 public:
  explicit DivergedTraining(const std::string& what) : Error(what) {}
};

class DatasetMissingComponent : public Error {
 public:
  explicit DatasetMissingComponent(const std::string& what) : Error(what) {}
};

class DatasetParseError : public Error {
 public:
  DatasetParseError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace bsgs
