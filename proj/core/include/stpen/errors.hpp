#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stpen {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class BoxError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class VocabError : public Error {
 public:
  using Error::Error;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

class UnsupportedShapeError : public Error {
 public:
  using Error::Error;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  enum class Kind { kIo, kBadMagic, kVersion, kTruncated, kDigest, kFormat };
  CheckpointError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Raised for a class with no ground-truth positives.
class UndefinedClassError : public Error {
 public:
  UndefinedClassError(std::size_t class_index)
      : Error("class " + std::to_string(class_index) + " has no positive records"),
        class_index_(class_index) {}
  std::size_t class_index() const { return class_index_; }

 private:
  std::size_t class_index_;
};

class EmptyEvalError : public Error {
 public:
  using Error::Error;
};

class DuplicateConfigError : public Error {
 public:
  using Error::Error;
};

class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// Invalid synthetic-video specification.
class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace stpen
