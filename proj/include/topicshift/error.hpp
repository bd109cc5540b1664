#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace topicshift {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. `line()` is 1-based; 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A document has nothing a model can use (no in-vocabulary tokens).
class EmptyDocumentError : public Error {
 public:
  EmptyDocumentError(const std::string& doc_id, const std::string& what)
      : Error(what), doc_id_(doc_id) {}
  const std::string& doc_id() const { return doc_id_; }

 private:
  std::string doc_id_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, const std::string& what) : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Failure reported by (or while talking to) an external adapter process.
class AdapterError : public Error {
 public:
  AdapterError(const std::string& what, std::string payload = {})
      : Error(what), payload_(std::move(payload)) {}
  const std::string& payload() const { return payload_; }

 private:
  std::string payload_;
};

}  // namespace topicshift
