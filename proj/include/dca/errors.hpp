#pragma once

#include <stdexcept>
#include <string>

namespace dca {

/// Invalid argument to a numeric routine (non-positive shape, empty vector, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Structurally valid input that violates a model or corpus invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A document whose observed word has zero mass under every component.
class DegenerateDocument : public std::runtime_error {
 public:
  DegenerateDocument(int word, const std::string& what)
      : std::runtime_error(what), word_(word) {}
  int word() const { return word_; }

 private:
  int word_;
};

/// Internal bookkeeping failure (e.g. negative counts in a sampler).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace dca
