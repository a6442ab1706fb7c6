#pragma once

#include <stdexcept>
#include <string>

namespace atex {

// Base class for all toolkit errors. Subclasses carry enough context in the
// message to locate the offending input (line numbers, sentence ids, token
// forms).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (XML, CoNLL-U, vector files). Carries a 1-based line
// number when one is known; line 0 means "not line-addressable".
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Structurally valid input that violates a semantic invariant (span out of
// bounds, substring mismatch, bad tree).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Two opinions claim the same token.
class OverlapError : public ValidationError {
 public:
  OverlapError(const std::string& sentence_id, const std::string& first,
               const std::string& second)
      : ValidationError("sentence " + sentence_id +
                        ": overlapping opinion spans \"" + first + "\" and \"" +
                        second + "\""),
        first_(first),
        second_(second) {}
  const std::string& first() const { return first_; }
  const std::string& second() const { return second_; }

 private:
  std::string first_, second_;
};

// Token sequences that cannot be aligned (aspect span over no token, or
// sentence tokens not matchable against tree tokens).
class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Caller passed inconsistent arguments (dimension or length mismatch).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint file problems: bad magic, unsupported version, checksum failure.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Training aborted (NaN loss and similar).
class TrainError : public Error {
 public:
  using Error::Error;
};

}  // namespace atex
