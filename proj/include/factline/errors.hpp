#pragma once

#include <stdexcept>
#include <string>

namespace factline {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file (bad JSON/CSV row, bad header, ...). Carries a
// 1-based line number when one is known.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line = 0)
      : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A raw validity string with no entry in the lexicon.
class UnmappedLabelError : public Error {
 public:
  explicit UnmappedLabelError(const std::string& raw)
      : Error("unmapped validity label: \"" + raw + "\""), raw_(raw) {}
  const std::string& raw_label() const { return raw_; }

 private:
  std::string raw_;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(const std::string& id)
      : Error("duplicate record id: \"" + id + "\""), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

// Bad argument values, missing files, out-of-range options.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Vector/matrix shape disagreement.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class EmptyVocabularyError : public Error {
 public:
  EmptyVocabularyError() : Error("no token survived the min_df filter") {}
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

// A pipeline stage failed; wraps the cause with the stage name.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace factline
