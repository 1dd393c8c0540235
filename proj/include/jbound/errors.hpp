#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace jbound {

// Error taxonomy shared by the library and the CLI. The CLI maps these to
// process exit codes: parse_error -> 2, precondition_error (and subclasses)
// -> 3, internal_error -> 4.

// Malformed input file. Carries the file name and 1-based line number.
class parse_error : public std::runtime_error {
public:
  parse_error(std::string file, long line, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  long line() const { return line_; }

private:
  std::string file_;
  long line_;
};

// A caller violated a documented precondition.
class precondition_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Argument outside the operation's domain (e.g. a set that is not a subset
// of the attribute universe).
class domain_error : public precondition_error {
public:
  using precondition_error::precondition_error;
};

// Input too large for an exhaustive method; the message names the scalable
// alternative when one exists.
class capability_error : public precondition_error {
public:
  using precondition_error::precondition_error;
};

// Materialization or enumeration would exceed a tuple budget.
class capacity_error : public precondition_error {
public:
  capacity_error(const std::string& message, uint64_t required, uint64_t budget)
      : precondition_error(message + " (required " + std::to_string(required) +
                           ", budget " + std::to_string(budget) + ")"),
        required_(required),
        budget_(budget) {}

  uint64_t required() const { return required_; }
  uint64_t budget() const { return budget_; }

private:
  uint64_t required_;
  uint64_t budget_;
};

// Broken internal invariant; always a bug.
class internal_error : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

}  // namespace jbound
