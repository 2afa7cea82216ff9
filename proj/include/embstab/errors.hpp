#pragma once

#include <stdexcept>
#include <string>

namespace embstab {

// Input text could not be parsed. Carries the 1-based line number when the
// source is line-oriented (edge lists, corpus dumps).
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& message, long line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                      : message),
          line_(line) {}

    long line() const { return line_; }

  private:
    long line_;
};

// Filesystem / stream failures, kept distinct so the CLI can map them to a
// dedicated exit code.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Numerical failure during training (non-finite loss and friends).
class TrainError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace embstab
