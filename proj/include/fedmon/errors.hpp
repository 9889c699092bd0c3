#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fedmon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated operation precondition (bad sizes, out-of-range arguments).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// Malformed IDX file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// One or more configuration problems, each tied to the offending key.
class ConfigError : public Error {
 public:
  struct Issue {
    std::string key;
    std::string message;
  };

  explicit ConfigError(std::vector<Issue> issues)
      : Error(render(issues)), issues_(std::move(issues)) {}
  ConfigError(std::string key, std::string message)
      : ConfigError(std::vector<Issue>{{std::move(key), std::move(message)}}) {}

  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  static std::string render(const std::vector<Issue>& issues) {
    std::string out;
    for (const auto& issue : issues) {
      if (!out.empty()) out += "\n";
      out += issue.key + ": " + issue.message;
    }
    return out;
  }

  std::vector<Issue> issues_;
};

// Every worker has been excluded; the run cannot continue.
class NoParticipantsError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedmon
