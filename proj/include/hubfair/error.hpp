#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hubfair {

// Malformed or inconsistent input files and arguments. CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical or statistical failure during analysis. CLI exit code 1.
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class RankDeficient : public AnalysisError {
 public:
  RankDeficient(std::vector<std::string> dependent_columns)
      : AnalysisError(make_message(dependent_columns)),
        dependent_columns_(std::move(dependent_columns)) {}

  const std::vector<std::string>& dependent_columns() const noexcept {
    return dependent_columns_;
  }

 private:
  static std::string make_message(const std::vector<std::string>& cols) {
    std::string msg = "design matrix is rank deficient; dependent columns:";
    for (const auto& c : cols) msg += " " + c;
    return msg;
  }

  std::vector<std::string> dependent_columns_;
};

class CollinearityError : public AnalysisError {
 public:
  using AnalysisError::AnalysisError;
};

}  // namespace hubfair
