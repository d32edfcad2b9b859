// Copyright 2026 The metareg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METAREG_ERRORS_HPP_
#define METAREG_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace metareg {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kData = 2,
  kNumerical = 3,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

// Bad flags, malformed configuration, out-of-domain arguments.
class UsageError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

// Unreadable or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kData; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kNumerical; }
};

class SingularDesignError : public NumericalError {
 public:
  SingularDesignError(std::vector<std::string> columns, double condition);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  double condition() const noexcept { return condition_; }

 private:
  std::vector<std::string> columns_;
  double condition_;
};

class InsufficientStudiesError : public NumericalError {
 public:
  InsufficientStudiesError(std::size_t k, std::size_t p);

  std::size_t studies() const noexcept { return k_; }
  std::size_t parameters() const noexcept { return p_; }

 private:
  std::size_t k_;
  std::size_t p_;
};

// REML iteration budget exhausted. Carries the last iterate so callers in
// simulation mode can account for the replicate.
class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(double last_tau2, int iterations);

  double last_tau2() const noexcept { return last_tau2_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double last_tau2_;
  int iterations_;
};

}  // namespace metareg

#endif  // METAREG_ERRORS_HPP_
