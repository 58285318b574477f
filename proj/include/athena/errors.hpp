// Copyright 2026 The Athena Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Exception types shared by every module. All derive from athena::Error so
// callers (notably the CLI) can catch one base.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace athena {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed FASTQ/FASTA input. Carries the 1-based record index and line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t record, std::size_t line)
      : Error(what + " at record " + std::to_string(record) + " (line " +
              std::to_string(line) + ")"),
        record_(record),
        line_(line) {}

  std::size_t record() const { return record_; }
  std::size_t line() const { return line_; }

 private:
  std::size_t record_;
  std::size_t line_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class UndefinedPerplexityError : public Error {
 public:
  UndefinedPerplexityError()
      : Error("undefined perplexity: no scoreable tokens") {}
};

/// Model file problems: bad magic, unsupported version, checksum mismatch.
class ModelFormatError : public Error {
 public:
  using Error::Error;
};

class AdapterError : public Error {
 public:
  AdapterError(const std::string& what, int exit_code, std::string stderr_text,
               std::string log_path)
      : Error(what),
        exit_code_(exit_code),
        stderr_text_(std::move(stderr_text)),
        log_path_(std::move(log_path)) {}

  int exit_code() const { return exit_code_; }
  const std::string& stderr_text() const { return stderr_text_; }
  const std::string& log_path() const { return log_path_; }

 private:
  int exit_code_;
  std::string stderr_text_;
  std::string log_path_;
};

class UndefinedGainError : public Error {
 public:
  UndefinedGainError() : Error("undefined gain: original reads contain no errors") {}
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class StatisticsError : public Error {
 public:
  using Error::Error;
};

/// A corrector failed while the tuner evaluated a parameter value.
class EvaluationError : public Error {
 public:
  EvaluationError(long value, const std::string& cause)
      : Error("evaluation failed at value " + std::to_string(value) + ": " + cause),
        value_(value) {}

  long value() const { return value_; }

 private:
  long value_;
};

}  // namespace athena
