//
// Copyright 2026 The vprisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef VPRISK_ERRORS_HPP_
#define VPRISK_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vprisk {

// Base of every error raised by the library. `kind()` is a stable,
// machine-readable tag that the CLI copies into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message)
      : Error("SchemaError", message) {}
};

// Structural problem in an input file. Lines and columns are 1-based;
// column 0 means "whole line".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : Error("ParseError", "line " + std::to_string(line) + ", column " +
                                std::to_string(column) + ": " + reason),
        line_(line),
        column_(column),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string reason_;
};

// A well-formed record whose content breaks a dataset rule. `key` is
// "speaker/utterance"; `line` is 0 when the record did not come from a file.
class ValidationError : public Error {
 public:
  ValidationError(std::string key, const std::string& reason,
                  std::size_t line = 0, std::string kind = "ValidationError")
      : Error(std::move(kind),
              (line ? "line " + std::to_string(line) + ", " : std::string()) +
                  "record " + key + ": " + reason),
        key_(std::move(key)),
        reason_(reason),
        line_(line) {}

  const std::string& key() const noexcept { return key_; }
  const std::string& reason() const noexcept { return reason_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string key_;
  std::string reason_;
  std::size_t line_;
};

class DistributionError : public ValidationError {
 public:
  DistributionError(std::string key, const std::string& reason,
                    std::size_t line = 0)
      : ValidationError(std::move(key), reason, line, "DistributionError") {}
};

class UnknownSpeakerError : public Error {
 public:
  explicit UnknownSpeakerError(std::vector<std::string> missing)
      : Error("UnknownSpeakerError", Describe(missing)),
        missing_(std::move(missing)) {}

  const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  static std::string Describe(const std::vector<std::string>& ids) {
    std::string out = "unknown speaker ids:";
    for (const auto& id : ids) out += " " + id;
    return out;
  }

  std::vector<std::string> missing_;
};

#define VPRISK_SIMPLE_ERROR(Name)                  \
  class Name : public Error {                      \
   public:                                         \
    explicit Name(const std::string& message)      \
        : Error(#Name, message) {}                 \
  }

VPRISK_SIMPLE_ERROR(GranularityError);
VPRISK_SIMPLE_ERROR(EmptySpeakerError);
VPRISK_SIMPLE_ERROR(SpeakerSetMismatch);
VPRISK_SIMPLE_ERROR(SchemaMismatch);
VPRISK_SIMPLE_ERROR(EmptyDataset);
VPRISK_SIMPLE_ERROR(DimensionMismatch);
VPRISK_SIMPLE_ERROR(AccuracyOutOfRange);
VPRISK_SIMPLE_ERROR(KeyMismatch);
VPRISK_SIMPLE_ERROR(IOError);
VPRISK_SIMPLE_ERROR(InvalidArgument);

#undef VPRISK_SIMPLE_ERROR

}  // namespace vprisk

#endif  // VPRISK_ERRORS_HPP_
