/* Copyright (c) 2026 TFT Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <stdexcept>
#include <string>

namespace tft {

// Error taxonomy mirrored by the CLI exit codes: usage 1, data 2, numeric 3.
class Error : public std::runtime_error {
 public:
  enum class Kind { kUsage = 1, kData = 2, kNumeric = 3 };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(Kind::kUsage, what) {}
};

class DataError : public Error {
 public:
  enum class Code {
    kBadMagic,
    kVersionMismatch,
    kTruncated,
    kBadChecksum,
    kCountMismatch,
    kMalformed,
    kShape,
  };

  DataError(Code code, const std::string& what) : Error(Kind::kData, what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

class ShapeError : public DataError {
 public:
  explicit ShapeError(const std::string& what) : DataError(Code::kShape, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, long iteration = -1)
      : Error(Kind::kNumeric, what), iteration_(iteration) {}
  // Iteration at which the failure was detected, -1 if not applicable.
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

}  // namespace tft
