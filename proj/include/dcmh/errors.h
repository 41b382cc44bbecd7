// Copyright 2026 The DCMH Authors.
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

#ifndef DCMH_ERRORS_H_
#define DCMH_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcmh {

// Argument errors use std::invalid_argument throughout the library.

// A binary file whose contents do not match the expected layout.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& detail, std::size_t offset)
      : std::runtime_error(detail + " (at byte offset " +
                           std::to_string(offset) + ")"),
        detail_(detail),
        offset_(offset) {}

  // Same error with `context` (usually a path) prepended to the message.
  FormatError WithContext(const std::string& context) const {
    return FormatError(context + ": " + detail_, offset_);
  }

  const std::string& detail() const { return detail_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

// Open/read/write failures. The message always names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite losses or gradients during training.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dcmh

#endif  // DCMH_ERRORS_H_
