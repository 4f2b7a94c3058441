// Copyright 2026 The ctcseg Authors
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

#ifndef CTCSEG_ERRORS_HPP_
#define CTCSEG_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ctcseg {

// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable or malformed files: bad magic, wrong version, truncated
// payload, unparsable text formats, OS-level I/O failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// In-memory data violates a documented invariant (duplicate tokens,
// blank index out of range, non-finite posterior entries, ...).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// The transcript has more characters than the recording has frames, so no
// monotone alignment can exist regardless of the probabilities.
class InfeasibleTextError : public Error {
 public:
  using Error::Error;
};

// Every complete path through the trellis has probability zero.
class NoPathError : public Error {
 public:
  using Error::Error;
};

// A transcript character cannot be mapped to a token.
class EncodeError : public Error {
 public:
  using Error::Error;
};

// Raised by the banded trellis. kInfeasible: the band is too narrow to let
// consecutive characters overlap in time, so no path can fit no matter the
// data. kEscape: a band was computed but the best path ran against its
// boundary; the result would silently differ from the unrestricted optimum.
// Both are fixed by a larger window (or automatic widening).
class WindowError : public Error {
 public:
  enum class Kind { kInfeasible, kEscape };

  WindowError(Kind kind, std::uint32_t char_index, const std::string& what)
      : Error(what), kind_(kind), char_index_(char_index) {}

  Kind kind() const { return kind_; }
  // Character column at which the problem was detected (0 when global).
  std::uint32_t char_index() const { return char_index_; }

 private:
  Kind kind_;
  std::uint32_t char_index_;
};

}  // namespace ctcseg

#endif  // CTCSEG_ERRORS_HPP_
