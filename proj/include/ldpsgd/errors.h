//
// Copyright 2026 The ldpsgd Authors
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

#ifndef LDPSGD_ERRORS_H_
#define LDPSGD_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ldpsgd {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the mathematical domain of an operation
// (non-finite input, dimension mismatch, invalid parameter).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid privacy-budget bookkeeping.
class AccountingError : public Error {
 public:
  using Error::Error;
};

// A recursive accumulator received updates out of order.
class SequencingError : public Error {
 public:
  using Error::Error;
};

// A query was made on a state that has not absorbed any data yet.
class UndefinedStateError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or configuration.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Wraps an error raised while processing element `index` of a stream or
// replication set.
class IndexedError : public Error {
 public:
  IndexedError(const std::string& what_kind, int64_t index,
               const std::string& message)
      : Error(what_kind + " " + std::to_string(index) + ": " + message),
        index_(index) {}

  int64_t index() const { return index_; }

 private:
  int64_t index_;
};

}  // namespace ldpsgd

#endif  // LDPSGD_ERRORS_H_
