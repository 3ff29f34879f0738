// Copyright 2026 The Authors.
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

#ifndef MOSAIC_ERRORS_H_
#define MOSAIC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mosaic {

// Root of every error thrown by the library. The CLI maps any of these to a
// nonzero exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Masked update requested with an all-zero mask (rescale d/|M| undefined).
class UndefinedRescaleError : public Error {
 public:
  using Error::Error;
};

class CorruptMaskError : public Error {
 public:
  using Error::Error;
};

class VocabularyError : public Error {
 public:
  using Error::Error;
};

class AugmentationError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

// Malformed or missing message in the silo/server exchange.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Raised by the byte readers on truncated input or bad magic.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace mosaic

#endif  // MOSAIC_ERRORS_H_
