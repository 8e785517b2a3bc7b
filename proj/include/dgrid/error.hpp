// Copyright 2026 The dgrid Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace dgrid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Missing or inconsistent DGRID_* environment.
class InitError : public Error {
public:
  using Error::Error;
};

/// Filesystem failure; the message carries the OS error text verbatim.
class IoError : public Error {
public:
  using Error::Error;
};

/// Misuse of the messaging protocol (bad rank, duplicate in-flight message).
class ProtocolError : public Error {
public:
  using Error::Error;
};

/// A payload file that does not decode (bad magic, truncated, CRC mismatch).
class FormatError : public Error {
public:
  using Error::Error;
};

class TimeoutError : public Error {
public:
  using Error::Error;
};

/// Invalid map or distribution specification.
class MapError : public Error {
public:
  using Error::Error;
};

/// Element-wise operation between arrays with different maps.
class MapMismatchError : public Error {
public:
  using Error::Error;
};

class ShapeError : public Error {
public:
  using Error::Error;
};

class LaunchError : public Error {
public:
  using Error::Error;
};

} // namespace dgrid
