/*
 * Copyright 2026 The sttsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace sttsim {

/// Root of every error thrown by the simulator. The CLI maps ConfigError to
/// exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class InvalidFit : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidLayer : public Error {
 public:
  using Error::Error;
};

class NotAGemm : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration. Carries the 1-based source line
/// when the problem can be tied to one (0 otherwise).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string source = {}, int line = 0)
      : Error(format(what, source, line)), source_(std::move(source)), line_(line) {}

  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  static std::string format(const std::string& what, const std::string& source, int line) {
    std::string prefix;
    if (!source.empty()) prefix = source;
    if (line > 0) prefix += (prefix.empty() ? "line " : ":") + std::to_string(line);
    return prefix.empty() ? what : prefix + ": " + what;
  }

  std::string source_;
  int line_;
};

}  // namespace sttsim
