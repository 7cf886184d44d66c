/*
   Copyright 2026 The bhlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bhlab {

/// Base class of every error raised by the library. Carries the name of the
/// operation that failed so front ends can report it without parsing text.
class Error : public std::runtime_error {
public:
  Error(std::string operation, const std::string &message)
      : std::runtime_error(operation + ": " + message),
        operation_(std::move(operation)) {}

  const std::string &operation() const noexcept { return operation_; }

private:
  std::string operation_;
};

#define BHLAB_DEFINE_ERROR(Name)                                               \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

BHLAB_DEFINE_ERROR(InvalidArgument);
BHLAB_DEFINE_ERROR(DomainError);
BHLAB_DEFINE_ERROR(NoConvergence);
BHLAB_DEFINE_ERROR(DimensionMismatch);
BHLAB_DEFINE_ERROR(SizeGuardExceeded);
BHLAB_DEFINE_ERROR(ConvergenceFailure);
BHLAB_DEFINE_ERROR(QuadratureBudgetExceeded);
BHLAB_DEFINE_ERROR(IoError);

#undef BHLAB_DEFINE_ERROR

/// Configuration problems. `key()` names the offending configuration key.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string key, const std::string &message)
      : std::runtime_error("config key '" + key + "': " + message),
        key_(std::move(key)) {}

  const std::string &key() const noexcept { return key_; }

private:
  std::string key_;
};

} // namespace bhlab
