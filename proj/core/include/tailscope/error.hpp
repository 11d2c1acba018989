// Copyright 2026 The tailscope Authors
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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tailscope {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidGrid,
  kSingularParameter,
  kNonReturn,
  kDomain,
  kDivergence,
  kRefusal,
  kRootAboveCap,
  kSize,
  kDegenerate,
  kConfig,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Error(ErrorCode code, const std::string& what, double at)
      : std::runtime_error(what), code_(code), at_(at) {}

  ErrorCode code() const noexcept { return code_; }
  // Parameter value that triggered the error, when one applies (e.g. the
  // moment order s at which a Markov kernel diverges).
  std::optional<double> at() const noexcept { return at_; }

 private:
  ErrorCode code_;
  std::optional<double> at_;
};

}  // namespace tailscope
