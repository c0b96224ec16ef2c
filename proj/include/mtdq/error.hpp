// Copyright 2026 The mtdq Authors. All Rights Reserved.
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
#include <string_view>

namespace mtdq {

/// Machine-readable failure categories. Every thrown mtdq::Error carries one.
enum class ErrorCode {
  invalid_argument,
  quadrature,
  sampler,
  precondition,
  search_cap,
  infeasible_rate,
  enumeration_cap,
  config,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::quadrature: return "quadrature";
    case ErrorCode::sampler: return "sampler";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::search_cap: return "search_cap";
    case ErrorCode::infeasible_rate: return "infeasible_rate";
    case ErrorCode::enumeration_cap: return "enumeration_cap";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace mtdq
