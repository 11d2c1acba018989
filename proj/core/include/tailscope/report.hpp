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
#include <string>
#include <string_view>
#include <vector>

namespace tailscope {

inline constexpr std::string_view kCsvHeader =
    "schedule,value,route,alpha,stderr,rho,c_value,censored,runtime_ms";

// One (schedule, swept value, route) result. A refused row has no alpha and
// carries its reason code in the stderr cell.
struct ResultRow {
  std::string schedule;
  double value = 0.0;
  std::string route;
  std::optional<double> alpha;
  double std_error = 0.0;
  std::string refusal;
  std::optional<double> rho;
  std::optional<double> c_value;
  int censored = 0;
  std::optional<double> runtime_ms;
};

std::string format_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(std::string_view text);

// Line chart of alpha against value, one series per (schedule, route).
// Depends only on the CSV content.
std::string svg_from_csv(std::string_view csv_text,
                         std::string_view x_label = "value");

void write_text_file(const std::string& path, std::string_view text);

}  // namespace tailscope
