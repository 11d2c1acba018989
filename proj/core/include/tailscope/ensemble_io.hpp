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

#include <string>

#include "tailscope/sgdsim.hpp"

namespace tailscope {

// CSV: header "x0,x1,...", one row per run, shortest round-trip floats;
// censored rows are written as "nan".
void write_ensemble_csv(const EnsembleMatrix& ensemble, const std::string& path);
EnsembleMatrix read_ensemble_csv(const std::string& path);

// Binary: "TSEM", u16 version (1), u16 reserved, u64 rows, u64 cols, then
// rows*cols little-endian f64 in row-major order.
void write_ensemble_binary(const EnsembleMatrix& ensemble,
                           const std::string& path);
EnsembleMatrix read_ensemble_binary(const std::string& path);

// Picks the reader from the first four bytes.
EnsembleMatrix read_ensemble(const std::string& path);

}  // namespace tailscope
