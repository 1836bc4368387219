// Copyright 2026 The csmala Authors
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

#ifndef CSMALA_DATA_HPP
#define CSMALA_DATA_HPP

#include <cstdint>
#include <string>

#include "csmala/mlp.hpp"

namespace csmala {

/// Malformed or truncated on-disk artifact (as opposed to plain I/O failure).
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Synthetic regression sample. Inputs are stored p x n (one column per
/// observation) to match the batched network evaluation.
struct Dataset {
    Matrix xs;  // p x n
    Vector ys;  // n
    std::uint64_t seed = 0;
    double noise_sd = 0.0;
    std::string generator = "sect5-piecewise";

    long n() const { return ys.size(); }
};

/// Piecewise ground-truth regression function:
///   1.5 (x + 0.5)^2          for x < 0
///   0.3 sin(10 x - 2) + 0.5  for x >= 0
double true_f(double x);

/// Draw n points with X uniform on [-0.8, -0.2] u [0.2, 0.8] (equal mass
/// on both intervals, no rejection) and Y = f(X) + N(0, noise_sd^2).
/// Pure function of (n, noise_sd, seed).
Dataset generate(long n, double noise_sd, std::uint64_t seed);

/// CSV {x, y} plus a JSON sidecar (path + ".json") carrying the metadata.
/// Round-trips the float payload bit-exactly.
void save(const Dataset& data, const std::string& path);
Dataset load(const std::string& path);

}  // namespace csmala

#endif  // CSMALA_DATA_HPP
