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

#ifndef CSMALA_PRETRAIN_HPP
#define CSMALA_PRETRAIN_HPP

#include <cstdint>

#include "csmala/data.hpp"
#include "csmala/mlp.hpp"

namespace csmala {

enum class Optimizer { SGD, ADAM };

struct PretrainConfig {
    long steps = 2000;
    double learning_rate = 1e-3;
    Optimizer optimizer = Optimizer::SGD;
    double rho = 1.0;  // Bernoulli batch probability, shared with the chains
    // Adam moment decays and epsilon pinned to the conventional defaults.
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
};

/// He-style random initialization of a parameter vector.
Vector random_init(const Architecture& arch, std::uint64_t seed);

/// Minibatch gradient descent on the empirical risk with Bernoulli(rho)
/// batches; gradients are normalized by 1/(n rho). Returns the trained
/// parameters. Throws on non-finite loss.
Vector pretrain(const Dataset& data, const Architecture& arch, const PretrainConfig& config,
                std::uint64_t seed, const Vector& theta_init);

/// Convenience overload drawing the initializer from (seed, init substream).
Vector pretrain(const Dataset& data, const Architecture& arch, const PretrainConfig& config,
                std::uint64_t seed);

/// Adam trajectory's per-step validation risk, for baseline curves.
/// Evaluated every `stride` steps on the validation set.
struct OptimizerTrace {
    std::vector<long> steps;
    std::vector<double> validation_risks;
    Vector final_theta;
};
OptimizerTrace pretrain_with_trace(const Dataset& data, const Dataset& val,
                                   const Architecture& arch, const PretrainConfig& config,
                                   std::uint64_t seed, const Vector& theta_init, long stride);

}  // namespace csmala

#endif  // CSMALA_PRETRAIN_HPP
