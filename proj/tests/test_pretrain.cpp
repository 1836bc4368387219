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

#include <cmath>

#include "csmala/pretrain.hpp"
#include "doctest.h"

using namespace csmala;

namespace {

double training_risk(const Dataset& data, const Architecture& arch, const Vector& theta) {
    MlpWorkspace ws(arch, data.n());
    return loss_vector(arch, theta, data.xs, data.ys, ws).mean();
}

}  // namespace

TEST_CASE("random initialization is reproducible and in-bounds") {
    Architecture arch{1, 2, 8, 2.0};
    const Vector a = random_init(arch, 7);
    const Vector b = random_init(arch, 7);
    CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(a.lpNorm<Eigen::Infinity>() <= 2.0);
    const Vector c = random_init(arch, 8);
    CHECK((a - c).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("zero steps or zero learning rate are no-ops") {
    const Dataset data = generate(200, 0.02, 4);
    Architecture arch{1, 1, 4};
    const Vector theta0 = random_init(arch, 4);

    PretrainConfig config;
    config.steps = 0;
    CHECK((pretrain(data, arch, config, 4, theta0) - theta0).lpNorm<Eigen::Infinity>() == 0.0);

    config.steps = 50;
    config.learning_rate = 0.0;
    config.optimizer = Optimizer::SGD;
    CHECK((pretrain(data, arch, config, 4, theta0) - theta0).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("sgd reduces the training risk across seeds") {
    Architecture arch{1, 2, 8};
    PretrainConfig config;
    config.steps = 2000;
    config.learning_rate = 1e-3;
    config.optimizer = Optimizer::SGD;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Dataset data = generate(500, 0.02, seed);
        const Vector theta0 = random_init(arch, seed);
        const Vector trained = pretrain(data, arch, config, seed, theta0);
        CHECK(training_risk(data, arch, trained) < training_risk(data, arch, theta0));
    }
}

TEST_CASE("adam with minibatches also learns") {
    Architecture arch{1, 2, 8};
    PretrainConfig config;
    config.steps = 1500;
    config.learning_rate = 1e-3;
    config.optimizer = Optimizer::ADAM;
    config.rho = 0.3;
    const Dataset data = generate(500, 0.02, 9);
    const Vector theta0 = random_init(arch, 9);
    const Vector trained = pretrain(data, arch, config, 9, theta0);
    CHECK(training_risk(data, arch, trained) < 0.5 * training_risk(data, arch, theta0));
}

TEST_CASE("pretraining is deterministic") {
    Architecture arch{1, 1, 6};
    PretrainConfig config;
    config.steps = 300;
    config.rho = 0.5;
    const Dataset data = generate(300, 0.02, 2);
    const Vector a = pretrain(data, arch, config, 2);
    const Vector b = pretrain(data, arch, config, 2);
    CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("trace records a strided validation curve") {
    Architecture arch{1, 1, 6};
    PretrainConfig config;
    config.steps = 200;
    config.optimizer = Optimizer::ADAM;
    const Dataset train = generate(300, 0.02, 5);
    const Dataset val = generate(300, 0.02, 6);
    const OptimizerTrace trace =
        pretrain_with_trace(train, val, arch, config, 5, random_init(arch, 5), 50);
    REQUIRE(trace.steps.size() == 4);
    CHECK(trace.steps.front() == 50);
    CHECK(trace.steps.back() == 200);
    for (double risk : trace.validation_risks) CHECK(std::isfinite(risk));
    CHECK(trace.validation_risks.back() < trace.validation_risks.front());
}
