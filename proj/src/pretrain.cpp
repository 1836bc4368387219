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

#include "csmala/pretrain.hpp"

#include <cmath>
#include <stdexcept>

#include "csmala/model.hpp"
#include "csmala/rng.hpp"

namespace csmala {

Vector random_init(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    RngStream rng(derive_seed(seed, 0, substream::kInit));
    Vector theta(arch.param_count());
    const int L = arch.hidden_layers;
    long offset = 0;
    int in_dim = arch.input_dim;
    for (int l = 1; l <= L + 1; ++l) {
        const int out_dim = (l <= L) ? arch.width : 1;
        const double sd = std::sqrt(2.0 / in_dim);
        for (long k = 0; k < static_cast<long>(in_dim) * out_dim; ++k)
            theta[offset + k] = sd * rng.normal();
        offset += static_cast<long>(in_dim) * out_dim;
        for (int k = 0; k < out_dim; ++k) theta[offset + k] = 0.0;
        offset += out_dim;
        in_dim = arch.width;
    }
    if (arch.has_weight_bound())
        theta = theta.cwiseMax(-arch.weight_bound).cwiseMin(arch.weight_bound);
    return theta;
}

namespace {

struct AdamState {
    Vector m, v;
    long t = 0;
};

Vector run_pretrain(const Dataset& data, const Dataset* val, const Architecture& arch,
                    const PretrainConfig& config, std::uint64_t seed, const Vector& theta_init,
                    long stride, OptimizerTrace* trace) {
    arch.validate();
    if (data.n() == 0) throw std::invalid_argument("pretrain: empty dataset");
    if (theta_init.size() != arch.param_count())
        throw std::invalid_argument("pretrain: initializer length mismatch");

    MlpModel model(arch, data);
    MlpWorkspace val_ws;
    if (val) val_ws.resize(arch, val->n());
    RngStream batch_rng(derive_seed(seed, 0, substream::kPretrain));
    Vector theta = theta_init;
    Vector grad(theta.size());
    AdamState adam{Vector::Zero(theta.size()), Vector::Zero(theta.size()), 0};

    const double scale = 1.0 / (static_cast<double>(data.n()) * config.rho);
    for (long step = 0; step < config.steps; ++step) {
        Mask mask = Mask::bernoulli(data.n(), config.rho, batch_rng);
        double loss_sum = 0.0;
        model.masked_loss_grad(theta, mask, scale, loss_sum, grad);
        if (!std::isfinite(loss_sum) || !grad.allFinite())
            throw std::runtime_error("pretrain: diverged (non-finite loss or gradient)");

        if (config.optimizer == Optimizer::SGD) {
            theta -= config.learning_rate * grad;
        } else {
            ++adam.t;
            adam.m = config.adam_beta1 * adam.m + (1.0 - config.adam_beta1) * grad;
            adam.v = config.adam_beta2 * adam.v +
                     (1.0 - config.adam_beta2) * grad.cwiseProduct(grad);
            const double m_corr = 1.0 - std::pow(config.adam_beta1, adam.t);
            const double v_corr = 1.0 - std::pow(config.adam_beta2, adam.t);
            theta -= (config.learning_rate / m_corr) *
                     (adam.m.array() /
                      ((adam.v.array() / v_corr).sqrt() + config.adam_epsilon))
                         .matrix();
        }

        if (trace && val && ((step + 1) % stride == 0 || step + 1 == config.steps)) {
            const Vector preds = predict(arch, theta, val->xs, val_ws);
            trace->steps.push_back(step + 1);
            trace->validation_risks.push_back((val->ys - preds).squaredNorm() /
                                              static_cast<double>(val->n()));
        }
    }
    return theta;
}

}  // namespace

Vector pretrain(const Dataset& data, const Architecture& arch, const PretrainConfig& config,
                std::uint64_t seed, const Vector& theta_init) {
    return run_pretrain(data, nullptr, arch, config, seed, theta_init, 1, nullptr);
}

Vector pretrain(const Dataset& data, const Architecture& arch, const PretrainConfig& config,
                std::uint64_t seed) {
    return pretrain(data, arch, config, seed, random_init(arch, seed));
}

OptimizerTrace pretrain_with_trace(const Dataset& data, const Dataset& val,
                                   const Architecture& arch, const PretrainConfig& config,
                                   std::uint64_t seed, const Vector& theta_init, long stride) {
    OptimizerTrace trace;
    trace.final_theta =
        run_pretrain(data, &val, arch, config, seed, theta_init, stride, &trace);
    return trace;
}

}  // namespace csmala
