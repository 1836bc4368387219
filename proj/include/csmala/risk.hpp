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

#ifndef CSMALA_RISK_HPP
#define CSMALA_RISK_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "csmala/mlp.hpp"
#include "csmala/rng.hpp"

namespace csmala {

/// Bernoulli inclusion mask over the training sample.
struct Mask {
    std::vector<std::uint8_t> bits;
    long count = 0;  // |Z|

    long size() const { return static_cast<long>(bits.size()); }

    static Mask ones(long n) {
        Mask mask;
        mask.bits.assign(n, 1);
        mask.count = n;
        return mask;
    }

    /// Z_i ~ Ber(rho) i.i.d. from the given stream; rho = 1 is
    /// deterministic and consumes no randomness.
    static Mask bernoulli(long n, double rho, RngStream& rng) {
        if (rho >= 1.0) return ones(n);
        Mask mask;
        mask.bits.resize(n);
        mask.count = 0;
        for (long i = 0; i < n; ++i) {
            const bool set = rng.uniform() < rho;
            mask.bits[i] = set ? 1 : 0;
            mask.count += set;
        }
        return mask;
    }
};

/// Tuning parameters entering the risk expressions.
struct RiskParams {
    double lambda = 1.0;  // inverse temperature, > 0
    double rho = 1.0;     // batch probability, in (0, 1]
    double zeta = 0.0;    // correction weight, >= 0
};

/// psi_rho(x) = -log(e^{-x} + 1 - rho), x >= 0. psi_1(x) = x.
///
/// Branchwise stable evaluation:
///   x <= 30:  x - log1p((1-rho) e^x)
///   x  > 30:  -log(1-rho) - log1p(e^{-x} / (1-rho))
/// The naive form loses psi_1 entirely once e^{-x} underflows.
inline double psi(double rho, double x) {
    if (rho >= 1.0) return x;
    if (x <= 30.0) return x - std::log1p((1.0 - rho) * std::exp(x));
    return -std::log(1.0 - rho) - std::log1p(std::exp(-x) / (1.0 - rho));
}

/// psi_bar_rho(x) = -log(rho e^{-x/rho} + 1 - rho). psi_bar_1(x) = x.
inline double psi_bar(double rho, double x) {
    if (rho >= 1.0) return x;
    const double y = x / rho;
    if (y <= 30.0) return y - std::log(rho + (1.0 - rho) * std::exp(y));
    return -std::log(1.0 - rho) - std::log1p(rho * std::exp(-y) / (1.0 - rho));
}

/// R_n = (1/n) sum_i l_i.
inline double empirical_risk(const Vector& losses) {
    if (losses.size() == 0) throw std::invalid_argument("empirical_risk: empty dataset");
    return losses.mean();
}

inline double masked_loss_sum(const Vector& losses, const Mask& mask) {
    if (mask.size() != losses.size())
        throw std::invalid_argument("mask/loss length mismatch");
    double sum = 0.0;
    for (long i = 0; i < losses.size(); ++i)
        if (mask.bits[i]) sum += losses[i];
    return sum;
}

// Scalar combiners used in the sampler hot path, where only the
// mask-restricted loss sum is ever computed.

/// R_n(theta, Z) = (1/(n rho)) sum_i Z_i l_i.
inline double stochastic_risk_from_sum(double masked_sum, long n, double rho) {
    return masked_sum / (static_cast<double>(n) * rho);
}

/// Corrected batch risk (1/n) sum_i Z_i l_i + zeta (log rho / lambda) |Z|.
/// Note the 1/n normalization; the correction is negative for rho < 1.
inline double corrected_risk_from_sum(double masked_sum, long mask_count, long n,
                                      const RiskParams& params) {
    const double correction =
        params.zeta * (std::log(params.rho) / params.lambda) * mask_count;
    return masked_sum / static_cast<double>(n) + correction;
}

inline double stochastic_risk(const Vector& losses, const Mask& mask, double rho) {
    return stochastic_risk_from_sum(masked_loss_sum(losses, mask), losses.size(), rho);
}

inline double corrected_risk(const Vector& losses, const Mask& mask,
                             const RiskParams& params) {
    return corrected_risk_from_sum(masked_loss_sum(losses, mask), mask.count,
                                   losses.size(), params);
}

/// Surrogate risk of the uncorrected stochastic chain:
/// (1/lambda) sum_i psi_bar_rho((lambda/n) l_i). Equals R_n at rho = 1.
inline double surrogate_risk_bar(const Vector& losses, double lambda, double rho) {
    const double scale = lambda / static_cast<double>(losses.size());
    double sum = 0.0;
    for (long i = 0; i < losses.size(); ++i) sum += psi_bar(rho, scale * losses[i]);
    return sum / lambda;
}

/// Surrogate risk of the corrected chain:
/// (1/lambda) sum_i psi_rho((lambda/n) l_i). Equals R_n at rho = 1.
inline double surrogate_risk_tilde(const Vector& losses, double lambda, double rho) {
    const double scale = lambda / static_cast<double>(losses.size());
    double sum = 0.0;
    for (long i = 0; i < losses.size(); ++i) sum += psi(rho, scale * losses[i]);
    return sum / lambda;
}

}  // namespace csmala

#endif  // CSMALA_RISK_HPP
