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

#ifndef CSMALA_SAMPLER_HPP
#define CSMALA_SAMPLER_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "csmala/risk.hpp"
#include "csmala/rng.hpp"

namespace csmala {

enum class Algo { MALA, SMALA, CSMALA };

std::string algo_name(Algo algo);
Algo algo_from_name(const std::string& name);

struct ZetaPolicy {
    bool adaptive = false;
    double fixed_value = 0.0;
    long update_interval = 100;

    static ZetaPolicy fixed(double zeta) { return {false, zeta, 100}; }
    static ZetaPolicy adapt(long interval = 100) { return {true, 0.0, interval}; }
};

struct ChainConfig {
    Algo algo = Algo::CSMALA;
    double lambda = 1.0;    // inverse temperature
    double gamma = 1e-4;    // drift learning rate
    double step_sd = 0.1;   // proposal standard deviation s
    double rho = 1.0;       // batch probability
    ZetaPolicy zeta = ZetaPolicy::fixed(1.0);
    long burn_in = 1;       // b
    long gap = 1;           // c
    long draws = 1;         // N
    long restart_patience = 100;
    std::uint64_t seed = 0;
    std::uint64_t chain_index = 0;

    long total_steps() const { return burn_in + gap * draws; }

    void validate() const {
        if (lambda <= 0 || gamma <= 0 || step_sd <= 0)
            throw std::invalid_argument("ChainConfig: lambda, gamma, s must be > 0");
        if (rho <= 0 || rho > 1)
            throw std::invalid_argument("ChainConfig: rho must be in (0, 1]");
        if (burn_in < 0 || gap < 1 || draws < 1)
            throw std::invalid_argument("ChainConfig: need burn-in >= 0, gap and draws >= 1");
    }
};

struct StepDiagnostics {
    long step = 0;
    bool accepted = false;
    double log_alpha = 0.0;  // pre-truncation value; acceptance uses min(log_alpha, 0)
    long mask_count = 0;     // |Z'| of the proposal
    double risk_value = 0.0;
    bool restarted = false;
};

struct ChainResult {
    std::vector<Vector> draws;  // theta^(b+ck), k = 1..N
    Vector theta_at_burn_in;    // theta^(b)
    std::vector<StepDiagnostics> trace;
    double final_zeta = 0.0;
};

/// One MALA / sMALA / csMALA chain over a model.
///
/// The chain state lives on the joint (theta, Z) space: on rejection the
/// previous mask and its risk are kept, masks are only replaced on
/// acceptance (or restart). Acceptance arithmetic is entirely in log
/// space. Mask draws, proposal noise and accept uniforms consume from
/// disjoint substreams of (seed, chain_index), so algorithm variants
/// given identical keys share their randomness.
template <class Model>
class Chain {
public:
    Chain(Model& model, const ChainConfig& config, const Vector& theta_init)
        : model_(model), config_(config),
          mask_rng_(derive_seed(config.seed, config.chain_index, substream::kMask)),
          proposal_rng_(derive_seed(config.seed, config.chain_index, substream::kProposal)),
          accept_rng_(derive_seed(config.seed, config.chain_index, substream::kAccept)) {
        config_.validate();
        if (theta_init.size() != model_.dim())
            throw std::invalid_argument("Chain: theta_init length mismatch");
        theta_ = theta_init;
        last_accepted_theta_ = theta_init;
        zeta_ = config_.zeta.fixed_value;
        mask_ = Mask::bernoulli(model_.n(), config_.rho, mask_rng_);
        refresh_state();
    }

    const Vector& theta() const { return theta_; }
    const Mask& mask() const { return mask_; }
    const Vector& grad() const { return grad_; }
    double risk_value() const { return risk_value_; }
    double zeta() const { return zeta_; }
    long steps_since_accept() const { return steps_since_accept_; }
    long step_count() const { return step_; }

    /// theta' = theta - gamma * grad + s * w.
    Vector propose() {
        Vector proposal(model_.dim());
        for (long i = 0; i < proposal.size(); ++i)
            proposal[i] = config_.step_sd * proposal_rng_.normal();
        proposal += theta_ - config_.gamma * grad_;
        return proposal;
    }

    /// log alpha before truncation at 0 for a fully evaluated proposal.
    double log_accept_prob(const Vector& proposal_theta, double proposal_risk,
                           const Vector& proposal_grad) const {
        if (!std::isfinite(proposal_risk) || !proposal_grad.allFinite())
            return -std::numeric_limits<double>::infinity();
        const double bound = model_.param_bound();
        if (std::isfinite(bound) && proposal_theta.lpNorm<Eigen::Infinity>() > bound)
            return -std::numeric_limits<double>::infinity();
        const double forward_sq =
            (proposal_theta - theta_ + config_.gamma * grad_).squaredNorm();
        const double reverse_sq =
            (theta_ - proposal_theta + config_.gamma * proposal_grad).squaredNorm();
        const double two_s_sq = 2.0 * config_.step_sd * config_.step_sd;
        return config_.lambda * (risk_value_ - proposal_risk) +
               (forward_sq - reverse_sq) / two_s_sq;
    }

    StepDiagnostics step() {
        ++step_;
        StepDiagnostics diag;
        diag.step = step_;

        maybe_adapt_zeta();

        Mask proposal_mask = Mask::bernoulli(model_.n(), config_.rho, mask_rng_);
        const Vector proposal_theta = propose();

        double proposal_loss_sum = 0.0;
        model_.masked_loss_grad(proposal_theta, proposal_mask, grad_scale(),
                                proposal_loss_sum, proposal_grad_buffer_);
        const double proposal_risk =
            acceptance_risk(proposal_theta, proposal_loss_sum, proposal_mask);

        diag.log_alpha = log_accept_prob(proposal_theta, proposal_risk, proposal_grad_buffer_);
        diag.mask_count = proposal_mask.count;

        const double log_u = std::log(accept_rng_.uniform());
        if (log_u <= std::min(diag.log_alpha, 0.0)) {
            theta_ = proposal_theta;
            mask_ = std::move(proposal_mask);
            risk_value_ = proposal_risk;
            grad_.swap(proposal_grad_buffer_);
            masked_loss_sum_ = proposal_loss_sum;
            last_accepted_theta_ = theta_;
            steps_since_accept_ = 0;
            diag.accepted = true;
        } else {
            ++steps_since_accept_;
        }

        if (steps_since_accept_ >= config_.restart_patience) {
            // Chains can get stuck after accepting an outlier batch; restart
            // from the last accepted parameters with a fresh mask. The
            // global step budget is unaffected.
            theta_ = last_accepted_theta_;
            mask_ = Mask::bernoulli(model_.n(), config_.rho, mask_rng_);
            refresh_state();
            steps_since_accept_ = 0;
            diag.restarted = true;
        }

        diag.risk_value = risk_value_;
        return diag;
    }

    /// zeta <- lambda * Rhat / (n |log rho|) with Rhat the full-sample
    /// mean loss; inactive at rho = 1.
    void adapt_zeta() {
        if (config_.rho >= 1.0) return;
        // Balance the per-sample correction zeta*|log rho| against the
        // per-sample acceptance cost (lambda/n)*mean loss, so accepted batch
        // sizes stay unbiased around n*rho. The full-sample mean is used
        // because the stationary mask under-represents high-loss samples,
        // which would leave zeta systematically low.
        const double mean_loss = model_.full_loss_sum(theta_) / static_cast<double>(model_.n());
        zeta_ = std::max(0.0, config_.lambda * mean_loss /
                                  (static_cast<double>(model_.n()) *
                                   std::abs(std::log(config_.rho))));
        risk_value_ = current_risk();
    }

private:
    double grad_scale() const {
        return 1.0 / (static_cast<double>(model_.n()) * config_.rho);
    }

    double acceptance_risk(const Vector& theta, double masked_sum, const Mask& mask) {
        switch (config_.algo) {
            case Algo::MALA:
                // MH risk on the full sample; only the drift is stochastic.
                return model_.full_loss_sum(theta) / static_cast<double>(model_.n());
            case Algo::SMALA:
                return stochastic_risk_from_sum(masked_sum, model_.n(), config_.rho);
            case Algo::CSMALA:
                return corrected_risk_from_sum(masked_sum, mask.count, model_.n(),
                                               {config_.lambda, config_.rho, zeta_});
        }
        return 0.0;
    }

    double current_risk() {
        switch (config_.algo) {
            case Algo::MALA:
                return model_.full_loss_sum(theta_) / static_cast<double>(model_.n());
            case Algo::SMALA:
                return stochastic_risk_from_sum(masked_loss_sum_, model_.n(), config_.rho);
            case Algo::CSMALA:
                return corrected_risk_from_sum(masked_loss_sum_, mask_.count, model_.n(),
                                               {config_.lambda, config_.rho, zeta_});
        }
        return 0.0;
    }

    void refresh_state() {
        model_.masked_loss_grad(theta_, mask_, grad_scale(), masked_loss_sum_, grad_);
        risk_value_ = current_risk();
    }

    void maybe_adapt_zeta() {
        if (config_.algo != Algo::CSMALA || !config_.zeta.adaptive) return;
        if ((step_ - 1) % config_.zeta.update_interval != 0) return;
        adapt_zeta();
    }

    Model& model_;
    ChainConfig config_;
    RngStream mask_rng_, proposal_rng_, accept_rng_;

    Vector theta_;
    Mask mask_;
    double risk_value_ = 0.0;
    Vector grad_;
    double masked_loss_sum_ = 0.0;
    double zeta_ = 0.0;
    long step_ = 0;
    long steps_since_accept_ = 0;
    Vector last_accepted_theta_;
    Vector proposal_grad_buffer_;
};

/// Run b + cN steps and retain theta^(b) plus theta^(b+ck), k = 1..N.
/// Bit-reproducible given (config, model data, theta_init).
template <class Model>
ChainResult run_chain(Model& model, const ChainConfig& config, const Vector& theta_init) {
    Chain<Model> chain(model, config, theta_init);
    ChainResult result;
    result.trace.reserve(config.total_steps());
    result.draws.reserve(config.draws);
    if (config.burn_in == 0) result.theta_at_burn_in = theta_init;
    for (long k = 1; k <= config.total_steps(); ++k) {
        result.trace.push_back(chain.step());
        if (k == config.burn_in) result.theta_at_burn_in = chain.theta();
        if (k > config.burn_in && (k - config.burn_in) % config.gap == 0)
            result.draws.push_back(chain.theta());
    }
    result.final_zeta = chain.zeta();
    return result;
}

/// Per-step trace CSV: {step, accepted, log_alpha, mask_count, risk_value, restarted}.
void write_trace_csv(const std::vector<StepDiagnostics>& trace, const std::string& path);
std::vector<StepDiagnostics> read_trace_csv(const std::string& path);

}  // namespace csmala

#endif  // CSMALA_SAMPLER_HPP
