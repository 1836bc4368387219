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

#ifndef CSMALA_EXPERIMENT_HPP
#define CSMALA_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csmala/data.hpp"
#include "csmala/posterior.hpp"
#include "csmala/pretrain.hpp"
#include "csmala/sampler.hpp"

namespace csmala {

/// Fleet description for the regression study. Every (algorithm, rho)
/// cell resolves to a complete ChainConfig through the standard preset
/// map unless overridden.
struct ExperimentPlan {
    long n = 10000;
    long n_val = 10000;
    double noise_sd = 0.02;
    Architecture arch{1, 2, 100};
    std::vector<Algo> algorithms{Algo::MALA, Algo::SMALA, Algo::CSMALA};
    std::vector<double> rhos{0.1, 0.3, 0.5};
    int chains_per_cell = 10;
    double credible_alpha = 0.005;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    bool desk_scale = false;
    long validation_stride = 50;  // steps between recorded validation risks
    int threads = 0;              // 0 = auto (CSMALA_THREADS or hardware)

    // Optional schedule overrides applied after the presets.
    std::optional<long> burn_in_override;
    std::optional<long> gap_override;
    std::optional<long> draws_override;

    /// Desk-scale variant: n = 2000, r = 32, burn-in and gap divided by 10.
    static ExperimentPlan desk(std::uint64_t seed, const std::string& out_dir);
};

/// Standard hyperparameter presets per algorithm at batch probability rho:
///   lambda = n (MALA), n rho (sMALA), n (2 - rho) (csMALA)
///   gamma  = 1e-4 (1e-4 / rho for csMALA)
///   s      = 0.2 / sqrt(P)
///   b      = 100000 / rho truncated (50000 at rho = 0.1), c = 5000, N = 20
/// csMALA adapts zeta every 100 steps. Desk scale divides b and c by 10.
ChainConfig resolve_config(const ExperimentPlan& plan, Algo algo, double rho);

/// Summary of one completed cell.
struct CellResult {
    Algo algo;
    double rho;
    double acceptance_rate = 0.0;  // over all chains
    std::vector<double> chain_mean_risks;  // validation risk of each chain's posterior mean
    std::vector<double> chain_radii;
    double coverage = 0.0;
    bool failed = false;
    std::string error;
};

struct RunReport {
    std::vector<CellResult> cells;
};

/// Execute all (algorithm, rho) cells: pretrain per rho, run the chain
/// fleet (parallel over chains), persist every trace, then rebuild the
/// plot-ready exports. Per-cell failures quarantine the cell.
RunReport run_experiment(const ExperimentPlan& plan);

/// Sampling phase only: persists datasets, pretrained initializers,
/// per-chain traces / validation-risk traces / retained draws.
void run_sampling(const ExperimentPlan& plan);

/// Report phase: a pure function of the persisted artifacts. Re-running
/// it reproduces byte-identical export files.
RunReport build_reports(const ExperimentPlan& plan);

/// Fixed-average-batch scaling study: for each n, rho = fixed_batch / n.
struct ScalingPoint {
    long n;
    double rho;
    Algo algo;
    double risk_mean;
    double risk_sd;
};
std::vector<ScalingPoint> run_scaling(const ExperimentPlan& base, const std::vector<long>& n_list,
                                      long fixed_batch);

/// Toy-model KL sweep verifying both divergence bounds; writes
/// toy_kl.json and reports the number of violated inequalities.
struct ToyKlCell {
    double lambda;
    double rho;
    std::uint64_t seed;
    double kl_bar_gibbs;
    double bound1a;
    double kl_bar_varpi;
    double bound1b;
    double kl_tilde_gibbs_reduced;
    double bound2;
    bool ok() const {
        return kl_bar_gibbs <= bound1a && kl_bar_varpi <= bound1b &&
               kl_tilde_gibbs_reduced <= bound2;
    }
};
struct ToyKlSweep {
    long n = 10;
    std::vector<double> lambda_over_n{0.25, 0.5, 1.0};
    std::vector<double> rhos{0.1, 0.5, 0.9};
    int seeds = 20;
    std::uint64_t master_seed = 7;
    long grid_size = 4001;
};
std::vector<ToyKlCell> run_toy_kl(const ToyKlSweep& sweep, const std::string& out_path);

/// Draw n toy responses Y_i ~ N(0, 0.5) (variance one half).
Vector toy_responses(long n, std::uint64_t seed);

/// Centered moving average with window truncated at the boundaries;
/// window 1 reproduces the input.
std::vector<double> moving_average(const std::vector<double>& values, long window);

/// Worker-count resolution: explicit > CSMALA_THREADS > hardware.
int resolve_threads(int requested);

}  // namespace csmala

#endif  // CSMALA_EXPERIMENT_HPP
