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

#ifndef CSMALA_POSTERIOR_HPP
#define CSMALA_POSTERIOR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "csmala/data.hpp"
#include "csmala/mlp.hpp"

namespace csmala {

/// Retained posterior draws of one chain.
struct SampleSet {
    std::vector<Vector> draws;
    Architecture arch;
    std::uint64_t config_fingerprint = 0;
};

/// Empirical credible ball around the posterior mean.
struct CredibleReport {
    double radius = 0.0;           // tau_{alpha,n}
    Vector draw_distances;         // h_k, k = 1..N
    double alpha = 0.0;
};

/// Pointwise average of the draws' predictions: fbar(x) = (1/N) sum_k f_{theta_k}(x).
/// The posterior mean lives in prediction space; averaging parameters is
/// meaningless under the network's symmetries.
Vector posterior_mean_predict(const SampleSet& samples, const Eigen::Ref<const Matrix>& xs);

/// Mean squared residual of cached predictions on a validation set.
double validation_risk(const Eigen::Ref<const Vector>& predictions, const Dataset& val);

/// h_k = (1/n_val) sum_i |f_{theta_k}(X_i) - fbar(X_i)|^2; the radius is
/// the nearest-rank (type-1) upper empirical (1-alpha)-quantile of the
/// h_k. With N = 20 and alpha = 0.005 this is max_k h_k.
CredibleReport credible_radius(const SampleSet& samples, const Dataset& val, double alpha);

/// Nearest-rank upper quantile of a sample (exposed for reuse/tests).
double nearest_rank_quantile(Vector values, double level);

/// Fraction of chains whose posterior mean lies within its own credible
/// radius of the true regression function:
/// (1/n_val) sum_i |fbar(X_i) - f(X_i)|^2 <= tau_{alpha,n}.
struct ChainSummary {
    Vector mean_predictions;  // fbar on the validation inputs
    CredibleReport report;
};
double coverage(const std::vector<ChainSummary>& chains,
                const Eigen::Ref<const Vector>& f_true_on_val);

/// JSON serialization of a CredibleReport.
void save_report(const CredibleReport& report, const std::string& path);
CredibleReport load_report(const std::string& path);

}  // namespace csmala

#endif  // CSMALA_POSTERIOR_HPP
