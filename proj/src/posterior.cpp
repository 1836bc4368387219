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

#include "csmala/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace csmala {

Vector posterior_mean_predict(const SampleSet& samples, const Eigen::Ref<const Matrix>& xs) {
    if (samples.draws.empty())
        throw std::invalid_argument("posterior_mean_predict: empty draw set");
    MlpWorkspace ws(samples.arch, xs.cols());
    Vector mean = Vector::Zero(xs.cols());
    for (const Vector& draw : samples.draws)
        mean += predict(samples.arch, draw, xs, ws);
    return mean / static_cast<double>(samples.draws.size());
}

double validation_risk(const Eigen::Ref<const Vector>& predictions, const Dataset& val) {
    if (predictions.size() != val.n())
        throw std::invalid_argument("validation_risk: length mismatch");
    if (val.n() == 0) throw std::invalid_argument("validation_risk: empty validation set");
    return (val.ys - predictions).squaredNorm() / static_cast<double>(val.n());
}

double nearest_rank_quantile(Vector values, double level) {
    if (values.size() == 0) throw std::invalid_argument("quantile of empty sample");
    if (level <= 0.0 || level > 1.0) throw std::invalid_argument("quantile level out of range");
    std::sort(values.data(), values.data() + values.size());
    const long rank = static_cast<long>(std::ceil(level * values.size()));
    return values[std::clamp(rank, 1L, values.size()) - 1];
}

CredibleReport credible_radius(const SampleSet& samples, const Dataset& val, double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0)
        throw std::invalid_argument("credible_radius: alpha must be in (0, 1)");
    if (val.n() == 0) throw std::invalid_argument("credible_radius: empty validation set");
    const Vector mean = posterior_mean_predict(samples, val.xs);
    MlpWorkspace ws(samples.arch, val.n());
    CredibleReport report;
    report.alpha = alpha;
    report.draw_distances.resize(samples.draws.size());
    for (std::size_t k = 0; k < samples.draws.size(); ++k) {
        const Vector preds = predict(samples.arch, samples.draws[k], val.xs, ws);
        report.draw_distances[k] = (preds - mean).squaredNorm() / static_cast<double>(val.n());
    }
    report.radius = nearest_rank_quantile(report.draw_distances, 1.0 - alpha);
    return report;
}

double coverage(const std::vector<ChainSummary>& chains,
                const Eigen::Ref<const Vector>& f_true_on_val) {
    if (chains.empty()) throw std::invalid_argument("coverage: need at least one chain");
    long hits = 0;
    for (const ChainSummary& chain : chains) {
        const double distance = (chain.mean_predictions - f_true_on_val).squaredNorm() /
                                static_cast<double>(f_true_on_val.size());
        if (distance <= chain.report.radius) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(chains.size());
}

void save_report(const CredibleReport& report, const std::string& path) {
    nlohmann::json doc;
    doc["alpha"] = report.alpha;
    doc["radius"] = report.radius;
    doc["draw_distances"] = std::vector<double>(
        report.draw_distances.data(), report.draw_distances.data() + report.draw_distances.size());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(2) << '\n';
}

CredibleReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    nlohmann::json doc;
    in >> doc;
    CredibleReport report;
    report.alpha = doc.at("alpha").get<double>();
    report.radius = doc.at("radius").get<double>();
    const auto distances = doc.at("draw_distances").get<std::vector<double>>();
    report.draw_distances =
        Eigen::Map<const Vector>(distances.data(), static_cast<long>(distances.size()));
    return report;
}

}  // namespace csmala
