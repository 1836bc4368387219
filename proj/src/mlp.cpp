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

#include "csmala/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace csmala {

namespace {

struct LayerDims {
    long offset;
    int in_dim;
    int out_dim;
};

LayerDims layer_dims(const Architecture& arch, int layer) {
    const int p = arch.input_dim, r = arch.width;
    long offset = 0;
    int in_dim = p, out_dim = r;
    for (int l = 1; l < layer; ++l) {
        offset += static_cast<long>(in_dim) * out_dim + out_dim;
        in_dim = r;
        out_dim = (l + 1 <= arch.hidden_layers) ? r : 1;
    }
    if (layer == arch.hidden_layers + 1) out_dim = 1;
    return {offset, in_dim, out_dim};
}

void check_theta(const Architecture& arch, const Vector& theta) {
    if (theta.size() != arch.param_count())
        throw std::invalid_argument("parameter vector length does not match architecture");
}

}  // namespace

void forward_batch(const Architecture& arch, const Vector& theta,
                   const Eigen::Ref<const Matrix>& inputs, MlpWorkspace& ws) {
    check_theta(arch, theta);
    if (inputs.rows() != arch.input_dim)
        throw std::invalid_argument("input dimension mismatch");
    const long m = inputs.cols();
    if (m > ws.capacity() || static_cast<long>(ws.activations_.size()) != arch.hidden_layers + 1)
        ws.resize(arch, std::max(m, ws.capacity()));

    ws.activations_[0].leftCols(m) = inputs;
    for (int l = 1; l <= arch.hidden_layers; ++l) {
        const auto [offset, in_dim, out_dim] = layer_dims(arch, l);
        Eigen::Map<const Matrix> weight_t(theta.data() + offset, in_dim, out_dim);
        Eigen::Map<const Vector> bias(theta.data() + offset + static_cast<long>(in_dim) * out_dim,
                                      out_dim);
        ws.activations_[l].leftCols(m).noalias() =
            weight_t.transpose() * ws.activations_[l - 1].leftCols(m);
        ws.activations_[l].leftCols(m).colwise() += bias;
        ws.activations_[l].leftCols(m) = ws.activations_[l].leftCols(m).cwiseMax(0.0);
    }
    const auto [offset, in_dim, out_dim] = layer_dims(arch, arch.hidden_layers + 1);
    Eigen::Map<const Matrix> weight_t(theta.data() + offset, in_dim, out_dim);
    const double out_bias = theta[offset + in_dim];
    ws.raw_.head(m).noalias() =
        ws.activations_[arch.hidden_layers].leftCols(m).transpose() * weight_t.col(0);
    ws.raw_.head(m).array() += out_bias;
}

Prediction forward(const Architecture& arch, const Vector& theta,
                   const Eigen::Ref<const Vector>& x) {
    MlpWorkspace ws(arch, 1);
    forward_batch(arch, theta, x, ws);
    Prediction pred;
    pred.raw = ws.raw_[0];
    pred.clipped = arch.has_output_clip()
                       ? std::clamp(pred.raw, -arch.output_clip, arch.output_clip)
                       : pred.raw;
    return pred;
}

double loss(const Architecture& arch, const Vector& theta,
            const Eigen::Ref<const Vector>& x, double y) {
    const double residual = y - forward(arch, theta, x).clipped;
    return residual * residual;
}

Vector grad_loss(const Architecture& arch, const Vector& theta,
                 const Eigen::Ref<const Vector>& x, double y) {
    MlpWorkspace ws(arch, 1);
    Vector grad = Vector::Zero(theta.size());
    double loss_sum = 0.0;
    Vector target(1);
    target[0] = y;
    batch_loss_grad(arch, theta, x, target, 1.0, ws, loss_sum, grad);
    return grad;
}

void batch_loss_grad(const Architecture& arch, const Vector& theta,
                     const Eigen::Ref<const Matrix>& inputs,
                     const Eigen::Ref<const Vector>& targets, double scale,
                     MlpWorkspace& ws, double& loss_sum, Vector& grad_sum) {
    const long m = inputs.cols();
    if (targets.size() != m) throw std::invalid_argument("targets/inputs length mismatch");
    forward_batch(arch, theta, inputs, ws);
    if (grad_sum.size() != theta.size()) grad_sum = Vector::Zero(theta.size());
    grad_sum.setZero();
    if (m == 0) {
        loss_sum = 0.0;
        return;
    }

    const int L = arch.hidden_layers;
    const bool clip = arch.has_output_clip();
    const double C = arch.output_clip;

    // residual chain: dloss/draw_j = -2 (y_j - f_j) * 1{|raw_j| < C}
    Eigen::RowVectorXd dldraw(m);
    loss_sum = 0.0;
    for (long j = 0; j < m; ++j) {
        const double raw = ws.raw_[j];
        const double fitted = clip ? std::clamp(raw, -C, C) : raw;
        const double residual = targets[j] - fitted;
        loss_sum += residual * residual;
        const bool active = !clip || std::abs(raw) < C;
        dldraw[j] = active ? -2.0 * residual : 0.0;
    }

    {   // output layer
        const auto [offset, in_dim, out_dim] = layer_dims(arch, L + 1);
        Eigen::Map<Matrix> gw(grad_sum.data() + offset, in_dim, out_dim);
        gw.col(0).noalias() = ws.activations_[L].leftCols(m) * dldraw.transpose();
        grad_sum[offset + in_dim] = dldraw.sum();
        Eigen::Map<const Matrix> weight_t(theta.data() + offset, in_dim, out_dim);
        ws.deltas_[L].leftCols(m).noalias() = weight_t.col(0) * dldraw;
    }
    for (int l = L; l >= 1; --l) {
        // ReLU: pass gradient only where the activation is strictly positive.
        ws.deltas_[l].leftCols(m) =
            (ws.activations_[l].leftCols(m).array() > 0.0)
                .select(ws.deltas_[l].leftCols(m), 0.0);
        const auto [offset, in_dim, out_dim] = layer_dims(arch, l);
        Eigen::Map<Matrix> gw(grad_sum.data() + offset, in_dim, out_dim);
        gw.noalias() = ws.activations_[l - 1].leftCols(m) * ws.deltas_[l].leftCols(m).transpose();
        Eigen::Map<Vector> gb(grad_sum.data() + offset + static_cast<long>(in_dim) * out_dim,
                              out_dim);
        gb.noalias() = ws.deltas_[l].leftCols(m).rowwise().sum();
        if (l > 1) {
            Eigen::Map<const Matrix> weight_t(theta.data() + offset, in_dim, out_dim);
            ws.deltas_[l - 1].leftCols(m).noalias() = weight_t * ws.deltas_[l].leftCols(m);
        }
    }
    if (scale != 1.0) grad_sum *= scale;
}

Vector loss_vector(const Architecture& arch, const Vector& theta,
                   const Eigen::Ref<const Matrix>& inputs,
                   const Eigen::Ref<const Vector>& targets, MlpWorkspace& ws) {
    const long m = inputs.cols();
    if (targets.size() != m) throw std::invalid_argument("targets/inputs length mismatch");
    forward_batch(arch, theta, inputs, ws);
    Vector losses(m);
    const bool clip = arch.has_output_clip();
    const double C = arch.output_clip;
    for (long j = 0; j < m; ++j) {
        const double fitted = clip ? std::clamp(ws.raw_[j], -C, C) : ws.raw_[j];
        const double residual = targets[j] - fitted;
        losses[j] = residual * residual;
    }
    return losses;
}

Vector predict(const Architecture& arch, const Vector& theta,
               const Eigen::Ref<const Matrix>& inputs, MlpWorkspace& ws) {
    const long m = inputs.cols();
    forward_batch(arch, theta, inputs, ws);
    Vector out = ws.raw_.head(m);
    if (arch.has_output_clip())
        out = out.cwiseMax(-arch.output_clip).cwiseMin(arch.output_clip);
    return out;
}

double lipschitz_bound(const Architecture& arch, const Eigen::Ref<const Vector>& x) {
    if (!arch.has_weight_bound())
        throw std::invalid_argument("lipschitz_bound requires a finite weight bound");
    const double base = 2.0 * arch.width * arch.weight_bound;
    return 4.0 * std::pow(base, arch.hidden_layers) * std::max(x.lpNorm<1>(), 1.0);
}

double credible_scale(const Architecture& arch) {
    if (!arch.has_weight_bound())
        throw std::invalid_argument("credible_scale requires a finite weight bound");
    return std::pow(2.0 * arch.width * arch.weight_bound, arch.hidden_layers);
}

namespace {

nlohmann::json arch_header(const Architecture& arch) {
    nlohmann::json header;
    header["p"] = arch.input_dim;
    header["L"] = arch.hidden_layers;
    header["r"] = arch.width;
    header["B"] = arch.has_weight_bound() ? nlohmann::json(arch.weight_bound)
                                          : nlohmann::json(nullptr);
    header["C"] = arch.has_output_clip() ? nlohmann::json(arch.output_clip)
                                         : nlohmann::json(nullptr);
    header["P"] = arch.param_count();
    return header;
}

Architecture arch_from_header(const nlohmann::json& header) {
    Architecture arch;
    arch.input_dim = header.at("p").get<int>();
    arch.hidden_layers = header.at("L").get<int>();
    arch.width = header.at("r").get<int>();
    if (!header.at("B").is_null()) arch.weight_bound = header.at("B").get<double>();
    if (!header.at("C").is_null()) arch.output_clip = header.at("C").get<double>();
    arch.validate();
    if (header.at("P").get<long>() != arch.param_count())
        throw std::runtime_error("parameter file header: inconsistent P");
    return arch;
}

void write_header_and_payload(const nlohmann::json& header,
                              const std::vector<const Vector*>& draws,
                              const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const std::string text = header.dump();
    out << text << '\n';
    for (const Vector* draw : draws)
        out.write(reinterpret_cast<const char*>(draw->data()),
                  static_cast<std::streamsize>(draw->size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::pair<Architecture, std::vector<Vector>> read_param_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("parameter file: missing header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
        throw std::runtime_error("parameter file: malformed header");
    }
    const Architecture arch = arch_from_header(header);
    const long P = arch.param_count();
    const long count = header.value("N", 1L);
    std::vector<Vector> draws;
    draws.reserve(count);
    for (long k = 0; k < count; ++k) {
        Vector theta(P);
        in.read(reinterpret_cast<char*>(theta.data()),
                static_cast<std::streamsize>(P * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(P * sizeof(double)))
            throw std::runtime_error("parameter file: truncated payload");
        draws.push_back(std::move(theta));
    }
    return {arch, std::move(draws)};
}

}  // namespace

void save_params(const Architecture& arch, const Vector& theta, const std::string& path) {
    check_theta(arch, theta);
    write_header_and_payload(arch_header(arch), {&theta}, path);
}

std::pair<Architecture, Vector> load_params(const std::string& path) {
    auto [arch, draws] = read_param_file(path);
    return {arch, std::move(draws.front())};
}

void save_param_set(const Architecture& arch, const std::vector<Vector>& draws,
                    const std::string& path) {
    nlohmann::json header = arch_header(arch);
    header["N"] = draws.size();
    std::vector<const Vector*> ptrs;
    ptrs.reserve(draws.size());
    for (const Vector& draw : draws) {
        check_theta(arch, draw);
        ptrs.push_back(&draw);
    }
    write_header_and_payload(header, ptrs, path);
}

std::pair<Architecture, std::vector<Vector>> load_param_set(const std::string& path) {
    return read_param_file(path);
}

}  // namespace csmala
