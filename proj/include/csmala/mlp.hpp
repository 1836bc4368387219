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

#ifndef CSMALA_MLP_HPP
#define CSMALA_MLP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace csmala {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Fully connected ReLU network shape: p inputs, L hidden layers of
/// constant width r, scalar output. Optional weight box [-B, B] and
/// output clipping to [-C, C]; both are disabled by default, which is
/// the configuration used in the experiments.
struct Architecture {
    int input_dim = 1;      // p
    int hidden_layers = 1;  // L
    int width = 1;          // r
    double weight_bound = std::numeric_limits<double>::infinity();  // B
    double output_clip = std::numeric_limits<double>::infinity();   // C

    bool has_weight_bound() const { return std::isfinite(weight_bound); }
    bool has_output_clip() const { return std::isfinite(output_clip); }

    /// Total parameter count P = (p+1)r + (L-1)(r+1)r + r + 1.
    long param_count() const {
        const long p = input_dim, L = hidden_layers, r = width;
        return (p + 1) * r + (L - 1) * (r + 1) * r + r + 1;
    }

    void validate() const {
        if (input_dim < 1 || hidden_layers < 1 || width < 1)
            throw std::invalid_argument("Architecture: p, L, r must be >= 1");
        if (has_weight_bound() && weight_bound < 1.0)
            throw std::invalid_argument("Architecture: weight bound B must be >= 1");
        if (has_output_clip() && output_clip < 1.0)
            throw std::invalid_argument("Architecture: output clip C must be >= 1");
    }
};

/// Raw and clipped network output at a single input.
struct Prediction {
    double raw = 0.0;      // g_theta(x)
    double clipped = 0.0;  // (-C) v (g_theta(x) ^ C), equals raw when clipping is off
};

// Parameter layout: for l = 1..L+1, the entries of W^(l) in row-major
// order followed by the bias vector v^(l). The layout is fixed so chains
// serialize bit-reproducibly.

/// Views into a flat parameter vector; weight matrices are exposed as
/// column-major maps of the transposed (row-major) storage.
struct LayerView {
    Eigen::Map<const Matrix> weight_t;  // in_dim x out_dim (W^T)
    Eigen::Map<const Vector> bias;      // out_dim
};

namespace detail {

inline LayerView layer_view(const Architecture& arch, const double* data, int layer) {
    // layer is 1-based; 1..L hidden, L+1 output.
    const int p = arch.input_dim, r = arch.width;
    long offset = 0;
    int in_dim = p, out_dim = r;
    for (int l = 1; l < layer; ++l) {
        offset += static_cast<long>(in_dim) * out_dim + out_dim;
        in_dim = r;
        out_dim = (l + 1 <= arch.hidden_layers) ? r : 1;
    }
    if (layer == arch.hidden_layers + 1) out_dim = 1;
    // Row-major W (out x in) maps to a column-major (in x out) view of W^T.
    return LayerView{
        Eigen::Map<const Matrix>(data + offset, in_dim, out_dim),
        Eigen::Map<const Vector>(data + offset + static_cast<long>(in_dim) * out_dim,
                                 out_dim)};
}

}  // namespace detail

/// Scratch buffers for batched forward/backward passes. Reused across
/// steps so the sampler hot loop does not allocate.
class MlpWorkspace {
public:
    MlpWorkspace() = default;
    MlpWorkspace(const Architecture& arch, long max_batch) { resize(arch, max_batch); }

    void resize(const Architecture& arch, long max_batch) {
        activations_.assign(arch.hidden_layers + 1, Matrix());
        deltas_.assign(arch.hidden_layers + 1, Matrix());
        for (int l = 0; l <= arch.hidden_layers; ++l) {
            const int rows = (l == 0) ? arch.input_dim : arch.width;
            activations_[l].resize(rows, max_batch);
            deltas_[l].resize(rows, max_batch);
        }
        raw_.resize(max_batch);
        max_batch_ = max_batch;
    }

    long capacity() const { return max_batch_; }

    std::vector<Matrix> activations_;  // activations_[l] = x^(l), l=0..L
    std::vector<Matrix> deltas_;
    Vector raw_;
    long max_batch_ = 0;
};

/// Batched forward pass: inputs as columns of a p x m block. Raw outputs
/// land in ws.raw_.head(m); intermediate activations stay in ws for a
/// subsequent backward pass.
void forward_batch(const Architecture& arch, const Vector& theta,
                   const Eigen::Ref<const Matrix>& inputs, MlpWorkspace& ws);

/// Single-input forward evaluation.
Prediction forward(const Architecture& arch, const Vector& theta,
                   const Eigen::Ref<const Vector>& x);

/// Squared loss (y - f_theta(x))^2.
double loss(const Architecture& arch, const Vector& theta,
            const Eigen::Ref<const Vector>& x, double y);

/// Gradient of the squared loss w.r.t. theta via reverse accumulation.
/// ReLU subgradient at 0 is 0; the clip contributes zero gradient
/// outside (-C, C).
Vector grad_loss(const Architecture& arch, const Vector& theta,
                 const Eigen::Ref<const Vector>& x, double y);

/// Sum of losses and gradients over the columns of `inputs`:
///   loss_sum  = sum_j (y_j - f(x_j))^2
///   grad_sum  = scale * sum_j grad loss_j
/// Backward pass reuses the activations from the internal forward pass.
void batch_loss_grad(const Architecture& arch, const Vector& theta,
                     const Eigen::Ref<const Matrix>& inputs,
                     const Eigen::Ref<const Vector>& targets, double scale,
                     MlpWorkspace& ws, double& loss_sum, Vector& grad_sum);

/// Per-sample losses over the columns of `inputs`.
Vector loss_vector(const Architecture& arch, const Vector& theta,
                   const Eigen::Ref<const Matrix>& inputs,
                   const Eigen::Ref<const Vector>& targets, MlpWorkspace& ws);

/// Clipped predictions over the columns of `inputs`.
Vector predict(const Architecture& arch, const Vector& theta,
               const Eigen::Ref<const Matrix>& inputs, MlpWorkspace& ws);

/// Uniform Lipschitz constant of theta -> f_theta(x) in the sup norm on
/// the parameter box: 4 (2 r B)^L (|x|_1 v 1). Requires a finite B.
double lipschitz_bound(const Architecture& arch, const Eigen::Ref<const Vector>& x);

/// Parameter-space fluctuation scale Delta(L, r) = (2 r B)^L.
double credible_scale(const Architecture& arch);

/// Binary serialization: JSON header {p, L, r, B, C, P} followed by P
/// little-endian 64-bit floats. Round-trips bit-exactly.
void save_params(const Architecture& arch, const Vector& theta, const std::string& path);
std::pair<Architecture, Vector> load_params(const std::string& path);
void save_param_set(const Architecture& arch, const std::vector<Vector>& draws,
                    const std::string& path);
std::pair<Architecture, std::vector<Vector>> load_param_set(const std::string& path);

}  // namespace csmala

#endif  // CSMALA_MLP_HPP
