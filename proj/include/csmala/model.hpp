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

#ifndef CSMALA_MODEL_HPP
#define CSMALA_MODEL_HPP

#include <limits>

#include "csmala/data.hpp"
#include "csmala/mlp.hpp"
#include "csmala/risk.hpp"

namespace csmala {

// A sampler model exposes per-sample squared losses and their gradients
// over a fixed training sample:
//   long dim();                    parameter dimension
//   long n();                      sample count
//   double param_bound();          box half-width B (inf if unbounded)
//   double full_loss_sum(theta);   sum_i l_i(theta)
//   void masked_loss_grad(theta, mask, grad_scale, loss_sum, grad);
//       loss_sum = sum_{i: Z_i=1} l_i(theta)
//       grad     = grad_scale * sum_{i: Z_i=1} grad l_i(theta)

/// ReLU network regression model over a Dataset.
class MlpModel {
public:
    MlpModel(const Architecture& arch, const Dataset& data)
        : arch_(arch), data_(&data), ws_(arch, data.n()),
          gather_x_(arch.input_dim, data.n()), gather_y_(data.n()) {
        arch_.validate();
    }

    const Architecture& arch() const { return arch_; }
    long dim() const { return arch_.param_count(); }
    long n() const { return data_->n(); }
    double param_bound() const { return arch_.weight_bound; }

    double full_loss_sum(const Vector& theta) {
        return loss_vector(arch_, theta, data_->xs, data_->ys, ws_).sum();
    }

    void masked_loss_grad(const Vector& theta, const Mask& mask, double grad_scale,
                          double& loss_sum, Vector& grad) {
        long m = 0;
        for (long i = 0; i < n(); ++i) {
            if (!mask.bits[i]) continue;
            gather_x_.col(m) = data_->xs.col(i);
            gather_y_[m] = data_->ys[i];
            ++m;
        }
        batch_loss_grad(arch_, theta, gather_x_.leftCols(m), gather_y_.head(m),
                        grad_scale, ws_, loss_sum, grad);
    }

private:
    Architecture arch_;
    const Dataset* data_;
    MlpWorkspace ws_;
    Matrix gather_x_;
    Vector gather_y_;
};

/// One-parameter model f_theta = theta[0] on [-bound, bound], used by the
/// analytic density checks.
class ConstantModel {
public:
    explicit ConstantModel(Vector ys, double bound = 1.0)
        : ys_(std::move(ys)), bound_(bound) {}

    long dim() const { return 1; }
    long n() const { return ys_.size(); }
    double param_bound() const { return bound_; }

    double full_loss_sum(const Vector& theta) const {
        return (ys_.array() - theta[0]).square().sum();
    }

    void masked_loss_grad(const Vector& theta, const Mask& mask, double grad_scale,
                          double& loss_sum, Vector& grad) const {
        loss_sum = 0.0;
        double grad_sum = 0.0;
        for (long i = 0; i < n(); ++i) {
            if (!mask.bits[i]) continue;
            const double residual = ys_[i] - theta[0];
            loss_sum += residual * residual;
            grad_sum += -2.0 * residual;
        }
        grad.resize(1);
        grad[0] = grad_scale * grad_sum;
    }

    const Vector& ys() const { return ys_; }

private:
    Vector ys_;
    double bound_;
};

}  // namespace csmala

#endif  // CSMALA_MODEL_HPP
