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

#ifndef CSMALA_TOY1D_HPP
#define CSMALA_TOY1D_HPP

#include "csmala/mlp.hpp"

namespace csmala {
namespace toy1d {

// Analytic one-parameter model: f_theta = theta constant on [-1, 1] with
// a uniform prior, so every posterior variant has an explicit density on
// a grid and Kullback-Leibler divergences can be measured by quadrature.

inline constexpr long kDefaultGridSize = 4001;

/// Density tabulated on uniform knots over [-1, 1].
struct DensityGrid {
    Vector grid;
    Vector values;
    bool normalized = false;

    double knot_spacing() const { return grid[1] - grid[0]; }
};

Vector uniform_grid(long size);

/// Trapezoid integral over the grid.
double trapezoid(const DensityGrid& density);

/// Gibbs posterior density: proportional to exp(-lambda R_n(theta)).
DensityGrid gibbs_density(const Vector& ys, double lambda, long grid_size = kDefaultGridSize);

/// Surrogate posterior of the uncorrected stochastic chain:
/// proportional to prod_i (rho e^{-(lambda/(n rho)) l_i} + 1 - rho).
DensityGrid bar_density(const Vector& ys, double lambda, double rho,
                        long grid_size = kDefaultGridSize);

/// Surrogate posterior of the corrected chain:
/// proportional to prod_i (e^{-(lambda/n) l_i} + 1 - rho).
DensityGrid tilde_density(const Vector& ys, double lambda, double rho,
                          long grid_size = kDefaultGridSize);

/// Small-rho limit shape: proportional to exp(rho sum_i e^{-(lambda/(n rho)) l_i}).
DensityGrid varpi_density(const Vector& ys, double lambda, double rho,
                          long grid_size = kDefaultGridSize);

/// Trapezoid quadrature of p log(p/q); requires matching grids and q > 0
/// wherever p > 0.
double kl_numeric(const DensityGrid& p, const DensityGrid& q);

/// Right-hand sides of the two KL approximation bounds, scaled to
/// absolute divergences (the per-lemma normalizers n rho and n are
/// multiplied back in):
///   bound_bar_vs_gibbs   for KL(bar | Gibbs_lambda)
///   bound_bar_vs_varpi   for KL(bar | varpi), requires rho < 1
///   bound_tilde_vs_gibbs for KL(tilde | Gibbs_{lambda/(2-rho)})
struct LemmaBounds {
    double bound_bar_vs_gibbs = 0.0;
    double bound_bar_vs_varpi = 0.0;
    double bound_tilde_vs_gibbs = 0.0;
};
LemmaBounds lemma_bounds(const Vector& ys, double lambda, double rho, double C = 1.0);

}  // namespace toy1d
}  // namespace csmala

#endif  // CSMALA_TOY1D_HPP
