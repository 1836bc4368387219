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

#include "csmala/toy1d.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "csmala/risk.hpp"

namespace csmala {
namespace toy1d {

Vector uniform_grid(long size) {
    if (size < 2) throw std::invalid_argument("grid needs at least two knots");
    Vector grid(size);
    for (long i = 0; i < size; ++i)
        grid[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(size - 1);
    return grid;
}

double trapezoid(const DensityGrid& density) {
    const long G = density.grid.size();
    double sum = 0.5 * (density.values[0] + density.values[G - 1]);
    sum += density.values.segment(1, G - 2).sum();
    return sum * density.knot_spacing();
}

namespace {

/// Build a normalized grid density from a log-weight function, shifting
/// by the maximum before exponentiation.
DensityGrid from_log_weight(long grid_size, const std::function<double(double)>& log_weight) {
    DensityGrid density;
    density.grid = uniform_grid(grid_size);
    density.values.resize(grid_size);
    for (long i = 0; i < grid_size; ++i) density.values[i] = log_weight(density.grid[i]);
    const double shift = density.values.maxCoeff();
    density.values = (density.values.array() - shift).exp();
    const double mass = trapezoid(density);
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw std::runtime_error("density normalization failed");
    density.values /= mass;
    density.normalized = true;
    return density;
}

Vector losses_at(const Vector& ys, double theta) {
    return (ys.array() - theta).square();
}

}  // namespace

DensityGrid gibbs_density(const Vector& ys, double lambda, long grid_size) {
    if (ys.size() == 0) throw std::invalid_argument("gibbs_density: empty data");
    const double n = static_cast<double>(ys.size());
    return from_log_weight(grid_size, [&](double theta) {
        return -lambda * losses_at(ys, theta).sum() / n;
    });
}

DensityGrid bar_density(const Vector& ys, double lambda, double rho, long grid_size) {
    // -lambda R_bar = -sum_i psi_bar((lambda/n) l_i); the direct sum stays
    // finite at lambda = 0.
    const double scale = lambda / static_cast<double>(ys.size());
    return from_log_weight(grid_size, [&](double theta) {
        const Vector losses = losses_at(ys, theta);
        double sum = 0.0;
        for (long i = 0; i < losses.size(); ++i) sum += psi_bar(rho, scale * losses[i]);
        return -sum;
    });
}

DensityGrid tilde_density(const Vector& ys, double lambda, double rho, long grid_size) {
    const double scale = lambda / static_cast<double>(ys.size());
    return from_log_weight(grid_size, [&](double theta) {
        const Vector losses = losses_at(ys, theta);
        double sum = 0.0;
        for (long i = 0; i < losses.size(); ++i) sum += psi(rho, scale * losses[i]);
        return -sum;
    });
}

DensityGrid varpi_density(const Vector& ys, double lambda, double rho, long grid_size) {
    if (rho >= 1.0) throw std::invalid_argument("varpi_density requires rho < 1");
    const double rate = lambda / (static_cast<double>(ys.size()) * rho);
    return from_log_weight(grid_size, [&](double theta) {
        return rho * (-rate * losses_at(ys, theta)).array().exp().sum();
    });
}

double kl_numeric(const DensityGrid& p, const DensityGrid& q) {
    if (p.grid.size() != q.grid.size() || p.grid[0] != q.grid[0] ||
        p.knot_spacing() != q.knot_spacing())
        throw std::invalid_argument("kl_numeric: mismatched grids");
    const long G = p.grid.size();
    Vector integrand(G);
    for (long i = 0; i < G; ++i) {
        const double pv = p.values[i];
        if (pv <= 0.0) {
            integrand[i] = 0.0;
            continue;
        }
        const double qv = q.values[i];
        if (qv <= 0.0) throw std::invalid_argument("kl_numeric: q vanishes where p > 0");
        integrand[i] = pv * std::log(pv / qv);
    }
    DensityGrid helper{p.grid, std::move(integrand), false};
    return trapezoid(helper);
}

LemmaBounds lemma_bounds(const Vector& ys, double lambda, double rho, double C) {
    const double n = static_cast<double>(ys.size());
    // True regression function is identically zero here, so eps_i = Y_i.
    const double mean_fourth = ys.array().pow(4).mean();
    LemmaBounds bounds;
    const double per_batch = lambda / (n * rho);
    bounds.bound_bar_vs_gibbs =
        n * rho * per_batch * per_batch * (64.0 * std::pow(C, 4) + 4.0 * mean_fourth);
    if (rho < 1.0)
        bounds.bound_bar_vs_varpi = n * rho * rho / (1.0 - rho);
    else
        bounds.bound_bar_vs_varpi = std::numeric_limits<double>::infinity();
    const double per_full = lambda / n;
    bounds.bound_tilde_vs_gibbs =
        n * per_full * per_full * (32.0 * std::pow(C, 4) + 2.0 * mean_fourth);
    return bounds;
}

}  // namespace toy1d
}  // namespace csmala
