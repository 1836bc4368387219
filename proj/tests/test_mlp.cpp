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

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "csmala/data.hpp"
#include "csmala/mlp.hpp"
#include "csmala/rng.hpp"
#include "doctest.h"

using namespace csmala;

namespace {

Vector random_theta(const Architecture& arch, std::uint64_t seed, double scale = 1.0) {
    RngStream rng(seed);
    Vector theta(arch.param_count());
    for (long i = 0; i < theta.size(); ++i) theta[i] = scale * rng.normal();
    return theta;
}

/// Independent layer-by-layer reference evaluation working directly on
/// the flat layout, with explicit loops instead of matrix products.
double reference_forward(const Architecture& arch, const Vector& theta, const Vector& x) {
    std::vector<double> act(x.data(), x.data() + x.size());
    long offset = 0;
    int in_dim = arch.input_dim;
    for (int l = 1; l <= arch.hidden_layers + 1; ++l) {
        const int out_dim = (l <= arch.hidden_layers) ? arch.width : 1;
        std::vector<double> next(out_dim, 0.0);
        for (int o = 0; o < out_dim; ++o) {
            double z = 0.0;
            // Row-major weight rows: entry (o, i) at offset + o*in_dim... the
            // flat layout stores W^T column-major, i.e. entry (i, o) of W^T
            // at offset + o*in_dim + i, which is row o of W contiguously.
            for (int i = 0; i < in_dim; ++i)
                z += theta[offset + static_cast<long>(o) * in_dim + i] * act[i];
            z += theta[offset + static_cast<long>(in_dim) * out_dim + o];
            next[o] = (l <= arch.hidden_layers) ? std::max(z, 0.0) : z;
        }
        offset += static_cast<long>(in_dim) * out_dim + out_dim;
        act = std::move(next);
        in_dim = arch.width;
    }
    return act[0];
}

}  // namespace

TEST_CASE("parameter counts") {
    CHECK(Architecture{1, 1, 1}.param_count() == 4);
    CHECK(Architecture{3, 3, 5}.param_count() == 86);
    CHECK(Architecture{1, 2, 100}.param_count() == 10401);
}

TEST_CASE("architecture validation") {
    CHECK_THROWS(Architecture{0, 1, 1}.validate());
    CHECK_THROWS(Architecture{1, 1, 1, 0.5}.validate());
    Architecture ok{1, 2, 3};
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("forward on zero parameters is zero") {
    Architecture arch{2, 3, 4};
    const Vector theta = Vector::Zero(arch.param_count());
    Vector x(2);
    x << 0.7, -1.3;
    CHECK(forward(arch, theta, x).raw == 0.0);
}

TEST_CASE("single relu kills a negative input") {
    Architecture arch{1, 1, 1};
    Vector theta(4);
    theta << 1.0, 0.0, 1.0, 0.0;  // W1=1, v1=0, W2=1, v2=0
    Vector x(1);
    x << -2.0;
    CHECK(forward(arch, theta, x).raw == 0.0);
    x << 2.0;
    CHECK(forward(arch, theta, x).raw == 2.0);
}

TEST_CASE("forward matches the reference recursion") {
    Architecture arch{1, 2, 3};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Vector theta = random_theta(arch, seed);
        RngStream rng(seed + 1000);
        Vector x(1);
        x << 2.0 * rng.uniform() - 1.0;
        CHECK(forward(arch, theta, x).raw ==
              doctest::Approx(reference_forward(arch, theta, x)).epsilon(1e-12));
    }
    Architecture wide{3, 3, 5};
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Vector theta = random_theta(wide, seed);
        RngStream rng(seed + 2000);
        Vector x(3);
        for (int i = 0; i < 3; ++i) x[i] = 2.0 * rng.uniform() - 1.0;
        CHECK(forward(wide, theta, x).raw ==
              doctest::Approx(reference_forward(wide, theta, x)).epsilon(1e-12));
    }
}

TEST_CASE("output clipping") {
    Architecture arch{1, 1, 1};
    arch.output_clip = 1.0;
    Vector theta(4);
    theta << 1.0, 0.0, 5.0, 0.0;
    Vector x(1);
    x << 2.0;
    const Prediction pred = forward(arch, theta, x);
    CHECK(pred.raw == 10.0);
    CHECK(pred.clipped == 1.0);
}

TEST_CASE("loss basics") {
    Architecture arch{1, 1, 1};
    const Vector zero = Vector::Zero(4);
    Vector x(1);
    x << 0.5;
    CHECK(loss(arch, zero, x, 0.0) == 0.0);   // exact fit
    CHECK(loss(arch, zero, x, 2.0) == 4.0);   // constant-zero predictor
    const Vector theta = random_theta(arch, 3);
    const double f = forward(arch, theta, x).clipped;
    CHECK(loss(arch, theta, x, 1.25) ==
          doctest::Approx((1.25 - f) * (1.25 - f)).epsilon(1e-15));
}

TEST_CASE("zero residual gives zero gradient") {
    Architecture arch{1, 2, 3};
    const Vector theta = Vector::Zero(arch.param_count());
    Vector x(1);
    x << 0.4;
    CHECK(grad_loss(arch, theta, x, 0.0).norm() == 0.0);
}

TEST_CASE("gradient matches central finite differences") {
    Architecture arch{2, 2, 4};
    const double h = 1e-6;
    int tested = 0;
    for (std::uint64_t seed = 1; tested < 10 && seed <= 60; ++seed) {
        Vector theta = random_theta(arch, seed, 0.7);
        RngStream rng(seed + 500);
        Vector x(2);
        x << 2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0;
        const double y = rng.normal();

        // Skip draws with a preactivation near a ReLU kink, where the
        // finite-difference stencil straddles the nondifferentiability.
        MlpWorkspace ws(arch, 1);
        forward_batch(arch, theta, x, ws);
        bool near_kink = false;
        for (int l = 1; l <= arch.hidden_layers && !near_kink; ++l)
            for (int o = 0; o < arch.width; ++o)
                if (std::abs(ws.activations_[l](o, 0)) < 1e-3 &&
                    ws.activations_[l](o, 0) != 0.0)
                    near_kink = true;
        if (near_kink) continue;
        ++tested;

        const Vector grad = grad_loss(arch, theta, x, y);
        for (long i = 0; i < theta.size(); ++i) {
            Vector tp = theta, tm = theta;
            tp[i] += h;
            tm[i] -= h;
            const double fd = (loss(arch, tp, x, y) - loss(arch, tm, x, y)) / (2.0 * h);
            const double denom = std::max(std::abs(fd), 1e-3);
            CHECK(std::abs(grad[i] - fd) / denom < 1e-5);
        }
    }
    CHECK(tested == 10);
}

TEST_CASE("gradient scale parameter is linear") {
    Architecture arch{1, 2, 3};
    const Vector theta = random_theta(arch, 9);
    Matrix xs(1, 4);
    xs << -0.5, 0.3, 0.7, -0.2;
    Vector ys(4);
    ys << 0.1, -0.4, 0.6, 0.0;
    MlpWorkspace ws(arch, 4);
    double l1 = 0.0, l2 = 0.0;
    Vector g1, g2;
    batch_loss_grad(arch, theta, xs, ys, 1.0, ws, l1, g1);
    batch_loss_grad(arch, theta, xs, ys, 3.5, ws, l2, g2);
    CHECK(l1 == l2);  // loss_sum is unscaled
    CHECK((g2 - 3.5 * g1).lpNorm<Eigen::Infinity>() < 1e-12 * g1.lpNorm<Eigen::Infinity>());
}

TEST_CASE("batch gradient equals summed per-sample gradients") {
    Architecture arch{1, 2, 3};
    const Vector theta = random_theta(arch, 17);
    const long m = 8;
    Matrix xs(1, m);
    Vector ys(m);
    RngStream rng(77);
    for (long j = 0; j < m; ++j) {
        xs(0, j) = 2.0 * rng.uniform() - 1.0;
        ys[j] = rng.normal();
    }
    MlpWorkspace ws(arch, m);
    double loss_sum = 0.0;
    Vector grad;
    batch_loss_grad(arch, theta, xs, ys, 0.25, ws, loss_sum, grad);

    Vector oracle = Vector::Zero(theta.size());
    double oracle_loss = 0.0;
    for (long j = 0; j < m; ++j) {
        oracle += grad_loss(arch, theta, xs.col(j), ys[j]);
        oracle_loss += loss(arch, theta, xs.col(j), ys[j]);
    }
    CHECK(loss_sum == doctest::Approx(oracle_loss).epsilon(1e-12));
    CHECK((grad - 0.25 * oracle).lpNorm<Eigen::Infinity>() <
          1e-12 * (1.0 + oracle.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("empty batch yields zero loss and gradient") {
    Architecture arch{1, 1, 2};
    const Vector theta = random_theta(arch, 5);
    Matrix xs(1, 0);
    Vector ys(0);
    MlpWorkspace ws(arch, 4);
    double loss_sum = 1.0;
    Vector grad;
    batch_loss_grad(arch, theta, xs, ys, 1.0, ws, loss_sum, grad);
    CHECK(loss_sum == 0.0);
    CHECK(grad.norm() == 0.0);
}

TEST_CASE("lipschitz bound values") {
    Architecture a{1, 1, 1, 1.0};
    Vector x(1);
    x << 0.5;
    CHECK(lipschitz_bound(a, x) == 8.0);
    Architecture b{1, 2, 2, 1.0};
    Vector x2(1);
    x2 << 3.0;
    CHECK(lipschitz_bound(b, x2) == 192.0);
    CHECK(credible_scale(a) == 2.0);
    CHECK(credible_scale(b) == 16.0);
    Architecture unbounded{1, 1, 1};
    CHECK_THROWS(lipschitz_bound(unbounded, x));
}

TEST_CASE("lipschitz property over random parameter pairs") {
    Architecture arch{1, 2, 3, 1.0};
    RngStream rng(31);
    const long P = arch.param_count();
    for (int trial = 0; trial < 1000; ++trial) {
        Vector ta(P), tb(P);
        for (long i = 0; i < P; ++i) {
            ta[i] = 2.0 * rng.uniform() - 1.0;
            tb[i] = 2.0 * rng.uniform() - 1.0;
        }
        Vector x(1);
        x << 2.0 * rng.uniform() - 1.0;
        const double gap = std::abs(forward(arch, ta, x).raw - forward(arch, tb, x).raw);
        CHECK(gap <= lipschitz_bound(arch, x) * (ta - tb).lpNorm<Eigen::Infinity>() + 1e-12);
    }
}

TEST_CASE("parameter serialization round-trips bit-exactly") {
    Architecture arch{1, 2, 3, 2.0};
    const Vector theta = random_theta(arch, 13);
    const std::string path = "params_test.bin";
    save_params(arch, theta, path);
    auto [loaded_arch, loaded_theta] = load_params(path);
    CHECK(loaded_arch.input_dim == arch.input_dim);
    CHECK(loaded_arch.hidden_layers == arch.hidden_layers);
    CHECK(loaded_arch.width == arch.width);
    CHECK(loaded_arch.weight_bound == arch.weight_bound);
    REQUIRE(loaded_theta.size() == theta.size());
    CHECK((loaded_theta - theta).lpNorm<Eigen::Infinity>() == 0.0);

    std::vector<Vector> draws{theta, random_theta(arch, 14), random_theta(arch, 15)};
    save_param_set(arch, draws, path);
    auto [set_arch, set_draws] = load_param_set(path);
    REQUIRE(set_draws.size() == 3);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK((set_draws[k] - draws[k]).lpNorm<Eigen::Infinity>() == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("truncated parameter file is rejected") {
    Architecture arch{1, 1, 2};
    const Vector theta = random_theta(arch, 21);
    const std::string path = "params_trunc.bin";
    save_params(arch, theta, path);
    {
        std::FILE* f = std::fopen(path.c_str(), "rb+");
        REQUIRE(f != nullptr);
        std::fseek(f, 0, SEEK_END);
        const long size = std::ftell(f);
        std::fclose(f);
        REQUIRE(truncate(path.c_str(), size - 8) == 0);
    }
    CHECK_THROWS(load_params(path));
    std::remove(path.c_str());
}
