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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "csmala/experiment.hpp"
#include "doctest.h"

using namespace csmala;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("preset resolution") {
    ExperimentPlan plan;
    plan.n = 10000;
    plan.arch = Architecture{1, 2, 100};

    const ChainConfig mala = resolve_config(plan, Algo::MALA, 0.5);
    CHECK(mala.lambda == 10000.0);
    CHECK(mala.gamma == 1e-4);
    CHECK(mala.step_sd == doctest::Approx(0.2 / std::sqrt(10401.0)).epsilon(1e-15));
    CHECK(mala.burn_in == 200000);
    CHECK(mala.gap == 5000);
    CHECK(mala.draws == 20);
    CHECK(!mala.zeta.adaptive);

    const ChainConfig smala = resolve_config(plan, Algo::SMALA, 0.5);
    CHECK(smala.lambda == 5000.0);

    const ChainConfig cs = resolve_config(plan, Algo::CSMALA, 0.5);
    CHECK(cs.lambda == 15000.0);
    CHECK(cs.gamma == 2e-4);
    CHECK(cs.zeta.adaptive);
    CHECK(cs.zeta.update_interval == 100);

    // Truncated burn-in at rho = 0.3, reduced at rho = 0.1.
    CHECK(resolve_config(plan, Algo::MALA, 0.3).burn_in == 333333);
    CHECK(resolve_config(plan, Algo::MALA, 0.1).burn_in == 50000);

    ExperimentPlan desk = ExperimentPlan::desk(1, "out");
    CHECK(desk.n == 2000);
    CHECK(desk.arch.width == 32);
    const ChainConfig desk_config = resolve_config(desk, Algo::CSMALA, 0.5);
    CHECK(desk_config.burn_in == 20000);
    CHECK(desk_config.gap == 500);
    CHECK(desk_config.draws == 20);
}

TEST_CASE("moving average") {
    const std::vector<double> values{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(moving_average(values, 1) == values);

    const std::vector<double> smoothed = moving_average(values, 3);
    CHECK(smoothed[0] == doctest::Approx(1.5));       // truncated left window
    CHECK(smoothed[2] == doctest::Approx(3.0));
    CHECK(smoothed[4] == doctest::Approx(4.5));       // truncated right window

    // A window wider than the series averages everything.
    const std::vector<double> wide = moving_average(values, 101);
    for (double v : wide) CHECK(v == doctest::Approx(3.0));

    CHECK_THROWS(moving_average(values, 2));
    CHECK_THROWS(moving_average(values, 0));
}

TEST_CASE("thread resolution") {
    CHECK(resolve_threads(4) == 4);
    setenv("CSMALA_THREADS", "3", 1);
    CHECK(resolve_threads(0) == 3);
    unsetenv("CSMALA_THREADS");
    CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("toy responses are seeded draws with variance one half") {
    const Vector a = toy_responses(50000, 3);
    const Vector b = toy_responses(50000, 3);
    CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(a.squaredNorm() / a.size() == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("toy kl sweep passes and handles lambda zero") {
    TempDir dir("csmala_toykl_test");
    ToyKlSweep sweep;
    sweep.n = 10;
    sweep.lambda_over_n = {0.0, 0.5};
    sweep.rhos = {0.1, 0.9};
    sweep.seeds = 3;
    sweep.grid_size = 2001;
    const auto cells = run_toy_kl(sweep, (dir.path / "toy_kl.json").string());
    REQUIRE(cells.size() == 12);
    for (const ToyKlCell& cell : cells) {
        CHECK(cell.ok());
        if (cell.lambda == 0.0) {
            CHECK(cell.kl_bar_gibbs == doctest::Approx(0.0).epsilon(1e-10));
            CHECK(cell.bound1a == 0.0);
            CHECK(cell.bound2 == 0.0);
        }
    }
    CHECK(fs::exists(dir.path / "toy_kl.json"));
}

TEST_CASE("rho = 1 cell unifies the three algorithms end to end") {
    TempDir dir("csmala_unify_test");
    ExperimentPlan plan;
    plan.n = 300;
    plan.n_val = 200;
    plan.arch = Architecture{1, 1, 4};
    plan.rhos = {1.0};
    plan.chains_per_cell = 1;
    plan.seed = 6;
    plan.out_dir = dir.path.string();
    plan.burn_in_override = 100;
    plan.gap_override = 20;
    plan.draws_override = 3;
    plan.threads = 1;

    run_sampling(plan);
    const std::string mala = slurp(dir.path / "mala_rho1" / "chain_0" / "draws.bin");
    const std::string smala = slurp(dir.path / "smala_rho1" / "chain_0" / "draws.bin");
    const std::string cs = slurp(dir.path / "csmala_rho1" / "chain_0" / "draws.bin");
    CHECK(mala == smala);
    CHECK(mala == cs);
}

TEST_CASE("report regeneration is byte-identical") {
    TempDir dir("csmala_report_test");
    ExperimentPlan plan;
    plan.n = 300;
    plan.n_val = 200;
    plan.arch = Architecture{1, 1, 4};
    plan.algorithms = {Algo::SMALA, Algo::CSMALA};
    plan.rhos = {0.5};
    plan.chains_per_cell = 2;
    plan.seed = 11;
    plan.out_dir = dir.path.string();
    plan.burn_in_override = 200;
    plan.gap_override = 20;
    plan.draws_override = 5;
    plan.threads = 1;

    const RunReport first = run_experiment(plan);
    for (const CellResult& cell : first.cells) CHECK(!cell.failed);

    std::vector<fs::path> exports;
    for (const auto& entry : fs::directory_iterator(dir.path))
        if (entry.is_regular_file() &&
            (entry.path().extension() == ".csv" || entry.path().extension() == ".json") &&
            entry.path().filename().string().find("train") == std::string::npos &&
            entry.path().filename().string().find("val") == std::string::npos)
            exports.push_back(entry.path());
    REQUIRE(!exports.empty());
    std::vector<std::string> before;
    for (const auto& path : exports) before.push_back(slurp(path));
    for (const auto& path : exports) fs::remove(path);

    build_reports(plan);
    for (std::size_t i = 0; i < exports.size(); ++i)
        CHECK(slurp(exports[i]) == before[i]);
}

TEST_CASE("missing cell is quarantined, not fatal") {
    TempDir dir("csmala_quarantine_test");
    ExperimentPlan plan;
    plan.n = 300;
    plan.n_val = 200;
    plan.arch = Architecture{1, 1, 4};
    plan.algorithms = {Algo::SMALA};
    plan.rhos = {0.5};
    plan.chains_per_cell = 1;
    plan.seed = 2;
    plan.out_dir = dir.path.string();
    plan.burn_in_override = 100;
    plan.gap_override = 10;
    plan.draws_override = 2;
    plan.threads = 1;
    run_sampling(plan);

    plan.algorithms = {Algo::SMALA, Algo::MALA};  // mala was never sampled
    const RunReport report = build_reports(plan);
    REQUIRE(report.cells.size() == 2);
    CHECK(!report.cells[0].failed);
    CHECK(report.cells[1].failed);
    CHECK(!report.cells[1].error.empty());
}

TEST_CASE("scaling at n equal to the fixed batch has rho one") {
    TempDir dir("csmala_scaling_test");
    ExperimentPlan plan;
    plan.n_val = 200;
    plan.arch = Architecture{1, 1, 4};
    plan.algorithms = {Algo::MALA, Algo::SMALA, Algo::CSMALA};
    plan.chains_per_cell = 1;
    plan.seed = 4;
    plan.out_dir = dir.path.string();
    plan.burn_in_override = 100;
    plan.gap_override = 10;
    plan.draws_override = 3;
    plan.threads = 1;

    const auto points = run_scaling(plan, {300}, 300);
    REQUIRE(points.size() == 3);
    for (const ScalingPoint& point : points) {
        CHECK(point.rho == 1.0);
        CHECK(point.risk_mean == doctest::Approx(points[0].risk_mean).epsilon(1e-12));
    }
    CHECK(fs::exists(dir.path / "scaling.csv"));
}
