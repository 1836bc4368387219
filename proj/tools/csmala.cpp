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

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csmala/experiment.hpp"
#include "csmala/model.hpp"
#include "csmala/pretrain.hpp"

namespace {

using namespace csmala;

struct GlobalOpts {
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    bool desk_scale = false;
    int threads = 0;
};

ExperimentPlan make_plan(const GlobalOpts& global) {
    ExperimentPlan plan =
        global.desk_scale ? ExperimentPlan::desk(global.seed, global.out_dir) : ExperimentPlan{};
    plan.seed = global.seed;
    plan.out_dir = global.out_dir;
    plan.threads = global.threads;
    return plan;
}

std::vector<Algo> parse_algos(const std::vector<std::string>& names) {
    std::vector<Algo> algos;
    for (const std::string& name : names) algos.push_back(algo_from_name(name));
    return algos;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gradient-informed MCMC for Gibbs posteriors over ReLU networks"};
    app.require_subcommand(1);

    GlobalOpts global;
    app.add_option("--seed", global.seed, "Master seed");
    app.add_option("--out-dir", global.out_dir, "Output directory");
    app.add_flag("--desk-scale", global.desk_scale,
                 "Reduced configuration: n = 2000, width 32, schedules / 10");
    app.add_option("--threads", global.threads,
                   "Worker threads (0 = CSMALA_THREADS env or hardware)");

    // generate
    auto* gen = app.add_subcommand("generate", "Draw a synthetic regression dataset");
    long gen_n = 10000;
    double gen_noise = 0.02;
    std::string gen_name = "train.csv";
    gen->add_option("--n", gen_n, "Sample size");
    gen->add_option("--noise-sd", gen_noise, "Noise standard deviation");
    gen->add_option("--name", gen_name, "Output file name inside --out-dir");

    // pretrain
    auto* pre = app.add_subcommand("pretrain", "Optimize an initializer for the chains");
    std::string pre_data = "train.csv";
    std::string pre_out = "pretrained.bin";
    long pre_steps = 2000;
    double pre_lr = 1e-3;
    double pre_rho = 1.0;
    std::string pre_opt = "adam";
    int pre_layers = 2, pre_width = 100;
    pre->add_option("--data", pre_data, "Training CSV inside --out-dir");
    pre->add_option("--name", pre_out, "Output parameter file inside --out-dir");
    pre->add_option("--steps", pre_steps, "Optimization steps");
    pre->add_option("--lr", pre_lr, "Learning rate");
    pre->add_option("--rho", pre_rho, "Minibatch probability");
    pre->add_option("--optimizer", pre_opt, "sgd or adam");
    pre->add_option("--layers", pre_layers, "Hidden layers");
    pre->add_option("--width", pre_width, "Hidden width");

    // sample
    auto* sample = app.add_subcommand("sample", "Run the chain fleet and persist traces");
    std::vector<std::string> sample_algos{"mala", "smala", "csmala"};
    std::vector<double> sample_rhos{0.1, 0.3, 0.5};
    int sample_chains = 10;
    long sample_burn_in = -1, sample_gap = -1, sample_draws = -1;
    sample->add_option("--algos", sample_algos, "Algorithms: mala, smala, csmala");
    sample->add_option("--rhos", sample_rhos, "Batch probabilities");
    sample->add_option("--chains", sample_chains, "Chains per (algorithm, rho) cell");
    sample->add_option("--burn-in", sample_burn_in, "Override burn-in b");
    sample->add_option("--gap", sample_gap, "Override draw gap c");
    sample->add_option("--draws", sample_draws, "Override retained draws N");

    // report
    auto* report = app.add_subcommand("report", "Rebuild exports from persisted traces");
    std::vector<std::string> report_algos{"mala", "smala", "csmala"};
    std::vector<double> report_rhos{0.1, 0.3, 0.5};
    int report_chains = 10;
    report->add_option("--algos", report_algos, "Algorithms: mala, smala, csmala");
    report->add_option("--rhos", report_rhos, "Batch probabilities");
    report->add_option("--chains", report_chains, "Chains per cell");

    // scaling
    auto* scaling = app.add_subcommand("scaling", "Fixed-average-batch scaling study");
    std::vector<long> scaling_ns{2000, 4000, 8000};
    long scaling_batch = 400;
    std::vector<std::string> scaling_algos{"smala", "csmala"};
    int scaling_chains = 5;
    long scaling_burn_in = -1, scaling_gap = -1, scaling_draws = -1;
    scaling->add_option("--n-list", scaling_ns, "Sample sizes");
    scaling->add_option("--fixed-batch", scaling_batch, "Average batch size n rho");
    scaling->add_option("--algos", scaling_algos, "Algorithms to compare");
    scaling->add_option("--chains", scaling_chains, "Chains per point");
    scaling->add_option("--burn-in", scaling_burn_in, "Override burn-in b");
    scaling->add_option("--gap", scaling_gap, "Override draw gap c");
    scaling->add_option("--draws", scaling_draws, "Override retained draws N");

    // toy-kl
    auto* toy = app.add_subcommand("toy-kl", "Verify the surrogate KL bounds on the toy model");
    long toy_n = 10;
    int toy_seeds = 20;
    long toy_grid = 4001;
    toy->add_option("--n", toy_n, "Toy sample size");
    toy->add_option("--seeds", toy_seeds, "Independent data seeds");
    toy->add_option("--grid", toy_grid, "Quadrature grid knots");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            std::filesystem::create_directories(global.out_dir);
            const Dataset data = generate(gen_n, gen_noise, global.seed);
            const std::string path =
                (std::filesystem::path(global.out_dir) / gen_name).string();
            save(data, path);
            std::printf("wrote %s (n=%ld)\n", path.c_str(), data.n());
        } else if (*pre) {
            const auto dir = std::filesystem::path(global.out_dir);
            const Dataset data = load((dir / pre_data).string());
            Architecture arch{1, pre_layers, pre_width};
            PretrainConfig config;
            config.steps = pre_steps;
            config.learning_rate = pre_lr;
            config.rho = pre_rho;
            config.optimizer = (pre_opt == "sgd") ? Optimizer::SGD : Optimizer::ADAM;
            const Vector theta = pretrain(data, arch, config, global.seed);
            const std::string path = (dir / pre_out).string();
            save_params(arch, theta, path);
            MlpWorkspace ws(arch, data.n());
            const double risk =
                loss_vector(arch, theta, data.xs, data.ys, ws).mean();
            std::printf("wrote %s (training risk %.6g)\n", path.c_str(), risk);
        } else if (*sample) {
            ExperimentPlan plan = make_plan(global);
            plan.algorithms = parse_algos(sample_algos);
            plan.rhos = sample_rhos;
            plan.chains_per_cell = sample_chains;
            if (sample_burn_in > 0) plan.burn_in_override = sample_burn_in;
            if (sample_gap > 0) plan.gap_override = sample_gap;
            if (sample_draws > 0) plan.draws_override = sample_draws;
            run_sampling(plan);
            std::printf("sampling complete: %s\n", plan.out_dir.c_str());
            if (std::filesystem::exists(
                    std::filesystem::path(plan.out_dir) / "sampling_errors.txt")) {
                std::fprintf(stderr, "some chains failed; see sampling_errors.txt\n");
                return 1;
            }
        } else if (*report) {
            ExperimentPlan plan = make_plan(global);
            plan.algorithms = parse_algos(report_algos);
            plan.rhos = report_rhos;
            plan.chains_per_cell = report_chains;
            const RunReport result = build_reports(plan);
            bool any_failed = false;
            for (const CellResult& cell : result.cells) {
                if (cell.failed) {
                    any_failed = true;
                    std::fprintf(stderr, "cell %s rho=%g failed: %s\n",
                                 algo_name(cell.algo).c_str(), cell.rho, cell.error.c_str());
                } else {
                    std::printf("%s rho=%g: accept %.3f coverage %.2f\n",
                                algo_name(cell.algo).c_str(), cell.rho, cell.acceptance_rate,
                                cell.coverage);
                }
            }
            return any_failed ? 1 : 0;
        } else if (*scaling) {
            ExperimentPlan plan = make_plan(global);
            plan.algorithms = parse_algos(scaling_algos);
            plan.chains_per_cell = scaling_chains;
            if (scaling_burn_in > 0) plan.burn_in_override = scaling_burn_in;
            if (scaling_gap > 0) plan.gap_override = scaling_gap;
            if (scaling_draws > 0) plan.draws_override = scaling_draws;
            const auto points = run_scaling(plan, scaling_ns, scaling_batch);
            for (const ScalingPoint& point : points)
                std::printf("n=%ld rho=%g %s: risk %.6g +- %.6g\n", point.n, point.rho,
                            algo_name(point.algo).c_str(), point.risk_mean, point.risk_sd);
        } else if (*toy) {
            ToyKlSweep sweep;
            sweep.n = toy_n;
            sweep.seeds = toy_seeds;
            sweep.master_seed = global.seed;
            sweep.grid_size = toy_grid;
            std::filesystem::create_directories(global.out_dir);
            const std::string path =
                (std::filesystem::path(global.out_dir) / "toy_kl.json").string();
            const auto cells = run_toy_kl(sweep, path);
            long violations = 0;
            for (const ToyKlCell& cell : cells)
                if (!cell.ok()) ++violations;
            std::printf("wrote %s: %zu cells, %ld bound violations\n", path.c_str(),
                        cells.size(), violations);
            return violations == 0 ? 0 : 2;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
