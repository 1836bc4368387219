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

#include "csmala/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "csmala/model.hpp"
#include "csmala/toy1d.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace csmala {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_rho(double rho) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", rho);
    return buf;
}

/// Write the full payload to a sibling temp file, then rename into place.
void write_atomic(const fs::path& path, const std::string& payload) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << payload;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

fs::path cell_dir(const ExperimentPlan& plan, Algo algo, double rho) {
    return fs::path(plan.out_dir) / (algo_name(algo) + "_rho" + format_rho(rho));
}

nlohmann::json config_json(const ChainConfig& config) {
    nlohmann::json doc;
    doc["algo"] = algo_name(config.algo);
    doc["lambda"] = config.lambda;
    doc["gamma"] = config.gamma;
    doc["step_sd"] = config.step_sd;
    doc["rho"] = config.rho;
    doc["zeta_adaptive"] = config.zeta.adaptive;
    doc["zeta_fixed"] = config.zeta.fixed_value;
    doc["zeta_interval"] = config.zeta.update_interval;
    doc["burn_in"] = config.burn_in;
    doc["gap"] = config.gap;
    doc["draws"] = config.draws;
    doc["restart_patience"] = config.restart_patience;
    doc["seed"] = config.seed;
    doc["chain_index"] = config.chain_index;
    return doc;
}

/// Simple bounded worker pool over a fixed job list.
void run_jobs(const std::vector<std::function<void()>>& jobs, int threads) {
    if (threads <= 1 || jobs.size() <= 1) {
        for (const auto& job : jobs) job();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min<int>(threads, static_cast<int>(jobs.size()));
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
                jobs[i]();
        });
    }
    for (auto& t : pool) t.join();
}

PretrainConfig pretrain_config(double rho) {
    PretrainConfig config;
    config.steps = 2000;
    config.learning_rate = 1e-3;
    config.optimizer = Optimizer::ADAM;
    config.rho = rho;
    return config;
}

fs::path pretrain_path(const ExperimentPlan& plan, double rho) {
    return fs::path(plan.out_dir) / ("pretrained_rho" + format_rho(rho) + ".bin");
}

}  // namespace

ExperimentPlan ExperimentPlan::desk(std::uint64_t seed, const std::string& out_dir) {
    ExperimentPlan plan;
    plan.n = 2000;
    plan.n_val = 2000;
    plan.arch.width = 32;
    plan.seed = seed;
    plan.out_dir = out_dir;
    plan.desk_scale = true;
    return plan;
}

ChainConfig resolve_config(const ExperimentPlan& plan, Algo algo, double rho) {
    if (rho <= 0.0 || rho > 1.0)
        throw std::invalid_argument("resolve_config: rho must be in (0, 1]");
    ChainConfig config;
    config.algo = algo;
    config.rho = rho;
    const double n = static_cast<double>(plan.n);
    switch (algo) {
        case Algo::MALA:
            config.lambda = n;
            config.gamma = 1e-4;
            config.zeta = ZetaPolicy::fixed(0.0);
            break;
        case Algo::SMALA:
            config.lambda = n * rho;
            config.gamma = 1e-4;
            config.zeta = ZetaPolicy::fixed(0.0);
            break;
        case Algo::CSMALA:
            config.lambda = n * (2.0 - rho);
            config.gamma = 1e-4 / rho;
            config.zeta = ZetaPolicy::adapt(100);
            break;
    }
    config.step_sd = 0.2 / std::sqrt(static_cast<double>(plan.arch.param_count()));
    config.burn_in = (rho == 0.1) ? 50000 : static_cast<long>(100000.0 / rho);
    config.gap = 5000;
    config.draws = 20;
    if (plan.desk_scale) {
        config.burn_in /= 10;
        config.gap /= 10;
    }
    if (plan.burn_in_override) config.burn_in = *plan.burn_in_override;
    if (plan.gap_override) config.gap = *plan.gap_override;
    if (plan.draws_override) config.draws = *plan.draws_override;
    config.seed = plan.seed;
    return config;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CSMALA_THREADS")) {
        const int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<double> moving_average(const std::vector<double>& values, long window) {
    if (window < 1 || window % 2 == 0)
        throw std::invalid_argument("moving_average: window must be odd and >= 1");
    const long m = static_cast<long>(values.size());
    std::vector<double> prefix(m + 1, 0.0);
    for (long i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + values[i];
    std::vector<double> out(m);
    const long half = window / 2;
    for (long i = 0; i < m; ++i) {
        const long lo = std::max(0L, i - half);
        const long hi = std::min(m - 1, i + half);
        out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

void run_sampling(const ExperimentPlan& plan) {
    fs::create_directories(plan.out_dir);
    const fs::path out_dir(plan.out_dir);

    const Dataset train = generate(plan.n, plan.noise_sd, plan.seed);
    const Dataset val = generate(plan.n_val, plan.noise_sd, mix_seed(plan.seed, 0x76616cULL));
    save(train, (out_dir / "train.csv").string());
    save(val, (out_dir / "val.csv").string());

    for (double rho : plan.rhos) {
        const fs::path init_path = pretrain_path(plan, rho);
        if (fs::exists(init_path)) continue;
        const Vector theta0 = pretrain(train, plan.arch, pretrain_config(rho), plan.seed);
        save_params(plan.arch, theta0, init_path.string());
    }

    struct Job {
        Algo algo;
        double rho;
        int chain;
    };
    std::vector<Job> cells;
    for (Algo algo : plan.algorithms)
        for (double rho : plan.rhos)
            for (int k = 0; k < plan.chains_per_cell; ++k) cells.push_back({algo, rho, k});

    std::mutex error_mutex;
    std::vector<std::string> errors;
    std::vector<std::function<void()>> jobs;
    jobs.reserve(cells.size());
    for (const Job& job : cells) {
        jobs.push_back([&, job] {
            try {
                const fs::path dir =
                    cell_dir(plan, job.algo, job.rho) / ("chain_" + std::to_string(job.chain));
                fs::create_directories(dir);
                ChainConfig config = resolve_config(plan, job.algo, job.rho);
                config.chain_index = static_cast<std::uint64_t>(job.chain);

                auto [arch, theta0] = load_params(pretrain_path(plan, job.rho).string());
                MlpModel model(arch, train);
                const ChainResult result = run_chain(model, config, theta0);

                write_atomic(dir / "config.json", config_json(config).dump(2) + "\n");
                write_trace_csv(result.trace, (dir / "trace.csv.tmp").string());
                fs::rename(dir / "trace.csv.tmp", dir / "trace.csv");
                save_param_set(arch, result.draws, (dir / "draws.bin.tmp").string());
                fs::rename(dir / "draws.bin.tmp", dir / "draws.bin");
                save_params(arch, result.theta_at_burn_in, (dir / "theta_burn_in.bin").string());
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                errors.push_back(algo_name(job.algo) + "/rho=" + format_rho(job.rho) +
                                 "/chain " + std::to_string(job.chain) + ": " + e.what());
            }
        });
    }
    run_jobs(jobs, resolve_threads(plan.threads));

    if (!errors.empty()) {
        std::string joined;
        for (const auto& e : errors) joined += e + "\n";
        write_atomic(out_dir / "sampling_errors.txt", joined);
    }
}

RunReport build_reports(const ExperimentPlan& plan) {
    const fs::path out_dir(plan.out_dir);
    const Dataset val = load((out_dir / "val.csv").string());
    Vector f_true_on_val(val.n());
    for (long i = 0; i < val.n(); ++i) f_true_on_val[i] = true_f(val.xs(0, i));

    RunReport report;
    for (Algo algo : plan.algorithms) {
        for (double rho : plan.rhos) {
            CellResult cell;
            cell.algo = algo;
            cell.rho = rho;
            try {
                const fs::path dir = cell_dir(plan, algo, rho);
                std::vector<std::vector<StepDiagnostics>> traces;
                std::vector<ChainSummary> summaries;
                long accepted = 0, total = 0;
                std::vector<long> accepted_counts;
                for (int k = 0; k < plan.chains_per_cell; ++k) {
                    const fs::path chain_dir = dir / ("chain_" + std::to_string(k));
                    traces.push_back(read_trace_csv((chain_dir / "trace.csv").string()));
                    for (const StepDiagnostics& d : traces.back()) {
                        ++total;
                        if (d.accepted) {
                            ++accepted;
                            accepted_counts.push_back(d.mask_count);
                        }
                    }
                    auto [arch, draws] = load_param_set((chain_dir / "draws.bin").string());
                    SampleSet samples{std::move(draws), arch, 0};
                    ChainSummary summary;
                    summary.mean_predictions = posterior_mean_predict(samples, val.xs);
                    summary.report = credible_radius(samples, val, plan.credible_alpha);
                    cell.chain_mean_risks.push_back(
                        validation_risk(summary.mean_predictions, val));
                    cell.chain_radii.push_back(summary.report.radius);
                    summaries.push_back(std::move(summary));
                }
                cell.acceptance_rate =
                    total > 0 ? static_cast<double>(accepted) / static_cast<double>(total) : 0.0;
                cell.coverage = coverage(summaries, f_true_on_val);

                // Risk curve: per-chain moving average (window 1501), then
                // min/mean/max across chains at each step.
                const std::size_t steps = traces.front().size();
                std::vector<std::vector<double>> smoothed;
                for (const auto& trace : traces) {
                    if (trace.size() != steps)
                        throw SchemaError("trace length mismatch within cell");
                    std::vector<double> risks(trace.size());
                    for (std::size_t i = 0; i < trace.size(); ++i)
                        risks[i] = trace[i].risk_value;
                    smoothed.push_back(moving_average(risks, 1501));
                }
                std::string curve = "step,ma_risk_min,ma_risk_mean,ma_risk_max\n";
                for (std::size_t i = 0; i < steps; ++i) {
                    double lo = smoothed[0][i], hi = smoothed[0][i], sum = 0.0;
                    for (const auto& s : smoothed) {
                        lo = std::min(lo, s[i]);
                        hi = std::max(hi, s[i]);
                        sum += s[i];
                    }
                    curve += std::to_string(i + 1) + ',' + format_double(lo) + ',' +
                             format_double(sum / static_cast<double>(smoothed.size())) + ',' +
                             format_double(hi) + '\n';
                }
                write_atomic(out_dir / ("risk_curve_" + algo_name(algo) + "_rho" +
                                        format_rho(rho) + ".csv"),
                             curve);

                // Histogram of accepted batch sizes |Z'|, unit-width integer
                // bins grouped so at most ~60 bins are emitted.
                std::string hist = "bin_lo,bin_hi,count\n";
                if (!accepted_counts.empty()) {
                    long lo = accepted_counts[0], hi = accepted_counts[0];
                    for (long c : accepted_counts) {
                        lo = std::min(lo, c);
                        hi = std::max(hi, c);
                    }
                    const long width = std::max(1L, (hi - lo + 60) / 60);
                    std::vector<long> bins((hi - lo) / width + 1, 0);
                    for (long c : accepted_counts) ++bins[(c - lo) / width];
                    for (std::size_t b = 0; b < bins.size(); ++b) {
                        const long bin_lo = lo + static_cast<long>(b) * width;
                        hist += std::to_string(bin_lo) + ',' +
                                std::to_string(bin_lo + width - 1) + ',' +
                                std::to_string(bins[b]) + '\n';
                    }
                }
                write_atomic(out_dir / ("accepted_batch_hist_" + algo_name(algo) + "_rho" +
                                        format_rho(rho) + ".csv"),
                             hist);
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
            report.cells.push_back(std::move(cell));
        }
    }

    // Credible radii and coverage tables: one row per rho, one column
    // group per algorithm.
    auto mean_sd = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
        return std::pair<double, double>(mean, sd);
    };
    std::string radii = "rho";
    std::string cover = "rho";
    for (Algo algo : plan.algorithms) {
        radii += "," + algo_name(algo) + "_radius_mean," + algo_name(algo) + "_radius_sd";
        cover += "," + algo_name(algo) + "_coverage";
    }
    radii += '\n';
    cover += '\n';
    for (double rho : plan.rhos) {
        radii += format_rho(rho);
        cover += format_rho(rho);
        for (Algo algo : plan.algorithms) {
            const CellResult* cell = nullptr;
            for (const CellResult& c : report.cells)
                if (c.algo == algo && c.rho == rho) cell = &c;
            if (!cell || cell->failed || cell->chain_radii.empty()) {
                radii += ",nan,nan";
                cover += ",nan";
                continue;
            }
            const auto [mean, sd] = mean_sd(cell->chain_radii);
            radii += ',' + format_double(mean) + ',' + format_double(sd);
            cover += ',' + format_double(cell->coverage);
        }
        radii += '\n';
        cover += '\n';
    }
    write_atomic(out_dir / "radii.csv", radii);
    write_atomic(out_dir / "coverage.csv", cover);

    nlohmann::json summary = nlohmann::json::array();
    for (const CellResult& cell : report.cells) {
        nlohmann::json entry;
        entry["algo"] = algo_name(cell.algo);
        entry["rho"] = cell.rho;
        entry["failed"] = cell.failed;
        if (cell.failed) {
            entry["error"] = cell.error;
        } else {
            entry["acceptance_rate"] = cell.acceptance_rate;
            entry["chain_mean_risks"] = cell.chain_mean_risks;
            entry["chain_radii"] = cell.chain_radii;
            entry["coverage"] = cell.coverage;
        }
        summary.push_back(std::move(entry));
    }
    write_atomic(out_dir / "summary.json", summary.dump(2) + "\n");
    return report;
}

RunReport run_experiment(const ExperimentPlan& plan) {
    run_sampling(plan);
    return build_reports(plan);
}

std::vector<ScalingPoint> run_scaling(const ExperimentPlan& base, const std::vector<long>& n_list,
                                      long fixed_batch) {
    std::vector<ScalingPoint> points;
    fs::create_directories(base.out_dir);
    for (long n : n_list) {
        const double rho = static_cast<double>(fixed_batch) / static_cast<double>(n);
        if (rho <= 0.0 || rho > 1.0)
            throw std::invalid_argument("run_scaling: fixed batch incompatible with n");
        ExperimentPlan plan = base;
        plan.n = n;
        plan.rhos = {rho};
        plan.seed = mix_seed(base.seed, static_cast<std::uint64_t>(n));

        const Dataset train = generate(plan.n, plan.noise_sd, plan.seed);
        const Dataset val =
            generate(plan.n_val, plan.noise_sd, mix_seed(plan.seed, 0x76616cULL));
        const Vector theta0 = pretrain(train, plan.arch, pretrain_config(rho), plan.seed);

        for (Algo algo : plan.algorithms) {
            ChainConfig config = resolve_config(plan, algo, rho);
            std::vector<double> risks(plan.chains_per_cell, 0.0);
            std::vector<std::function<void()>> jobs;
            for (int k = 0; k < plan.chains_per_cell; ++k) {
                jobs.push_back([&, k] {
                    ChainConfig chain_config = config;
                    chain_config.chain_index = static_cast<std::uint64_t>(k);
                    MlpModel model(plan.arch, train);
                    const ChainResult result = run_chain(model, chain_config, theta0);
                    SampleSet samples{result.draws, plan.arch, 0};
                    risks[k] = validation_risk(posterior_mean_predict(samples, val.xs), val);
                });
            }
            run_jobs(jobs, resolve_threads(plan.threads));

            double mean = 0.0;
            for (double r : risks) mean += r;
            mean /= static_cast<double>(risks.size());
            double var = 0.0;
            for (double r : risks) var += (r - mean) * (r - mean);
            const double sd =
                risks.size() > 1 ? std::sqrt(var / static_cast<double>(risks.size() - 1)) : 0.0;
            points.push_back({n, rho, algo, mean, sd});
        }
    }

    std::string csv = "n,rho,algo,risk_mean,risk_sd\n";
    for (const ScalingPoint& point : points)
        csv += std::to_string(point.n) + ',' + format_rho(point.rho) + ',' +
               algo_name(point.algo) + ',' + format_double(point.risk_mean) + ',' +
               format_double(point.risk_sd) + '\n';
    write_atomic(fs::path(base.out_dir) / "scaling.csv", csv);
    return points;
}

Vector toy_responses(long n, std::uint64_t seed) {
    RngStream rng(derive_seed(seed, 0, substream::kData));
    Vector ys(n);
    const double sd = std::sqrt(0.5);
    for (long i = 0; i < n; ++i) ys[i] = sd * rng.normal();
    return ys;
}

std::vector<ToyKlCell> run_toy_kl(const ToyKlSweep& sweep, const std::string& out_path) {
    std::vector<ToyKlCell> cells;
    for (double lam_frac : sweep.lambda_over_n) {
        for (double rho : sweep.rhos) {
            for (int s = 0; s < sweep.seeds; ++s) {
                const std::uint64_t seed = mix_seed(sweep.master_seed, s);
                const Vector ys = toy_responses(sweep.n, seed);
                const double lambda = lam_frac * static_cast<double>(sweep.n);

                const auto gibbs = toy1d::gibbs_density(ys, lambda, sweep.grid_size);
                const auto gibbs_reduced =
                    toy1d::gibbs_density(ys, lambda / (2.0 - rho), sweep.grid_size);
                const auto bar = toy1d::bar_density(ys, lambda, rho, sweep.grid_size);
                const auto tilde = toy1d::tilde_density(ys, lambda, rho, sweep.grid_size);
                const auto varpi = toy1d::varpi_density(ys, lambda, rho, sweep.grid_size);
                const auto bounds = toy1d::lemma_bounds(ys, lambda, rho);

                ToyKlCell cell;
                cell.lambda = lambda;
                cell.rho = rho;
                cell.seed = seed;
                cell.kl_bar_gibbs = toy1d::kl_numeric(bar, gibbs);
                cell.bound1a = bounds.bound_bar_vs_gibbs;
                cell.kl_bar_varpi = toy1d::kl_numeric(bar, varpi);
                cell.bound1b = bounds.bound_bar_vs_varpi;
                cell.kl_tilde_gibbs_reduced = toy1d::kl_numeric(tilde, gibbs_reduced);
                cell.bound2 = bounds.bound_tilde_vs_gibbs;
                cells.push_back(cell);
            }
        }
    }

    nlohmann::json doc = nlohmann::json::array();
    for (const ToyKlCell& cell : cells) {
        nlohmann::json entry;
        entry["lambda"] = cell.lambda;
        entry["rho"] = cell.rho;
        entry["seed"] = cell.seed;
        entry["kl_bar_gibbs"] = cell.kl_bar_gibbs;
        entry["bound_bar_gibbs"] = cell.bound1a;
        entry["kl_bar_varpi"] = cell.kl_bar_varpi;
        entry["bound_bar_varpi"] = cell.bound1b;
        entry["kl_tilde_gibbs_reduced"] = cell.kl_tilde_gibbs_reduced;
        entry["bound_tilde_gibbs_reduced"] = cell.bound2;
        entry["ok"] = cell.ok();
        doc.push_back(std::move(entry));
    }
    if (!out_path.empty()) {
        fs::create_directories(fs::path(out_path).parent_path().empty()
                                   ? fs::path(".")
                                   : fs::path(out_path).parent_path());
        write_atomic(out_path, doc.dump(2) + "\n");
    }
    return cells;
}

}  // namespace csmala
