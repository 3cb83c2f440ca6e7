// Command-line front end: no-toll baseline, fixed-toll run and BO campaign.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "todp/errors.hpp"
#include "todp/experiment.hpp"

namespace {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kIoError = 3,
    kNotConverged = 4,
};

int report(const todp::ScenarioSummary& s) {
    std::printf("welfare %.4f DKK (cs %.4f, rr %.4f), peak accumulation %d, %s after %d days\n",
                s.welfare.welfare_per_capita, s.welfare.consumer_surplus_per_capita,
                s.welfare.revenue_per_capita, s.peak_accumulation,
                s.converged ? "converged" : "NOT converged", s.days_run);
    return s.converged ? kOk : kNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Day-to-day departure-time equilibrium with time-of-day tolls"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::optional<int> replications;
    std::optional<int> jobs;
    app.add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Seed for population, dynamics and BO");
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--replications", replications, "Number of BO campaigns")->check(CLI::PositiveNumber);
    app.add_option("--jobs", jobs, "Worker threads for replications")->check(CLI::PositiveNumber);

    auto* nte = app.add_subcommand("nte", "No-toll equilibrium");
    auto* toll = app.add_subcommand("toll", "Equilibrium under toll.fixed");
    auto* optimize = app.add_subcommand("optimize", "Bayesian optimization of the toll profile");
    for (auto* sub : {nte, toll, optimize}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        todp::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = todp::load_config(config_path);
        if (seed) cfg.set_seed(*seed);
        if (replications) cfg.replications = *replications;
        if (jobs) cfg.jobs = *jobs;

        if (nte->parsed()) return report(todp::run_nte(cfg, out_dir));
        if (toll->parsed()) return report(todp::run_fixed_toll(cfg, out_dir));

        const auto summary = todp::run_optimize(cfg, out_dir);
        for (const auto& c : summary.campaigns) {
            std::printf("replication %d: best welfare %.4f DKK (no toll %.4f)\n", c.replication,
                        c.trace.best_objective, c.baseline_welfare);
        }
        std::printf("best welfare mean %.4f, std %.4f over %zu campaigns\n", summary.best_mean,
                    summary.best_std, summary.campaigns.size());
        return kOk;
    } catch (const todp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const todp::EncodingError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
