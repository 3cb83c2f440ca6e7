#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "todp/bo/gp.hpp"

namespace todp::bo {

// n points in [0,1)^dims, one per stratum [j/n, (j+1)/n) in every dimension.
Eigen::MatrixXd lhs(int n, int dims, Rng& rng);

enum class DropoutKind { none, random, s1, s2 };

struct Dropout {
    DropoutKind kind = DropoutKind::none;
    int d = 0;

    static Dropout none() { return {}; }
    static Dropout random(int d) { return {DropoutKind::random, d}; }
    static Dropout s1(int d) { return {DropoutKind::s1, d}; }
    static Dropout s2(int d) { return {DropoutKind::s2, d}; }
};

std::string to_string(const Dropout& dropout);
// Parses "none", "random:<d>", "s1:<d>", "s2:<d>".
Dropout parse_dropout(const std::string& text);

// Active coordinate indices, sorted. Coordinates follow the toll encoding
// [A_1, xi_1, sigma_1, A_2, ...]; s1 groups by parameter type, s2 by component.
// Throws ConfigError when d is infeasible for the mode.
std::vector<int> dropout_select(const Dropout& dropout, int dims, Rng& rng);

double ucb(const GPModel& model, const Eigen::VectorXd& x, double beta);

struct AcquisitionOptions {
    int probe_points = 1024;
    int restarts = 5;
    int max_iterations = 50;
};

// Maximizes UCB over the unit cube, varying only `active` coordinates; the rest
// are copied from fill_in. Probes form a randomly shifted Sobol set plus fill_in
// itself, and the best `restarts` probes are refined by projected L-BFGS.
Eigen::VectorXd maximize_acquisition(const GPModel& model, double beta,
                                     const std::vector<int>& active,
                                     const Eigen::VectorXd& fill_in,
                                     const AcquisitionOptions& options, Rng& rng);

struct BOConfig {
    int n_init = 30;
    int budget = 90;
    double ucb_beta = 2.0;
    Dropout dropout;
    int acq_restarts = 5;
    int acq_probe_points = 1024;
    int fit_restarts = 4;
    int fit_max_iterations = 60;
    // Objective assigned to evaluations that stall; when unset they are
    // recorded but kept out of the surrogate.
    std::optional<double> stall_penalty;
    std::uint64_t seed = 1;
    // Simulation seed the objective uses; recorded in the trace only.
    std::uint64_t objective_seed = 1;

    void validate(int dims) const;
};

struct Evaluation {
    Eigen::VectorXd x;
    double objective = 0.0;  // NaN for a failed evaluation without penalty
    std::uint64_t seed_used = 0;
    bool failed = false;
    bool initial = false;
};

struct BOTrace {
    std::vector<Evaluation> evaluations;
    std::vector<double> incumbent_series;
    Eigen::VectorXd best_x;
    double best_objective = 0.0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
// Called after every evaluation; lets callers flush partial traces.
using EvaluationObserver = std::function<void(const BOTrace&)>;

// Maximizes `objective` over the box [lower, upper].
BOTrace run_bo(const Objective& objective, const Eigen::VectorXd& lower,
               const Eigen::VectorXd& upper, const BOConfig& cfg,
               const EvaluationObserver& observer = {});

}  // namespace todp::bo
