#pragma once

#include <functional>

#include <Eigen/Dense>

namespace todp::bo {

// Objective returning f(x) and writing its gradient into the second argument.
using ValueAndGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct BoxMinimizeOptions {
    int max_iterations = 100;
    int history = 8;
    double gradient_tol = 1e-6;     // infinity norm of the projected gradient
    double relative_f_tol = 1e-10;
};

struct BoxMinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
};

// Projected L-BFGS with Armijo backtracking on the box [lower, upper]. Every
// accepted step decreases f, so the result is never worse than the start.
BoxMinimizeResult minimize_box(const ValueAndGradient& f, Eigen::VectorXd x0,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                               const BoxMinimizeOptions& options = {});

}  // namespace todp::bo
