#include "todp/bo/box_minimize.hpp"

#include <cmath>
#include <deque>

namespace todp::bo {

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

BoxMinimizeResult minimize_box(const ValueAndGradient& f, Eigen::VectorXd x0,
                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                               const BoxMinimizeOptions& options) {
    const Eigen::Index n = x0.size();
    Eigen::VectorXd x = project(x0, lower, upper);
    Eigen::VectorXd g(n);
    double fx = f(x, g);

    std::deque<Eigen::VectorXd> s_hist;
    std::deque<Eigen::VectorXd> y_hist;
    BoxMinimizeResult result;

    int it = 0;
    for (; it < options.max_iterations; ++it) {
        if (!std::isfinite(fx)) break;
        const Eigen::VectorXd pg = x - project(x - g, lower, upper);
        if (pg.lpNorm<Eigen::Infinity>() < options.gradient_tol) break;

        // Variables pinned at a bound with the gradient pushing outward stay put.
        Eigen::VectorXd free_mask = Eigen::VectorXd::Ones(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)) {
                free_mask[i] = 0.0;
            }
        }

        // Two-loop recursion.
        Eigen::VectorXd q = g.cwiseProduct(free_mask);
        std::vector<double> alpha(s_hist.size());
        for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
            const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
            alpha[k] = rho * s_hist[k].dot(q);
            q -= alpha[k] * y_hist[k];
        }
        if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
            const double beta = rho * y_hist[k].dot(q);
            q += s_hist[k] * (alpha[k] - beta);
        }
        Eigen::VectorXd d = -q.cwiseProduct(free_mask);
        bool steepest = s_hist.empty();
        if (!(d.dot(g) < 0.0)) {
            d = -g.cwiseProduct(free_mask);
            steepest = true;
            s_hist.clear();
            y_hist.clear();
        }

        double step = steepest ? std::min(1.0, 1.0 / std::max(d.norm(), 1e-12)) : 1.0;
        Eigen::VectorXd x_new;
        Eigen::VectorXd g_new(n);
        double f_new = fx;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            x_new = project(x + step * d, lower, upper);
            f_new = f(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * g.dot(x_new - x)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || f_new > fx) {
            if (steepest) break;
            s_hist.clear();
            y_hist.clear();
            continue;
        }

        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            if (static_cast<int>(s_hist.size()) > options.history) {
                s_hist.pop_front();
                y_hist.pop_front();
            }
        }
        const double decrease = fx - f_new;
        x = std::move(x_new);
        g = g_new;
        fx = f_new;
        if (decrease <= options.relative_f_tol * (1.0 + std::abs(fx))) {
            ++it;
            break;
        }
    }
    result.x = std::move(x);
    result.value = fx;
    result.iterations = it;
    return result;
}

}  // namespace todp::bo
