#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace todp::bo {

using Rng = std::mt19937_64;

// Matern-5/2 with one length-scale per input dimension (ARD).
struct MaternKernel {
    Eigen::VectorXd lengthscales;
    double signal_variance = 1.0;

    static MaternKernel isotropic(Eigen::Index dims, double lengthscale,
                                  double signal_variance = 1.0) {
        return {Eigen::VectorXd::Constant(dims, lengthscale), signal_variance};
    }

    double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
    // Same, from a precomputed scaled distance r.
    double from_distance(double r) const;
    double scaled_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

inline double matern_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            const MaternKernel& kernel) {
    return kernel(a, b);
}

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

struct PosteriorGradient {
    Posterior value;
    Eigen::VectorXd d_mean;
    Eigen::VectorXd d_variance;
};

// Smallest noise variance (standardized units) the model will carry.
inline constexpr double kNoiseFloor = 1e-8;

// Zero-mean GP regression. Training rows of `x` are inputs in the unit cube.
// With standardize set, targets are shifted and scaled to zero mean and unit
// variance before conditioning and predictions are mapped back.
class GPModel {
public:
    GPModel(MaternKernel kernel, double noise_variance, bool standardize = true);

    // Conditions on (x, y); throws NumericalError if the covariance cannot be
    // factored even after jitter escalation up to 1e-6.
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

    Posterior posterior(const Eigen::VectorXd& x) const;
    PosteriorGradient posterior_with_gradient(const Eigen::VectorXd& x) const;
    // Posterior at every row of x.
    void posterior_batch(const Eigen::MatrixXd& x, Eigen::VectorXd& mean,
                         Eigen::VectorXd& variance) const;

    // Log marginal likelihood of the standardized targets.
    double log_marginal_likelihood() const;
    // Gradient with respect to (log lengthscales..., log signal variance, log noise variance).
    Eigen::VectorXd log_marginal_likelihood_gradient() const;

    const MaternKernel& kernel() const noexcept { return kernel_; }
    double noise_variance() const noexcept { return noise_variance_; }
    double jitter() const noexcept { return jitter_; }
    const Eigen::MatrixXd& train_x() const noexcept { return x_; }
    const Eigen::VectorXd& train_y() const noexcept { return y_raw_; }
    Eigen::Index size() const noexcept { return x_.rows(); }
    Eigen::Index dims() const noexcept { return kernel_.lengthscales.size(); }
    double y_mean() const noexcept { return y_mean_; }
    double y_scale() const noexcept { return y_scale_; }

private:
    Eigen::VectorXd cross_covariance(const Eigen::VectorXd& x) const;

    MaternKernel kernel_;
    double noise_variance_;
    bool standardize_;
    double jitter_ = 0.0;
    Eigen::MatrixXd x_;
    Eigen::VectorXd y_raw_;
    Eigen::VectorXd z_;  // standardized targets
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;  // K^-1 z
};

struct FitOptions {
    int restarts = 8;
    int max_iterations = 60;
    double min_lengthscale = 1e-2;
    double max_lengthscale = 20.0;
    double min_signal_variance = 1e-2;
    double max_signal_variance = 1e2;
    double min_noise_variance = kNoiseFloor;
    double max_noise_variance = 1.0;
};

// Maximizes the log marginal likelihood over log length-scales, log signal
// variance and log noise variance from `restarts` starting points (the first is
// `warm_start` when given). Needs at least two observations.
GPModel fit_hyperparameters(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Rng& rng,
                            const FitOptions& options = {},
                            const GPModel* warm_start = nullptr);

}  // namespace todp::bo
