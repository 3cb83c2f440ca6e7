#include "todp/bo/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "todp/bo/box_minimize.hpp"
#include "todp/errors.hpp"

namespace todp::bo {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640;

// -(dk/dr) / r for the unit-variance Matern-5/2 kernel.
double matern_radial_factor(double r) {
    return (5.0 / 3.0) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
}

// Log marginal likelihood and its gradient in log-parameters, evaluated with
// array operations over precomputed squared coordinate differences. Gives the
// same numbers as building a GPModel, without per-pair allocations.
class LikelihoodWorkspace {
public:
    LikelihoodWorkspace(const Eigen::MatrixXd& x, const Eigen::VectorXd& y)
        : m_(x.rows()), d_(x.cols()) {
        const double mean = y.mean();
        const double sd = std::sqrt((y.array() - mean).square().mean());
        z_ = (y.array() - mean) / (sd > 1e-12 ? sd : 1.0);
        sq_.reserve(static_cast<std::size_t>(d_));
        for (Eigen::Index k = 0; k < d_; ++k) {
            const Eigen::ArrayXd col = x.col(k).array();
            Eigen::ArrayXXd diff = col.replicate(1, m_) - col.transpose().replicate(m_, 1);
            sq_.push_back(diff.square());
        }
    }

    // Returns -inf when the covariance cannot be factored.
    double evaluate(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
        grad = Eigen::VectorXd::Zero(d_ + 2);
        const double s2 = std::exp(theta[d_]);
        const double noise = std::exp(theta[d_ + 1]);
        Eigen::ArrayXXd r2 = Eigen::ArrayXXd::Zero(m_, m_);
        for (Eigen::Index k = 0; k < d_; ++k) r2 += sq_[k] * std::exp(-2.0 * theta[k]);
        const Eigen::ArrayXXd r = r2.sqrt();
        const Eigen::ArrayXXd e = (-kSqrt5 * r).exp();
        const Eigen::ArrayXXd kf = s2 * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r2) * e;
        Eigen::MatrixXd k = kf.matrix();
        k.diagonal().array() += noise;

        Eigen::LLT<Eigen::MatrixXd> chol;
        double jitter = 0.0;
        for (;;) {
            Eigen::MatrixXd kj = k;
            kj.diagonal().array() += jitter;
            chol.compute(kj);
            if (chol.info() == Eigen::Success && chol.matrixLLT().diagonal().allFinite() &&
                (chol.matrixLLT().diagonal().array() > 0.0).all()) {
                break;
            }
            jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
            if (jitter > 1.0000001e-6) return -std::numeric_limits<double>::infinity();
        }
        const Eigen::VectorXd alpha = chol.solve(z_);
        const double log_det = 2.0 * chol.matrixLLT().diagonal().array().log().sum();
        const double value = -0.5 * z_.dot(alpha) - 0.5 * log_det -
                             0.5 * static_cast<double>(m_) * std::log(2.0 * std::numbers::pi);

        const Eigen::ArrayXXd w =
            (alpha * alpha.transpose() - chol.solve(Eigen::MatrixXd::Identity(m_, m_))).array();
        const Eigen::ArrayXXd wf = w * (s2 * (5.0 / 3.0) * (1.0 + kSqrt5 * r) * e);
        for (Eigen::Index k2 = 0; k2 < d_; ++k2) {
            grad[k2] = 0.5 * (wf * sq_[k2]).sum() * std::exp(-2.0 * theta[k2]);
        }
        grad[d_] = 0.5 * (w * kf).sum();
        grad[d_ + 1] = 0.5 * noise * w.matrix().trace();
        return value;
    }

private:
    Eigen::Index m_;
    Eigen::Index d_;
    Eigen::VectorXd z_;
    std::vector<Eigen::ArrayXXd> sq_;
};

}  // namespace

double MaternKernel::scaled_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return (a - b).cwiseQuotient(lengthscales).norm();
}

double MaternKernel::from_distance(double r) const {
    return signal_variance * (1.0 + kSqrt5 * r + (5.0 / 3.0) * r * r) * std::exp(-kSqrt5 * r);
}

double MaternKernel::operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return from_distance(scaled_distance(a, b));
}

GPModel::GPModel(MaternKernel kernel, double noise_variance, bool standardize)
    : kernel_(std::move(kernel)), noise_variance_(noise_variance), standardize_(standardize) {
    if (!(kernel_.signal_variance > 0.0) || (kernel_.lengthscales.array() <= 0.0).any()) {
        throw InputError("Matern kernel needs positive length-scales and signal variance");
    }
    if (!(noise_variance_ >= 0.0)) throw InputError("noise variance must be >= 0");
    x_.resize(0, kernel_.lengthscales.size());
}

void GPModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size() || x.cols() != dims()) {
        throw InputError("GP training data has inconsistent shape");
    }
    x_ = x;
    y_raw_ = y;
    const Eigen::Index m = x.rows();
    y_mean_ = 0.0;
    y_scale_ = 1.0;
    if (standardize_ && m > 0) {
        y_mean_ = y.mean();
        const double sd = std::sqrt((y.array() - y_mean_).square().mean());
        if (sd > 1e-12) y_scale_ = sd;
    }
    z_ = (y.array() - y_mean_) / y_scale_;

    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        k(i, i) = kernel_.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            k(i, j) = k(j, i) = kernel_(x.row(i).transpose(), x.row(j).transpose());
        }
    }
    k.diagonal().array() += noise_variance_;

    jitter_ = 0.0;
    for (;;) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter_;
        chol_.compute(kj);
        if (chol_.info() == Eigen::Success && chol_.matrixLLT().diagonal().allFinite() &&
            (chol_.matrixLLT().diagonal().array() > 0.0).all()) {
            break;
        }
        jitter_ = jitter_ == 0.0 ? 1e-10 : jitter_ * 10.0;
        if (jitter_ > 1.0000001e-6) {
            throw NumericalError("GP covariance is not positive definite even with jitter 1e-6");
        }
    }
    alpha_ = m > 0 ? Eigen::VectorXd(chol_.solve(z_)) : Eigen::VectorXd();
}

Eigen::VectorXd GPModel::cross_covariance(const Eigen::VectorXd& x) const {
    Eigen::VectorXd k(x_.rows());
    for (Eigen::Index i = 0; i < x_.rows(); ++i) k[i] = kernel_(x, x_.row(i).transpose());
    return k;
}

Posterior GPModel::posterior(const Eigen::VectorXd& x) const {
    if (x_.rows() == 0) return {y_mean_, y_scale_ * y_scale_ * kernel_.signal_variance};
    const Eigen::VectorXd k = cross_covariance(x);
    const Eigen::VectorXd v = chol_.matrixL().solve(k);
    const double var = std::max(0.0, kernel_.signal_variance - v.squaredNorm());
    return {y_mean_ + y_scale_ * k.dot(alpha_), y_scale_ * y_scale_ * var};
}

PosteriorGradient GPModel::posterior_with_gradient(const Eigen::VectorXd& x) const {
    PosteriorGradient out;
    const Eigen::Index d = dims();
    out.d_mean = Eigen::VectorXd::Zero(d);
    out.d_variance = Eigen::VectorXd::Zero(d);
    if (x_.rows() == 0) {
        out.value = posterior(x);
        return out;
    }
    const Eigen::Index m = x_.rows();
    const Eigen::VectorXd inv_l2 = kernel_.lengthscales.array().square().inverse();
    Eigen::VectorXd k(m);
    Eigen::MatrixXd dk(m, d);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::VectorXd diff = x - x_.row(i).transpose();
        const double r = diff.cwiseQuotient(kernel_.lengthscales).norm();
        k[i] = kernel_.from_distance(r);
        const double coef = -kernel_.signal_variance * matern_radial_factor(r);
        dk.row(i) = (coef * diff.cwiseProduct(inv_l2)).transpose();
    }
    const Eigen::VectorXd v = chol_.matrixL().solve(k);
    const double var = std::max(0.0, kernel_.signal_variance - v.squaredNorm());
    const Eigen::VectorXd w = chol_.solve(k);
    out.value = {y_mean_ + y_scale_ * k.dot(alpha_), y_scale_ * y_scale_ * var};
    out.d_mean = y_scale_ * dk.transpose() * alpha_;
    out.d_variance = -2.0 * y_scale_ * y_scale_ * dk.transpose() * w;
    return out;
}

void GPModel::posterior_batch(const Eigen::MatrixXd& x, Eigen::VectorXd& mean,
                              Eigen::VectorXd& variance) const {
    const Eigen::Index p = x.rows();
    mean.resize(p);
    variance.resize(p);
    if (x_.rows() == 0) {
        mean.setConstant(y_mean_);
        variance.setConstant(y_scale_ * y_scale_ * kernel_.signal_variance);
        return;
    }
    Eigen::MatrixXd ks(x_.rows(), p);
    for (Eigen::Index c = 0; c < p; ++c) ks.col(c) = cross_covariance(x.row(c).transpose());
    mean = (ks.transpose() * alpha_).array() * y_scale_ + y_mean_;
    const Eigen::MatrixXd v = chol_.matrixL().solve(ks);
    variance = (kernel_.signal_variance - v.colwise().squaredNorm().transpose().array())
                   .max(0.0) *
               (y_scale_ * y_scale_);
}

double GPModel::log_marginal_likelihood() const {
    const auto m = static_cast<double>(x_.rows());
    const double log_det = 2.0 * chol_.matrixLLT().diagonal().array().log().sum();
    return -0.5 * z_.dot(alpha_) - 0.5 * log_det - 0.5 * m * std::log(2.0 * std::numbers::pi);
}

Eigen::VectorXd GPModel::log_marginal_likelihood_gradient() const {
    const Eigen::Index m = x_.rows();
    const Eigen::Index d = dims();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(d + 2);
    if (m == 0) return grad;
    const Eigen::MatrixXd k_inv = chol_.solve(Eigen::MatrixXd::Identity(m, m));
    const Eigen::MatrixXd w = alpha_ * alpha_.transpose() - k_inv;
    const Eigen::VectorXd inv_l2 = kernel_.lengthscales.array().square().inverse();
    for (Eigen::Index i = 0; i < m; ++i) {
        grad[d] += 0.5 * w(i, i) * kernel_.signal_variance;
        for (Eigen::Index j = 0; j < i; ++j) {
            const Eigen::VectorXd diff = x_.row(i) - x_.row(j);
            const double r = diff.cwiseQuotient(kernel_.lengthscales).norm();
            // Factor 2 for the (i, j) / (j, i) pair, times the 1/2 of the trace form.
            const double e = w(i, j) * kernel_.signal_variance * matern_radial_factor(r);
            grad.head(d) += e * diff.cwiseAbs2().cwiseProduct(inv_l2);
            grad[d] += w(i, j) * kernel_.from_distance(r);
        }
    }
    grad[d + 1] = 0.5 * noise_variance_ * w.trace();
    return grad;
}

GPModel fit_hyperparameters(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Rng& rng,
                            const FitOptions& options, const GPModel* warm_start) {
    if (x.rows() < 2) throw InputError("hyperparameter fitting needs at least two points");
    const Eigen::Index d = x.cols();
    const Eigen::Index n = d + 2;

    Eigen::VectorXd lower(n);
    Eigen::VectorXd upper(n);
    lower.head(d).setConstant(std::log(options.min_lengthscale));
    upper.head(d).setConstant(std::log(options.max_lengthscale));
    lower[d] = std::log(options.min_signal_variance);
    upper[d] = std::log(options.max_signal_variance);
    lower[d + 1] = std::log(options.min_noise_variance);
    upper[d + 1] = std::log(options.max_noise_variance);

    auto make_model = [&](const Eigen::VectorXd& theta) {
        MaternKernel kernel{theta.head(d).array().exp(), std::exp(theta[d])};
        GPModel model(std::move(kernel), std::exp(theta[d + 1]));
        model.fit(x, y);
        return model;
    };
    const LikelihoodWorkspace workspace(x, y);
    const ValueAndGradient negative_lml = [&](const Eigen::VectorXd& theta,
                                              Eigen::VectorXd& grad) {
        const double value = workspace.evaluate(theta, grad);
        grad = -grad;
        return -value;
    };

    std::vector<Eigen::VectorXd> starts;
    if (warm_start != nullptr && warm_start->dims() == d) {
        Eigen::VectorXd theta(n);
        theta.head(d) = warm_start->kernel().lengthscales.array().log();
        theta[d] = std::log(warm_start->kernel().signal_variance);
        theta[d + 1] = std::log(std::max(warm_start->noise_variance(), options.min_noise_variance));
        starts.push_back(theta);
    } else {
        Eigen::VectorXd theta(n);
        theta.head(d).setConstant(std::log(0.5));
        theta[d] = 0.0;
        theta[d + 1] = std::log(1e-2);
        starts.push_back(theta);
    }
    std::uniform_real_distribution<double> log_ls(std::log(0.05), std::log(2.0));
    std::uniform_real_distribution<double> log_sv(std::log(0.3), std::log(3.0));
    std::uniform_real_distribution<double> log_nv(std::log(1e-6), std::log(1e-1));
    while (static_cast<int>(starts.size()) < std::max(options.restarts, 1)) {
        Eigen::VectorXd theta(n);
        for (Eigen::Index i = 0; i < d; ++i) theta[i] = log_ls(rng);
        theta[d] = log_sv(rng);
        theta[d + 1] = log_nv(rng);
        starts.push_back(theta);
    }

    BoxMinimizeOptions minimize_options;
    minimize_options.max_iterations = options.max_iterations;
    minimize_options.gradient_tol = 1e-5;
    minimize_options.relative_f_tol = 1e-9;

    double best_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;
    for (const auto& start : starts) {
        const auto r = minimize_box(negative_lml, start.cwiseMax(lower).cwiseMin(upper), lower,
                                    upper, minimize_options);
        if (r.value < best_value) {
            best_value = r.value;
            best_theta = r.x;
        }
    }
    if (!std::isfinite(best_value)) {
        throw NumericalError("GP hyperparameter fit failed from every restart");
    }
    return make_model(best_theta);
}

}  // namespace todp::bo
