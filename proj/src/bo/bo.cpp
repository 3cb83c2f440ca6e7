#include "todp/bo/bo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/random/sobol.hpp>

#include "todp/bo/box_minimize.hpp"
#include "todp/errors.hpp"

namespace todp::bo {

Eigen::MatrixXd lhs(int n, int dims, Rng& rng) {
    if (n < 1 || dims < 1) throw ConfigError("lhs needs n >= 1 and dims >= 1");
    Eigen::MatrixXd points(n, dims);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> strata(static_cast<std::size_t>(n));
    for (int d = 0; d < dims; ++d) {
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        for (int i = 0; i < n; ++i) {
            const double u = (strata[static_cast<std::size_t>(i)] + unit(rng)) / n;
            // Guard the upper stratum edge against rounding up to (j+1)/n.
            points(i, d) = std::min(u, std::nextafter((strata[i] + 1.0) / n, 0.0));
        }
    }
    return points;
}

std::string to_string(const Dropout& dropout) {
    switch (dropout.kind) {
        case DropoutKind::none: return "none";
        case DropoutKind::random: return "random:" + std::to_string(dropout.d);
        case DropoutKind::s1: return "s1:" + std::to_string(dropout.d);
        case DropoutKind::s2: return "s2:" + std::to_string(dropout.d);
    }
    return "none";
}

Dropout parse_dropout(const std::string& text) {
    if (text == "none") return Dropout::none();
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("bad dropout spec '" + text + "'");
    const std::string kind = text.substr(0, colon);
    int d = 0;
    try {
        std::size_t used = 0;
        d = std::stoi(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw ConfigError("bad dropout dimension in '" + text + "'");
    }
    if (kind == "random") return Dropout::random(d);
    if (kind == "s1") return Dropout::s1(d);
    if (kind == "s2") return Dropout::s2(d);
    throw ConfigError("unknown dropout kind '" + kind + "'");
}

namespace {

std::vector<int> random_subset(int dims, int d, Rng& rng) {
    std::vector<int> all(static_cast<std::size_t>(dims));
    std::iota(all.begin(), all.end(), 0);
    for (int i = 0; i < d; ++i) {
        std::uniform_int_distribution<int> pick(i, dims - 1);
        std::swap(all[i], all[pick(rng)]);
    }
    all.resize(static_cast<std::size_t>(d));
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace

std::vector<int> dropout_select(const Dropout& dropout, int dims, Rng& rng) {
    if (dims < 1) throw ConfigError("dropout needs at least one dimension");
    const int d = dropout.d;
    switch (dropout.kind) {
        case DropoutKind::none: {
            std::vector<int> all(static_cast<std::size_t>(dims));
            std::iota(all.begin(), all.end(), 0);
            return all;
        }
        case DropoutKind::random:
            if (d < 1 || d > dims) throw ConfigError("random dropout needs 1 <= d <= D");
            return random_subset(dims, d, rng);
        case DropoutKind::s1: {
            if (dims % 3 != 0) throw ConfigError("s1 dropout needs D = 3K");
            if (d < 3 || d > dims) throw ConfigError("s1 dropout needs 3 <= d <= D");
            // Uniform over d-subsets that hit every parameter type.
            for (;;) {
                auto subset = random_subset(dims, d, rng);
                bool seen[3] = {false, false, false};
                for (int i : subset) seen[i % 3] = true;
                if (seen[0] && seen[1] && seen[2]) return subset;
            }
        }
        case DropoutKind::s2: {
            if (dims % 3 != 0) throw ConfigError("s2 dropout needs D = 3K");
            const int k = dims / 3;
            if (d < 1 || d > k) throw ConfigError("s2 dropout needs 1 <= d <= K");
            std::uniform_int_distribution<int> member(0, 2);
            std::vector<int> out;
            for (int component : random_subset(k, d, rng)) out.push_back(3 * component + member(rng));
            std::sort(out.begin(), out.end());
            return out;
        }
    }
    throw ConfigError("unknown dropout kind");
}

double ucb(const GPModel& model, const Eigen::VectorXd& x, double beta) {
    const auto p = model.posterior(x);
    return p.mean + beta * std::sqrt(p.variance);
}

Eigen::VectorXd maximize_acquisition(const GPModel& model, double beta,
                                     const std::vector<int>& active,
                                     const Eigen::VectorXd& fill_in,
                                     const AcquisitionOptions& options, Rng& rng) {
    if (active.empty()) throw ConfigError("acquisition needs at least one active dimension");
    const auto a = static_cast<Eigen::Index>(active.size());
    const int probes = std::max(options.probe_points, 0);

    auto embed = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd x = fill_in;
        for (Eigen::Index j = 0; j < a; ++j) x[active[j]] = z[j];
        return x;
    };

    Eigen::MatrixXd candidates(probes + 1, fill_in.size());
    candidates.row(0) = fill_in.transpose();
    if (probes > 0) {
        boost::random::sobol sobol(static_cast<std::size_t>(a));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Eigen::VectorXd shift(a);
        for (Eigen::Index j = 0; j < a; ++j) shift[j] = unit(rng);
        Eigen::VectorXd z(a);
        for (int p = 0; p < probes; ++p) {
            for (Eigen::Index j = 0; j < a; ++j) {
                const double u = std::ldexp(static_cast<double>(sobol()), -64) + shift[j];
                z[j] = u - std::floor(u);
            }
            candidates.row(p + 1) = embed(z).transpose();
        }
    }

    Eigen::VectorXd mean;
    Eigen::VectorXd var;
    model.posterior_batch(candidates, mean, var);
    const Eigen::VectorXd acq = mean.array() + beta * var.array().sqrt();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(candidates.rows()));
    std::iota(order.begin(), order.end(), 0);
    const auto top = std::min<std::size_t>(static_cast<std::size_t>(std::max(options.restarts, 0)),
                                           order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(top, 1)),
                      order.end(), [&](Eigen::Index l, Eigen::Index r) {
                          return acq[l] > acq[r] || (acq[l] == acq[r] && l < r);
                      });

    Eigen::VectorXd best = candidates.row(order[0]).transpose();
    double best_value = acq[order[0]];

    const ValueAndGradient negative_ucb = [&](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
        const auto pg = model.posterior_with_gradient(embed(z));
        const double sd = std::sqrt(pg.value.variance);
        Eigen::VectorXd full = pg.d_mean;
        if (sd > 1e-12) full += beta * pg.d_variance / (2.0 * sd);
        grad.resize(a);
        for (Eigen::Index j = 0; j < a; ++j) grad[j] = -full[active[j]];
        return -(pg.value.mean + beta * sd);
    };
    BoxMinimizeOptions minimize_options;
    minimize_options.max_iterations = options.max_iterations;
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(a);
    const Eigen::VectorXd hi = Eigen::VectorXd::Ones(a);
    for (std::size_t r = 0; r < top; ++r) {
        Eigen::VectorXd z0(a);
        for (Eigen::Index j = 0; j < a; ++j) z0[j] = candidates(order[r], active[j]);
        const auto result = minimize_box(negative_ucb, z0, lo, hi, minimize_options);
        if (-result.value > best_value) {
            best_value = -result.value;
            best = embed(result.x);
        }
    }
    return best;
}

void BOConfig::validate(int dims) const {
    if (n_init < 1) throw ConfigError("bo.n_init must be >= 1");
    if (budget < n_init) throw ConfigError("bo.budget must be >= bo.n_init");
    if (!(ucb_beta >= 0.0)) throw ConfigError("bo.ucb_beta must be >= 0");
    if (acq_probe_points < 0 || acq_restarts < 0) throw ConfigError("bo acquisition counts must be >= 0");
    if (acq_probe_points == 0 && acq_restarts == 0) {
        throw ConfigError("bo needs probe points or acquisition restarts");
    }
    if (fit_restarts < 1) throw ConfigError("bo.fit_restarts must be >= 1");
    // Feasibility of d is checked by a throwaway draw.
    Rng probe(0);
    dropout_select(dropout, dims, probe);
}

BOTrace run_bo(const Objective& objective, const Eigen::VectorXd& lower,
               const Eigen::VectorXd& upper, const BOConfig& cfg,
               const EvaluationObserver& observer) {
    const auto dims = static_cast<int>(lower.size());
    if (dims < 1 || upper.size() != lower.size() || !(upper.array() > lower.array()).all()) {
        throw ConfigError("run_bo needs lower < upper in every dimension");
    }
    cfg.validate(dims);
    Rng rng(cfg.seed);
    const Eigen::VectorXd span = upper - lower;
    auto to_box = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
        return (lower + span.cwiseProduct(u)).cwiseMax(lower).cwiseMin(upper);
    };

    BOTrace trace;
    trace.best_objective = -std::numeric_limits<double>::infinity();
    std::vector<Eigen::VectorXd> unit_points;
    std::vector<double> values;

    auto evaluate = [&](const Eigen::VectorXd& u, bool initial) {
        Evaluation e;
        e.x = to_box(u);
        e.seed_used = cfg.objective_seed;
        e.initial = initial;
        try {
            e.objective = objective(e.x);
        } catch (const SimulationStall&) {
            e.failed = true;
            e.objective = cfg.stall_penalty.value_or(std::numeric_limits<double>::quiet_NaN());
        }
        if (!std::isnan(e.objective)) {
            unit_points.push_back(u);
            values.push_back(e.objective);
            if (e.objective > trace.best_objective) {
                trace.best_objective = e.objective;
                trace.best_x = e.x;
            }
        }
        trace.evaluations.push_back(std::move(e));
        trace.incumbent_series.push_back(trace.best_objective);
        if (observer) observer(trace);
    };

    const Eigen::MatrixXd initial = lhs(cfg.n_init, dims, rng);
    for (int i = 0; i < cfg.n_init; ++i) evaluate(initial.row(i).transpose(), true);

    FitOptions fit_options;
    fit_options.restarts = cfg.fit_restarts;
    fit_options.max_iterations = cfg.fit_max_iterations;
    AcquisitionOptions acq_options;
    acq_options.probe_points = cfg.acq_probe_points;
    acq_options.restarts = cfg.acq_restarts;
    std::optional<GPModel> previous;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int it = cfg.n_init; it < cfg.budget; ++it) {
        const auto m = static_cast<Eigen::Index>(values.size());
        if (m < 2) {
            // Not enough data for a surrogate yet; keep exploring uniformly.
            Eigen::VectorXd u(dims);
            for (int j = 0; j < dims; ++j) u[j] = unit(rng);
            evaluate(u, false);
            continue;
        }
        Eigen::MatrixXd x(m, dims);
        Eigen::VectorXd y(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            x.row(i) = unit_points[static_cast<std::size_t>(i)].transpose();
            y[i] = values[static_cast<std::size_t>(i)];
        }
        GPModel model = fit_hyperparameters(x, y, rng, fit_options,
                                            previous ? &*previous : nullptr);
        const auto active = dropout_select(cfg.dropout, dims, rng);
        const Eigen::VectorXd fill_in = (trace.best_x - lower).cwiseQuotient(span);
        const Eigen::VectorXd next =
            maximize_acquisition(model, cfg.ucb_beta, active, fill_in, acq_options, rng);
        previous.emplace(std::move(model));
        evaluate(next, false);
    }
    return trace;
}

}  // namespace todp::bo
