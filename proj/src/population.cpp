#include "todp/population.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <tuple>

#include "todp/errors.hpp"

namespace todp {

void PopulationConfig::validate() const {
    if (n_travelers <= 0) throw ConfigError("population.n_travelers must be positive");
    if (!(trip_length_sd >= 0.0)) throw ConfigError("population.trip_length_sd must be >= 0");
    if (!(value_of_time > 0.0)) throw ConfigError("population.value_of_time must be positive");
    for (const auto& b : penalty_bounds) {
        if (!(b.lo < b.hi)) throw ConfigError("population.penalty bounds need lo < hi");
    }
    if (penalty_cov[0][1] != penalty_cov[1][0]) {
        throw ConfigError("population.penalty_cov must be symmetric");
    }
    psd_cholesky_2x2(penalty_cov);
    if (!(desired_arrival_lo <= desired_arrival_hi)) {
        throw ConfigError("population.desired_arrival_lo must not exceed desired_arrival_hi");
    }
    if (!(window_step > 0.0)) throw ConfigError("population.window_step must be positive");
    if (!(window_after > 0.0)) throw ConfigError("population.window_after must be positive");
    if (!(window_before >= window_after)) {
        throw ConfigError("population.window_before must be >= window_after");
    }
    if (desired_arrival_hi - window_after < 0.0) {
        throw ConfigError("population time windows would lie entirely before t=0");
    }
}

double sample_truncated_normal(double mean, double sd, double lo, double hi, Rng& rng,
                               int max_rejections) {
    if (!(lo < hi) || !(sd >= 0.0)) {
        throw SamplingError("truncated normal needs lo < hi and sd >= 0");
    }
    if (sd == 0.0) {
        if (mean < lo || mean > hi) throw SamplingError("degenerate normal outside bounds");
        return mean;
    }
    std::normal_distribution<double> normal(mean, sd);
    for (int i = 0; i < max_rejections; ++i) {
        const double x = normal(rng);
        if (x >= lo && x <= hi) return x;
    }
    throw SamplingError("truncated normal: interval [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "] has negligible mass");
}

std::array<std::array<double, 2>, 2> psd_cholesky_2x2(
    const std::array<std::array<double, 2>, 2>& cov) {
    constexpr double tol = 1e-14;
    const double a = cov[0][0];
    const double b = cov[1][0];
    const double c = cov[1][1];
    if (a < -tol || c < -tol) throw ConfigError("penalty covariance is not PSD");
    std::array<std::array<double, 2>, 2> l{};
    if (a > tol) {
        l[0][0] = std::sqrt(a);
        l[1][0] = b / l[0][0];
    } else if (std::abs(b) > tol) {
        throw ConfigError("penalty covariance is not PSD");
    }
    const double rest = c - l[1][0] * l[1][0];
    if (rest < -tol * std::max(1.0, c)) throw ConfigError("penalty covariance is not PSD");
    l[1][1] = std::sqrt(std::max(0.0, rest));
    return l;
}

std::pair<double, double> sample_penalties(const PopulationConfig& cfg, Rng& rng,
                                           int max_rejections) {
    const auto l = psd_cholesky_2x2(cfg.penalty_cov);
    const auto& [sde_b, sdl_b] = cfg.penalty_bounds;
    std::normal_distribution<double> z;
    for (int i = 0; i < max_rejections; ++i) {
        const double z0 = z(rng);
        const double z1 = z(rng);
        const double sde = cfg.penalty_mean[0] + l[0][0] * z0;
        const double sdl = cfg.penalty_mean[1] + l[1][0] * z0 + l[1][1] * z1;
        if (sde >= sde_b.lo && sde <= sde_b.hi && sdl >= sdl_b.lo && sdl <= sdl_b.hi) {
            return {sde, sdl};
        }
    }
    throw SamplingError("penalty sampling: bounds have negligible mass");
}

namespace {

std::vector<double> departure_menu(double t_star, const PopulationConfig& cfg) {
    const auto n_slots = static_cast<int>(
        std::floor((cfg.window_before - cfg.window_after) / cfg.window_step + 1e-9)) + 1;
    std::vector<double> menu;
    menu.reserve(static_cast<std::size_t>(n_slots));
    for (int s = 0; s < n_slots; ++s) {
        const double t = t_star - cfg.window_before + s * cfg.window_step;
        if (t >= 0.0) menu.push_back(t);
    }
    return menu;
}

}  // namespace

Population build_population(const PopulationConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> arrival(cfg.desired_arrival_lo,
                                                   cfg.desired_arrival_hi);
    Population population;
    population.reserve(static_cast<std::size_t>(cfg.n_travelers));
    for (int i = 0; i < cfg.n_travelers; ++i) {
        TravelerProfile p;
        p.id = i;
        // L_i > 0: open lower bound handled by rejecting exact zeros below.
        do {
            p.trip_length = sample_truncated_normal(cfg.trip_length_mean, cfg.trip_length_sd,
                                                    0.0, std::numeric_limits<double>::infinity(),
                                                    rng);
        } while (p.trip_length <= 0.0);
        p.value_of_time = cfg.value_of_time;
        std::tie(p.sde, p.sdl) = sample_penalties(cfg, rng);
        p.desired_arrival = cfg.desired_arrival_lo == cfg.desired_arrival_hi
                                ? cfg.desired_arrival_lo
                                : arrival(rng);
        p.time_window = departure_menu(p.desired_arrival, cfg);
        if (p.time_window.empty()) {
            throw ConfigError("traveler " + std::to_string(i) + " has an empty departure menu");
        }
        population.push_back(std::move(p));
    }
    return population;
}

void write_population_csv(std::ostream& out, const Population& population) {
    out << "id,L,theta,sde,sdl,t_star\n";
    out.precision(17);
    for (const auto& p : population) {
        out << p.id << ',' << p.trip_length << ',' << p.value_of_time << ',' << p.sde << ','
            << p.sdl << ',' << p.desired_arrival << '\n';
    }
}

}  // namespace todp
