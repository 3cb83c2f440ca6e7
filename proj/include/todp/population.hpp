#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <utility>
#include <vector>

namespace todp {

using Rng = std::mt19937_64;

struct TravelerProfile {
    int id = 0;
    double trip_length = 0.0;      // meters
    double value_of_time = 0.0;    // DKK per minute
    double sde = 0.0;              // early-arrival penalty factor
    double sdl = 0.0;              // late-arrival penalty factor
    double desired_arrival = 0.0;  // minutes from window start
    std::vector<double> time_window;  // candidate departure minutes, increasing

    bool operator==(const TravelerProfile&) const = default;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool operator==(const Interval&) const = default;
};

// Defaults reproduce the commuter population of the reference experiments.
struct PopulationConfig {
    int n_travelers = 3700;
    double trip_length_mean = 4600.0;
    double trip_length_sd = 920.0;
    double value_of_time = 1.1;
    std::array<double, 2> penalty_mean{0.5, 4.0};
    std::array<std::array<double, 2>, 2> penalty_cov{{{0.0025, 0.01}, {0.01, 0.16}}};
    std::array<Interval, 2> penalty_bounds{Interval{0.3, 0.7}, Interval{2.5, 5.5}};
    double desired_arrival_lo = 80.0;
    double desired_arrival_hi = 90.0;
    // The menu runs from T* - window_before to T* - window_after in steps of
    // window_step. window_after must be positive so that every slot precedes T*.
    double window_before = 60.0;
    double window_after = 5.0;
    double window_step = 5.0;
    std::uint64_t seed = 42;

    void validate() const;
};

using Population = std::vector<TravelerProfile>;

// Normal(mean, sd) conditioned on [lo, hi] by rejection. Throws SamplingError
// after max_rejections consecutive misses.
double sample_truncated_normal(double mean, double sd, double lo, double hi, Rng& rng,
                               int max_rejections = 100000);

// Bivariate normal (SDE, SDL) draw, rejection-resampled into penalty_bounds.
std::pair<double, double> sample_penalties(const PopulationConfig& cfg, Rng& rng,
                                           int max_rejections = 100000);

// Lower-triangular factor of a 2x2 PSD matrix; zero pivots are allowed when the
// matching off-diagonal entries vanish. Throws ConfigError otherwise.
std::array<std::array<double, 2>, 2> psd_cholesky_2x2(
    const std::array<std::array<double, 2>, 2>& cov);

Population build_population(const PopulationConfig& cfg);

void write_population_csv(std::ostream& out, const Population& population);

}  // namespace todp
