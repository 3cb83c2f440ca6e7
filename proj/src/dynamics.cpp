#include "todp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "todp/errors.hpp"

namespace todp {

CostTable::CostTable(const Population& population) {
    offsets_.reserve(population.size() + 1);
    offsets_.push_back(0);
    for (const auto& p : population) offsets_.push_back(offsets_.back() + p.time_window.size());
    perceived_.assign(offsets_.back(), 0.0);
    experienced_.assign(offsets_.back(), 0.0);
}

void DayToDayConfig::validate() const {
    if (!(logit_scale > 0.0)) throw ConfigError("dynamics.logit_scale must be positive");
    if (!(learning_weight > 0.0 && learning_weight < 1.0)) {
        throw ConfigError("dynamics.learning_weight must lie in (0, 1)");
    }
    if (!(toll_scale >= 0.0)) throw ConfigError("dynamics.toll_scale must be >= 0");
    if (max_days < 1) throw ConfigError("dynamics.max_days must be >= 1");
    if (!(convergence_tol > 0.0)) throw ConfigError("dynamics.convergence_tol must be positive");
    if (stable_days < 1) throw ConfigError("dynamics.stable_days must be >= 1");
}

TripCost trip_cost(const TravelerProfile& traveler, double departure, double travel_time) {
    const double arrival = departure + travel_time;
    const double slack = traveler.desired_arrival - arrival;
    const double delay = slack >= 0.0 ? traveler.sde * slack : traveler.sdl * (-slack);
    return {travel_time, delay};
}

double experienced_cost(const TravelerProfile& traveler, double departure, double travel_time,
                        const std::optional<TollProfile>& toll, double toll_scale) {
    const double generalized =
        -traveler.value_of_time * trip_cost(traveler, departure, travel_time).total();
    if (!toll) return generalized;
    return generalized - (*toll)(departure) * traveler.trip_length * toll_scale;
}

std::vector<double> choice_probabilities(std::span<const double> perceived_row,
                                         double logit_scale) {
    std::vector<double> p(perceived_row.size());
    if (p.empty()) return p;
    const double best = *std::max_element(perceived_row.begin(), perceived_row.end());
    double total = 0.0;
    for (std::size_t s = 0; s < p.size(); ++s) {
        p[s] = std::exp(logit_scale * (perceived_row[s] - best));
        total += p[s];
    }
    for (auto& x : p) x /= total;
    return p;
}

void learning_update(CostTable& costs, double weight) {
    auto& perceived = costs.perceived_flat();
    const auto& experienced = costs.experienced_flat();
    for (std::size_t k = 0; k < perceived.size(); ++k) {
        perceived[k] = learning_update(perceived[k], experienced[k], weight);
    }
}

double inconsistency(const CostTable& costs) {
    const auto& perceived = costs.perceived_flat();
    const auto& experienced = costs.experienced_flat();
    if (perceived.size() != experienced.size()) {
        throw InputError("perceived and experienced tables differ in shape");
    }
    if (costs.travelers() == 0) return 0.0;
    double gap = 0.0;
    for (std::size_t k = 0; k < perceived.size(); ++k) {
        gap += std::abs(perceived[k] - experienced[k]);
    }
    return gap / static_cast<double>(costs.travelers());
}

DayToDayProcess::DayToDayProcess(const Population& population, const NetworkParams& net,
                                 std::optional<TollProfile> toll, const DayToDayConfig& cfg)
    : population_(population),
      net_(net),
      toll_(std::move(toll)),
      cfg_(cfg),
      rng_(cfg.seed),
      costs_(population) {
    cfg_.validate();
    net_.validate();
    if (population_.empty()) throw InputError("population is empty");

    // Unobserved utility terms, fixed for the whole run (and identical across
    // toll scenarios sharing a seed).
    std::extreme_value_distribution<double> gumbel(0.0, 1.0 / cfg_.logit_scale);
    gumbel_.resize(costs_.entries());
    for (auto& e : gumbel_) e = gumbel(rng_);

    toll_payment_.assign(costs_.entries(), 0.0);
    if (toll_) {
        const auto& offsets = costs_.offsets();
        for (std::size_t i = 0; i < population_.size(); ++i) {
            const auto& p = population_[i];
            for (std::size_t s = 0; s < p.time_window.size(); ++s) {
                toll_payment_[offsets[i] + s] =
                    (*toll_)(p.time_window[s]) * p.trip_length * cfg_.toll_scale;
            }
        }
    }

    slots_.assign(population_.size(), 0);
    departures_.assign(population_.size(), 0.0);
    lengths_.reserve(population_.size());
    for (const auto& p : population_) lengths_.push_back(p.trip_length);
}

void DayToDayProcess::choose_slots() {
    const auto& offsets = costs_.offsets();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < population_.size(); ++i) {
        const std::size_t n_slots = costs_.slots(i);
        int chosen = 0;
        if (day_ == 0) {
            chosen = std::uniform_int_distribution<int>(0, static_cast<int>(n_slots) - 1)(rng_);
        } else if (cfg_.choice_rule == ChoiceRule::gumbel_max) {
            const auto row = costs_.perceived(i);
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < n_slots; ++s) {
                const double u = row[s] + gumbel_[offsets[i] + s];
                if (u > best) {
                    best = u;
                    chosen = static_cast<int>(s);
                }
            }
        } else {
            const auto probs = choice_probabilities(costs_.perceived(i), cfg_.logit_scale);
            const double u = unit(rng_);
            double cum = 0.0;
            chosen = static_cast<int>(n_slots) - 1;
            for (std::size_t s = 0; s < n_slots; ++s) {
                cum += probs[s];
                if (u < cum) {
                    chosen = static_cast<int>(s);
                    break;
                }
            }
        }
        slots_[i] = chosen;
        departures_[i] = population_[i].time_window[static_cast<std::size_t>(chosen)];
    }
}

void DayToDayProcess::evaluate_day() {
    const auto& offsets = costs_.offsets();
    auto& experienced = costs_.experienced_flat();
    double surplus = 0.0;
    double revenue = 0.0;
    for (std::size_t i = 0; i < population_.size(); ++i) {
        const auto& p = population_[i];
        for (std::size_t s = 0; s < p.time_window.size(); ++s) {
            const double dep = p.time_window[s];
            const bool chosen = static_cast<int>(s) == slots_[i];
            const double tt = chosen ? sim_.travel_times[i]
                                     : probe_travel_time(sim_, dep, p.trip_length, net_);
            const std::size_t k = offsets[i] + s;
            experienced[k] =
                -p.value_of_time * trip_cost(p, dep, tt).total() - toll_payment_[k];
            if (chosen) {
                surplus += experienced[k];
                revenue += toll_payment_[k];
            }
        }
    }
    const double n = static_cast<double>(population_.size());
    DaySummary summary;
    summary.day = day_;
    summary.mean_consumer_surplus = surplus / n;
    summary.welfare = (surplus + revenue) / n;
    summary.peak_accumulation = sim_.peak_accumulation;
    summary.inconsistency = std::numeric_limits<double>::quiet_NaN();
    history_.push_back(summary);
}

const DaySummary& DayToDayProcess::step() {
    ++day_;
    if (day_ > 0) {
        // Day 1 starts from C_1 = c_0, which the update reproduces because the
        // day-0 perception was set equal to the day-0 experience.
        learning_update(costs_, cfg_.learning_weight);
    }
    choose_slots();
    sim_ = simulate_day(departures_, lengths_, net_);
    evaluate_day();
    if (day_ == 0) {
        costs_.perceived_flat() = costs_.experienced_flat();
    } else {
        const double gap = inconsistency(costs_);
        history_.back().inconsistency = gap;
        inconsistency_series_.push_back(gap);
        stable_count_ = gap < cfg_.convergence_tol ? stable_count_ + 1 : 0;
    }
    return history_.back();
}

EquilibriumResult DayToDayProcess::result() const {
    EquilibriumResult r;
    r.final_costs = costs_;
    r.final_slots = slots_;
    r.final_departures = departures_;
    r.final_travel_times = sim_.travel_times;
    r.final_day = sim_;
    r.inconsistency_series = inconsistency_series_;
    r.day_results = history_;
    r.converged = converged();
    r.days_run = std::max(day_, 0);
    r.gumbel_draws = gumbel_;
    r.toll = toll_;
    r.toll_scale = cfg_.toll_scale;
    return r;
}

EquilibriumResult run_day_to_day(const Population& population, const NetworkParams& net,
                                 const std::optional<TollProfile>& toll,
                                 const DayToDayConfig& cfg, const DayObserver& observer) {
    DayToDayProcess process(population, net, toll, cfg);
    do {
        process.step();
        if (observer) observer(process.day(), process.last_day());
    } while (!process.converged() && process.day() < cfg.max_days);
    return process.result();
}

}  // namespace todp
