#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "todp/mfd_sim.hpp"
#include "todp/population.hpp"
#include "todp/toll.hpp"

namespace todp {

// Ragged per-traveler, per-menu-slot cost arrays (DKK).
class CostTable {
public:
    CostTable() = default;
    explicit CostTable(const Population& population);

    std::size_t travelers() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t slots(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
    std::size_t entries() const noexcept { return perceived_.size(); }

    std::span<double> perceived(std::size_t i) { return {perceived_.data() + offsets_[i], slots(i)}; }
    std::span<const double> perceived(std::size_t i) const {
        return {perceived_.data() + offsets_[i], slots(i)};
    }
    std::span<double> experienced(std::size_t i) {
        return {experienced_.data() + offsets_[i], slots(i)};
    }
    std::span<const double> experienced(std::size_t i) const {
        return {experienced_.data() + offsets_[i], slots(i)};
    }

    std::vector<double>& perceived_flat() noexcept { return perceived_; }
    const std::vector<double>& perceived_flat() const noexcept { return perceived_; }
    std::vector<double>& experienced_flat() noexcept { return experienced_; }
    const std::vector<double>& experienced_flat() const noexcept { return experienced_; }
    const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }

private:
    std::vector<std::size_t> offsets_;
    std::vector<double> perceived_;
    std::vector<double> experienced_;
};

// How a traveler picks a departure slot from the logit model on perceived costs.
enum class ChoiceRule {
    // argmax_s (C(s) + eps(s)) with the traveler's fixed Gumbel draws of scale
    // 1/mu. Each day's choice is distributed exactly as the logit model.
    gumbel_max,
    // Fresh inverse-CDF draw from the logit probabilities every day.
    resample,
};

struct DayToDayConfig {
    double logit_scale = 0.2;       // mu, per DKK
    double learning_weight = 0.7;   // omega
    double toll_scale = 2e-4;       // w, per meter
    int max_days = 80;
    double convergence_tol = 0.5;   // DKK
    int stable_days = 5;
    ChoiceRule choice_rule = ChoiceRule::gumbel_max;
    std::uint64_t seed = 1;

    void validate() const;
};

struct DaySummary {
    int day = 0;
    double inconsistency = 0.0;          // NaN on day 0
    double mean_consumer_surplus = 0.0;  // DKK, toll included
    double welfare = 0.0;                // DKK, consumer surplus + revenue
    int peak_accumulation = 0;
};

struct EquilibriumResult {
    CostTable final_costs;  // perception used on the last day and what it produced
    std::vector<int> final_slots;
    std::vector<double> final_departures;
    std::vector<double> final_travel_times;
    DaySimResult final_day;
    std::vector<double> inconsistency_series;  // days 1..days_run
    std::vector<DaySummary> day_results;       // days 0..days_run
    bool converged = false;
    int days_run = 0;
    std::vector<double> gumbel_draws;  // DKK, laid out like final_costs
    std::optional<TollProfile> toll;
    double toll_scale = 0.0;
};

// Travel-time and schedule-delay minutes behind one trip; tc = travel_time + schedule_delay
// where the schedule term is already weighted by SDE or SDL.
struct TripCost {
    double travel_time = 0.0;
    double schedule_delay = 0.0;
    double total() const { return travel_time + schedule_delay; }
};

TripCost trip_cost(const TravelerProfile& traveler, double departure, double travel_time);

// Monetary utility of a trip: -theta * tc - Toll(dep) * L * w.
double experienced_cost(const TravelerProfile& traveler, double departure, double travel_time,
                        const std::optional<TollProfile>& toll, double toll_scale);

std::vector<double> choice_probabilities(std::span<const double> perceived_row,
                                         double logit_scale);

inline double learning_update(double perceived, double experienced, double weight) {
    return weight * perceived + (1.0 - weight) * experienced;
}

void learning_update(CostTable& costs, double weight);

// L1 gap between perceived and experienced tables divided by the traveler count.
double inconsistency(const CostTable& costs);

// Drives the day-to-day process one day at a time. Day 0 uses uniformly drawn
// departures and seeds the perception with its experienced costs; later days
// choose from the logit model, then learn.
class DayToDayProcess {
public:
    DayToDayProcess(const Population& population, const NetworkParams& net,
                    std::optional<TollProfile> toll, const DayToDayConfig& cfg);

    // Simulates the next day and returns its summary.
    const DaySummary& step();

    int day() const noexcept { return day_; }
    bool converged() const noexcept { return stable_count_ >= cfg_.stable_days; }
    const CostTable& costs() const noexcept { return costs_; }
    const DaySimResult& last_day() const noexcept { return sim_; }
    const std::vector<int>& slots() const noexcept { return slots_; }
    const std::vector<double>& gumbel_draws() const noexcept { return gumbel_; }

    EquilibriumResult result() const;

private:
    void choose_slots();
    void evaluate_day();

    const Population& population_;
    NetworkParams net_;
    std::optional<TollProfile> toll_;
    DayToDayConfig cfg_;
    Rng rng_;
    CostTable costs_;
    std::vector<double> gumbel_;
    std::vector<double> toll_payment_;  // Toll(t) * L * w per traveler-slot
    std::vector<int> slots_;
    std::vector<double> departures_;
    std::vector<double> lengths_;
    DaySimResult sim_;
    std::vector<DaySummary> history_;
    std::vector<double> inconsistency_series_;
    int day_ = -1;
    int stable_count_ = 0;
};

using DayObserver = std::function<void(int day, const DaySimResult&)>;

// Runs to convergence (stable_days consecutive days under convergence_tol) or
// max_days. Non-convergence is reported through the converged flag.
EquilibriumResult run_day_to_day(const Population& population, const NetworkParams& net,
                                 const std::optional<TollProfile>& toll,
                                 const DayToDayConfig& cfg, const DayObserver& observer = {});

}  // namespace todp
