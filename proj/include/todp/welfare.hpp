#pragma once

#include "todp/dynamics.hpp"
#include "todp/population.hpp"
#include "todp/toll.hpp"

namespace todp {

// Per-capita DKK figures at an equilibrium. The two cost components are
// utility-signed (negative), and sum to the mean of -theta * tc.
struct WelfareReport {
    double welfare_per_capita = 0.0;
    double consumer_surplus_per_capita = 0.0;
    double revenue_per_capita = 0.0;
    double avg_travel_time_cost = 0.0;
    double avg_schedule_delay_cost = 0.0;
    bool include_epsilon = false;
};

struct CostComponents {
    double avg_travel_time_cost = 0.0;
    double avg_schedule_delay_cost = 0.0;
};

CostComponents cost_components(const EquilibriumResult& eq, const Population& population);

// No-toll welfare. Throws MisuseError when eq came from a tolled run.
WelfareReport welfare_nte(const EquilibriumResult& eq, const Population& population,
                          bool include_epsilon = false);

// Tolled welfare as consumer surplus plus revenue; also recomputes it from
// travel-time and schedule costs alone and throws NumericalError if the two
// disagree beyond 1e-9 DKK. Throws MisuseError if `toll` is not the run's toll.
WelfareReport welfare_todp(const EquilibriumResult& eq, const Population& population,
                           const TollProfile& toll, double toll_scale,
                           bool include_epsilon = false);

// Dispatches on whether eq carries a toll.
WelfareReport welfare(const EquilibriumResult& eq, const Population& population,
                      bool include_epsilon = false);

}  // namespace todp
