#include "todp/welfare.hpp"

#include <cmath>

#include "todp/errors.hpp"

namespace todp {

namespace {

void check_shapes(const EquilibriumResult& eq, const Population& population) {
    if (eq.final_slots.size() != population.size() ||
        eq.final_travel_times.size() != population.size()) {
        throw MisuseError("equilibrium result does not match the population");
    }
}

double chosen_epsilon(const EquilibriumResult& eq, std::size_t i) {
    return eq.gumbel_draws[eq.final_costs.offsets()[i] +
                           static_cast<std::size_t>(eq.final_slots[i])];
}

}  // namespace

CostComponents cost_components(const EquilibriumResult& eq, const Population& population) {
    check_shapes(eq, population);
    CostComponents c;
    for (std::size_t i = 0; i < population.size(); ++i) {
        const auto& p = population[i];
        const auto tc = trip_cost(p, eq.final_departures[i], eq.final_travel_times[i]);
        c.avg_travel_time_cost -= p.value_of_time * tc.travel_time;
        c.avg_schedule_delay_cost -= p.value_of_time * tc.schedule_delay;
    }
    const double n = static_cast<double>(population.size());
    c.avg_travel_time_cost /= n;
    c.avg_schedule_delay_cost /= n;
    return c;
}

WelfareReport welfare_nte(const EquilibriumResult& eq, const Population& population,
                          bool include_epsilon) {
    if (eq.toll) throw MisuseError("welfare_nte called on a tolled equilibrium");
    const auto components = cost_components(eq, population);
    double epsilon = 0.0;
    if (include_epsilon) {
        for (std::size_t i = 0; i < population.size(); ++i) epsilon += chosen_epsilon(eq, i);
        epsilon /= static_cast<double>(population.size());
    }
    WelfareReport r;
    r.include_epsilon = include_epsilon;
    r.avg_travel_time_cost = components.avg_travel_time_cost;
    r.avg_schedule_delay_cost = components.avg_schedule_delay_cost;
    r.welfare_per_capita =
        components.avg_travel_time_cost + components.avg_schedule_delay_cost + epsilon;
    r.consumer_surplus_per_capita = r.welfare_per_capita;
    r.revenue_per_capita = 0.0;
    return r;
}

WelfareReport welfare_todp(const EquilibriumResult& eq, const Population& population,
                           const TollProfile& toll, double toll_scale, bool include_epsilon) {
    if (!eq.toll || !(*eq.toll == toll) || eq.toll_scale != toll_scale) {
        throw MisuseError("welfare_todp: toll does not match the equilibrium run");
    }
    const auto components = cost_components(eq, population);
    double surplus = 0.0;
    double revenue = 0.0;
    double epsilon = 0.0;
    for (std::size_t i = 0; i < population.size(); ++i) {
        const auto& p = population[i];
        const double dep = eq.final_departures[i];
        const double payment = toll(dep) * p.trip_length * toll_scale;
        surplus += experienced_cost(p, dep, eq.final_travel_times[i], toll, toll_scale);
        revenue += payment;
        if (include_epsilon) epsilon += chosen_epsilon(eq, i);
    }
    const double n = static_cast<double>(population.size());
    WelfareReport r;
    r.include_epsilon = include_epsilon;
    r.consumer_surplus_per_capita = (surplus + epsilon) / n;
    r.revenue_per_capita = revenue / n;
    r.welfare_per_capita = r.consumer_surplus_per_capita + r.revenue_per_capita;
    r.avg_travel_time_cost = components.avg_travel_time_cost;
    r.avg_schedule_delay_cost = components.avg_schedule_delay_cost;

    const double direct =
        components.avg_travel_time_cost + components.avg_schedule_delay_cost + epsilon / n;
    if (std::abs(direct - r.welfare_per_capita) > 1e-9) {
        throw NumericalError("welfare identity violated: CS + RR = " +
                             std::to_string(r.welfare_per_capita) + ", direct = " +
                             std::to_string(direct));
    }
    return r;
}

WelfareReport welfare(const EquilibriumResult& eq, const Population& population,
                      bool include_epsilon) {
    if (eq.toll) return welfare_todp(eq, population, *eq.toll, eq.toll_scale, include_epsilon);
    return welfare_nte(eq, population, include_epsilon);
}

}  // namespace todp
