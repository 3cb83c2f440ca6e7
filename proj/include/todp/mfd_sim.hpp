#pragma once

#include <iosfwd>
#include <span>
#include <vector>

namespace todp {

struct NetworkParams {
    double n_jam = 4500.0;  // vehicles
    double v_f = 9.78;      // meters per second

    void validate() const;
};

struct TrajectoryPoint {
    double time = 0.0;     // minutes
    int accumulation = 0;  // vehicles in the reservoir right after the event
};

struct DaySimResult {
    std::vector<double> travel_times;  // minutes, indexed by traveler
    // One point per departure and per arrival, in processing order. The
    // accumulation is piecewise constant between consecutive points.
    std::vector<TrajectoryPoint> trajectory;
    // Distance (m) a vehicle would have covered from the first event up to
    // each trajectory point; lets probes invert the speed integral in O(log n).
    std::vector<double> cumulative_distance;
    int peak_accumulation = 0;
};

// Speed in meters per minute: 60 v_f (1 - n / n_jam)^2, zero at or above jam.
double speed(double n, const NetworkParams& net);

// Accumulation maximizing the production n V(n); n_jam / 3 for this speed law.
double critical_accumulation(const NetworkParams& net);

// Event-based trip-based MFD run for one day. Every traveler departs at
// departures[i] and drives lengths[i] meters; all vehicles in the reservoir
// share the speed V(n(t)). Simultaneous events: departures first, then by id.
// Throws InputError on bad lengths and SimulationStall on gridlock.
DaySimResult simulate_day(std::span<const double> departures, std::span<const double> lengths,
                          const NetworkParams& net);

// Travel time of a fictional traveler that does not add to the accumulation.
// Beyond the last event the network is empty and the probe runs at V(0).
double probe_travel_time(const DaySimResult& result, double departure, double length,
                         const NetworkParams& net);

// Vehicle-minutes: integral of the accumulation step function over [t0, t1].
double integrate_accumulation(const DaySimResult& result, double t0, double t1);

void write_trajectory_csv(std::ostream& out, const DaySimResult& result);

}  // namespace todp
