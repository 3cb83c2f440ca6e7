#include "todp/mfd_sim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <utility>

#include "todp/errors.hpp"

namespace todp {

void NetworkParams::validate() const {
    if (!(n_jam > 0.0)) throw ConfigError("network.n_jam must be positive");
    if (!(v_f > 0.0)) throw ConfigError("network.v_f must be positive");
}

double speed(double n, const NetworkParams& net) {
    const double occupancy = std::min(std::max(n, 0.0), net.n_jam) / net.n_jam;
    const double free_flow = 60.0 * net.v_f;
    return free_flow * (1.0 - occupancy) * (1.0 - occupancy);
}

double critical_accumulation(const NetworkParams& net) {
    // d/dn [n (1 - n/nj)^2] = (1 - n/nj)(1 - 3n/nj) vanishes at n = nj/3.
    return net.n_jam / 3.0;
}

DaySimResult simulate_day(std::span<const double> departures, std::span<const double> lengths,
                          const NetworkParams& net) {
    if (departures.size() != lengths.size()) {
        throw InputError("departures and lengths must have the same size");
    }
    const std::size_t n_travelers = departures.size();
    for (std::size_t i = 0; i < n_travelers; ++i) {
        if (!(lengths[i] > 0.0) || !std::isfinite(lengths[i])) {
            throw InputError("trip length of traveler " + std::to_string(i) +
                             " must be positive and finite");
        }
        if (!std::isfinite(departures[i])) {
            throw InputError("departure of traveler " + std::to_string(i) + " is not finite");
        }
    }

    DaySimResult result;
    result.travel_times.assign(n_travelers, 0.0);
    result.trajectory.reserve(2 * n_travelers);
    result.cumulative_distance.reserve(2 * n_travelers);
    if (n_travelers == 0) return result;

    std::vector<std::size_t> order(n_travelers);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return departures[a] < departures[b]; });

    // Every vehicle in the reservoir moves at the same speed, so a vehicle's
    // remaining distance is (its arrival mark - travelled), where travelled is
    // the distance covered since the first event. Arrival order is therefore
    // the order of the marks, and re-predicting all arrivals after an event
    // reduces to recomputing the earliest one at the new speed.
    using Mark = std::pair<double, std::size_t>;
    std::priority_queue<Mark, std::vector<Mark>, std::greater<>> in_network;

    double now = departures[order.front()];
    double travelled = 0.0;
    int accumulation = 0;
    std::size_t next_departure = 0;
    constexpr double inf = std::numeric_limits<double>::infinity();

    auto record = [&] {
        result.trajectory.push_back({now, accumulation});
        result.cumulative_distance.push_back(travelled);
        result.peak_accumulation = std::max(result.peak_accumulation, accumulation);
    };

    while (next_departure < n_travelers || !in_network.empty()) {
        const double v = speed(accumulation, net);
        const double t_dep =
            next_departure < n_travelers ? departures[order[next_departure]] : inf;
        double t_arr = inf;
        if (accumulation > 0) {
            if (v <= 0.0) throw SimulationStall(now, accumulation);
            t_arr = now + (in_network.top().first - travelled) / v;
        }
        if (t_dep <= t_arr) {
            const std::size_t id = order[next_departure++];
            travelled += v * (t_dep - now);
            now = t_dep;
            ++accumulation;
            in_network.push({travelled + lengths[id], id});
        } else {
            const auto [mark, id] = in_network.top();
            in_network.pop();
            travelled = mark;
            now = std::max(now, t_arr);
            --accumulation;
            result.travel_times[id] = now - departures[id];
        }
        record();
    }
    return result;
}

namespace {

// Distance mark of a vehicle driving through the day at V(n(t)), with the mark
// at each trajectory point precomputed by the simulator.
class DistanceMarks {
public:
    DistanceMarks(const DaySimResult& result, const NetworkParams& net)
        : traj_(result.trajectory),
          marks_(result.cumulative_distance),
          net_(net),
          empty_speed_(speed(0.0, net)) {}

    double at(double t) const {
        if (t < traj_.front().time) return marks_.front() - empty_speed_ * (traj_.front().time - t);
        const std::size_t j = segment(t);
        return marks_[j] + segment_speed(j) * (t - traj_[j].time);
    }

    // Earliest time at or after `from` at which the mark reaches `target`.
    double time_of(double target, double from) const {
        const double from_mark = at(from);
        std::size_t search_from = 0;
        if (from >= traj_.front().time) search_from = segment(from) + 1;
        const auto k_it = std::lower_bound(
            marks_.begin() + static_cast<std::ptrdiff_t>(search_from), marks_.end(), target);
        if (k_it == marks_.end()) {
            if (from >= traj_.back().time) return from + (target - from_mark) / empty_speed_;
            return traj_.back().time + (target - marks_.back()) / empty_speed_;
        }
        const auto k = static_cast<std::size_t>(std::distance(marks_.begin(), k_it));
        if (k == search_from) {
            const double v = k == 0 ? empty_speed_ : segment_speed(k - 1);
            return from + (target - from_mark) / v;
        }
        return traj_[k - 1].time + (target - marks_[k - 1]) / segment_speed(k - 1);
    }

private:
    std::size_t segment(double t) const {
        const auto it = std::upper_bound(
            traj_.begin(), traj_.end(), t,
            [](double x, const TrajectoryPoint& p) { return x < p.time; });
        return static_cast<std::size_t>(std::distance(traj_.begin(), it)) - 1;
    }

    double segment_speed(std::size_t j) const {
        return speed(traj_[j].accumulation, net_);
    }

    const std::vector<TrajectoryPoint>& traj_;
    const std::vector<double>& marks_;
    const NetworkParams& net_;
    double empty_speed_;
};

}  // namespace

double probe_travel_time(const DaySimResult& result, double departure, double length,
                         const NetworkParams& net) {
    if (result.trajectory.empty()) return length / speed(0.0, net);
    const DistanceMarks marks(result, net);
    return marks.time_of(marks.at(departure) + length, departure) - departure;
}

double integrate_accumulation(const DaySimResult& result, double t0, double t1) {
    const auto& traj = result.trajectory;
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < traj.size(); ++j) {
        const double a = std::max(t0, traj[j].time);
        const double b = std::min(t1, traj[j + 1].time);
        if (b > a) total += traj[j].accumulation * (b - a);
    }
    return total;
}

void write_trajectory_csv(std::ostream& out, const DaySimResult& result) {
    out << "event_time_min,accumulation\n";
    out.precision(17);
    for (const auto& p : result.trajectory) out << p.time << ',' << p.accumulation << '\n';
}

}  // namespace todp
