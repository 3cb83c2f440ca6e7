#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "todp/errors.hpp"
#include "todp/mfd_sim.hpp"

using namespace todp;

namespace {

// Distance covered between t0 and t1 along a piecewise-constant trajectory,
// summed segment by segment without the simulator's distance marks.
double integrate_speed(const DaySimResult& r, double t0, double t1, const NetworkParams& net) {
    double dist = 0.0;
    const auto& tr = r.trajectory;
    if (t0 < tr.front().time) dist += speed(0, net) * (std::min(t1, tr.front().time) - t0);
    for (std::size_t j = 0; j < tr.size(); ++j) {
        const double a = std::max(t0, tr[j].time);
        const double b = std::min(t1, j + 1 < tr.size() ? tr[j + 1].time : INFINITY);
        if (b > a) dist += speed(tr[j].accumulation, net) * (b - a);
    }
    return dist;
}

}  // namespace

TEST_CASE("speed law") {
    const NetworkParams net;
    CHECK(speed(0, net) == doctest::Approx(586.8));
    CHECK(speed(4500, net) == 0.0);
    CHECK(speed(6000, net) == 0.0);
    CHECK(speed(1500, net) == doctest::Approx(586.8 * 4.0 / 9.0));
    CHECK(speed(1500, net) == doctest::Approx(260.8).epsilon(1e-4));
}

TEST_CASE("critical accumulation maximizes production") {
    CHECK(critical_accumulation(NetworkParams{}) == doctest::Approx(1500.0));
    CHECK(critical_accumulation(NetworkParams{3.0, 9.78}) == doctest::Approx(1.0));
    const NetworkParams big{6000.0, 9.78};
    double best_n = 0.0, best = -1.0;
    for (double n = 0.0; n <= 6000.0; n += 0.5) {
        const double q = n * speed(n, big);
        if (q > best) {
            best = q;
            best_n = n;
        }
    }
    CHECK(critical_accumulation(big) == doctest::Approx(best_n).epsilon(1e-3));
    CHECK(best_n == doctest::Approx(2000.0).epsilon(1e-3));
}

TEST_CASE("single traveler runs at V(1)") {
    const NetworkParams net;
    const std::vector<double> dep{0.0}, len{4693.44};
    const auto r = simulate_day(dep, len, net);
    const double expected = 4693.44 / (586.8 * std::pow(1.0 - 1.0 / 4500.0, 2));
    CHECK(r.travel_times[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(8.00192).epsilon(1e-5));
    REQUIRE(r.trajectory.size() == 2);
    CHECK(r.trajectory[0].time == 0.0);
    CHECK(r.trajectory[0].accumulation == 1);
    CHECK(r.trajectory[1].time == doctest::Approx(expected));
    CHECK(r.trajectory[1].accumulation == 0);
    CHECK(r.peak_accumulation == 1);
}

TEST_CASE("two travelers") {
    const NetworkParams net;
    SUBCASE("identical trips get identical times") {
        const auto r = simulate_day(std::vector<double>{3.0, 3.0}, std::vector<double>{4000, 4000}, net);
        CHECK(r.travel_times[0] == r.travel_times[1]);
        CHECK(r.travel_times[0] == doctest::Approx(4000.0 / speed(2, net)));
    }
    SUBCASE("no overlap means no interaction") {
        const auto r = simulate_day(std::vector<double>{0.0, 30.0}, std::vector<double>{4000, 5000}, net);
        CHECK(r.travel_times[0] == doctest::Approx(4000.0 / speed(1, net)).epsilon(1e-12));
        CHECK(r.travel_times[1] == doctest::Approx(5000.0 / speed(1, net)).epsilon(1e-12));
    }
    SUBCASE("departure at the arrival instant is processed first") {
        const double t1 = 4000.0 / speed(1, net);
        const auto r = simulate_day(std::vector<double>{0.0, t1}, std::vector<double>{4000, 4000}, net);
        CHECK(r.trajectory[1].time == t1);
        CHECK(r.trajectory[1].accumulation == 2);
        CHECK(r.peak_accumulation == 2);
    }
}

TEST_CASE("random instances conserve vehicles and satisfy the distance identity") {
    const NetworkParams net;
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = std::uniform_int_distribution<int>(1, 400)(rng);
        std::uniform_real_distribution<double> dep(0.0, 60.0), len(500.0, 9000.0);
        std::vector<double> d(n), l(n);
        for (int i = 0; i < n; ++i) {
            d[i] = dep(rng);
            l[i] = len(rng);
        }
        const auto r = simulate_day(d, l, net);
        REQUIRE(r.trajectory.size() == static_cast<std::size_t>(2 * n));
        CHECK(r.trajectory.back().accumulation == 0);
        for (std::size_t j = 1; j < r.trajectory.size(); ++j) {
            REQUIRE(r.trajectory[j].time >= r.trajectory[j - 1].time);
            REQUIRE(r.trajectory[j].accumulation >= 0);
        }
        for (int i = 0; i < n; ++i) {
            const double covered = integrate_speed(r, d[i], d[i] + r.travel_times[i], net);
            REQUIRE(std::abs(covered - l[i]) <= 1e-4 * l[i]);
        }
    }
}

TEST_CASE("duplicating the population never shortens a trip") {
    const NetworkParams net;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dep(0.0, 30.0), len(1000.0, 8000.0);
    std::vector<double> d(300), l(300);
    for (int i = 0; i < 300; ++i) {
        d[i] = dep(rng);
        l[i] = len(rng);
    }
    const auto single = simulate_day(d, l, net);
    std::vector<double> d2 = d, l2 = l;
    d2.insert(d2.end(), d.begin(), d.end());
    l2.insert(l2.end(), l.begin(), l.end());
    const auto doubled = simulate_day(d2, l2, net);
    for (int i = 0; i < 300; ++i) CHECK(doubled.travel_times[i] >= single.travel_times[i] - 1e-9);
}

TEST_CASE("simulation is a pure function of its inputs") {
    const std::vector<double> d{1.0, 0.5, 2.0, 0.5}, l{3000, 2000, 2500, 4000};
    const auto a = simulate_day(d, l, NetworkParams{});
    const auto b = simulate_day(d, l, NetworkParams{});
    CHECK(a.travel_times == b.travel_times);
    CHECK(a.cumulative_distance == b.cumulative_distance);
}

TEST_CASE("input errors and gridlock") {
    const NetworkParams net;
    CHECK_THROWS_AS(simulate_day(std::vector<double>{0.0}, std::vector<double>{0.0}, net), InputError);
    CHECK_THROWS_AS(simulate_day(std::vector<double>{0.0}, std::vector<double>{-1.0}, net), InputError);
    CHECK_THROWS_AS(simulate_day(std::vector<double>{NAN}, std::vector<double>{1.0}, net), InputError);
    const NetworkParams tiny{2.0, 9.78};
    try {
        simulate_day(std::vector<double>{0.0, 1.0}, std::vector<double>{5000, 5000}, tiny);
        FAIL("expected a stall");
    } catch (const SimulationStall& e) {
        CHECK(e.time() == 1.0);
        CHECK(e.accumulation() == 2);
    }
}

TEST_CASE("probe travel times") {
    const NetworkParams net;
    SUBCASE("empty network runs at free flow") {
        const DaySimResult empty = simulate_day(std::vector<double>{}, std::vector<double>{}, net);
        CHECK(empty.trajectory.empty());
        CHECK(probe_travel_time(empty, 10.0, 4000.0, net) == doctest::Approx(4000.0 / 586.8));
    }
    SUBCASE("beyond the last event") {
        const auto r = simulate_day(std::vector<double>{0.0}, std::vector<double>{1000.0}, net);
        CHECK(probe_travel_time(r, 50.0, 4000.0, net) == doctest::Approx(4000.0 / 586.8));
    }
    SUBCASE("short probes take short times") {
        const auto r = simulate_day(std::vector<double>{0.0}, std::vector<double>{5000.0}, net);
        CHECK(probe_travel_time(r, 1.0, 1e-6, net) < 1e-8);
    }
    SUBCASE("at a solo traveler's departure") {
        const auto r = simulate_day(std::vector<double>{0.0}, std::vector<double>{5000.0}, net);
        CHECK(probe_travel_time(r, 0.0, 5000.0, net) == doctest::Approx(r.travel_times[0]).epsilon(1e-12));
    }
    SUBCASE("two-phase trajectory") {
        // Two vehicles in the network from t=0 to t=5, empty afterwards.
        const double l = 5.0 * speed(2, net);
        const auto r = simulate_day(std::vector<double>{0.0, 0.0}, std::vector<double>{l, l}, net);
        CHECK(r.trajectory.back().time == doctest::Approx(5.0));
        // Departing at t=2: three minutes at V(2), then the rest at V(0).
        const double length = 3.0 * speed(2, net) + 2.0 * speed(0, net);
        CHECK(probe_travel_time(r, 2.0, length, net) == doctest::Approx(5.0).epsilon(1e-12));
        const double inside = 2.0 * speed(2, net);
        CHECK(probe_travel_time(r, 2.0, inside, net) == doctest::Approx(2.0).epsilon(1e-12));
        // Departing before the first event starts on an empty network.
        const double early = 1.0 * speed(0, net) + 1.0 * speed(2, net);
        CHECK(probe_travel_time(r, -1.0, early, net) == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("accumulation integral") {
    const NetworkParams net;
    const double l = 5.0 * speed(2, net);
    const auto r = simulate_day(std::vector<double>{0.0, 0.0}, std::vector<double>{l, l}, net);
    CHECK(integrate_accumulation(r, 0.0, 5.0) == doctest::Approx(10.0));
    CHECK(integrate_accumulation(r, -3.0, 2.0) == doctest::Approx(4.0));
    CHECK(integrate_accumulation(r, 4.0, 100.0) == doctest::Approx(2.0));
}

TEST_CASE("trajectory csv") {
    const auto r = simulate_day(std::vector<double>{0.0}, std::vector<double>{1000.0}, NetworkParams{});
    std::ostringstream out;
    write_trajectory_csv(out, r);
    CHECK(out.str().rfind("event_time_min,accumulation\n", 0) == 0);
}
