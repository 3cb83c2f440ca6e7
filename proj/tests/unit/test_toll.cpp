#include <doctest.h>

#include <cmath>
#include <random>

#include "todp/errors.hpp"
#include "todp/toll.hpp"

using namespace todp;

TEST_CASE("single gaussian toll") {
    const auto toll = TollProfile::single(11.0, 80.0, 18.0);
    CHECK(toll(80.0) == doctest::Approx(11.0));
    CHECK(toll(80.0 + 18.0) == doctest::Approx(11.0 * std::exp(-0.5)));
    CHECK(toll(80.0 - 6.0 * 18.0) < 1e-7 * 11.0);
    CHECK(toll(80.0 + 6.0 * 18.0) < 1e-7 * 11.0);
    CHECK(eval_toll(toll, 62.0) == toll(98.0));
}

TEST_CASE("mixture evaluation is the sum of its components") {
    const TollProfile mix({{10.0, 50.0, 10.0}, {10.0, 70.0, 10.0}});
    CHECK(mix(60.0) == doctest::Approx(2.0 * 10.0 * std::exp(-0.5)).epsilon(1e-12));
    CHECK(mix(60.0) == doctest::Approx(12.1306).epsilon(1e-5));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> a(4, 30), m(30, 90), s(10, 50), t(0, 150);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<GaussianComponent> comps;
        for (int k = 0; k < 4; ++k) comps.push_back({a(rng), m(rng), s(rng)});
        const TollProfile profile(comps);
        const double x = t(rng);
        double sum = 0.0;
        for (const auto& c : comps) sum += TollProfile({c})(x);
        CHECK(profile(x) == doctest::Approx(sum).epsilon(1e-12));
        CHECK(profile(x) >= 0.0);
    }
}

TEST_CASE("single component peaks at its mean") {
    const auto toll = TollProfile::single(7.0, 55.0, 12.0);
    for (double t = 0.0; t <= 150.0; t += 0.25) CHECK(toll(t) <= toll(55.0));
}

TEST_CASE("profile validation") {
    CHECK_THROWS_AS(TollProfile({}), InputError);
    CHECK_THROWS_AS(TollProfile::single(-1.0, 50.0, 10.0), InputError);
    CHECK_THROWS_AS(TollProfile::single(1.0, 50.0, 0.0), InputError);
    CHECK_NOTHROW(TollProfile::single(0.0, 50.0, 10.0));
}

TEST_CASE("vector encoding") {
    const auto p = TollProfile::single(26.2, 67.1, 28.8);
    CHECK(to_vector(p) == std::vector<double>{26.2, 67.1, 28.8});
    CHECK(from_vector(to_vector(p), 1) == p);

    std::vector<GaussianComponent> comps;
    for (int k = 0; k < 6; ++k) comps.push_back({5.0 + k, 40.0 + 5 * k, 12.0 + k});
    const TollProfile six(comps);
    const auto v = to_vector(six);
    CHECK(v.size() == 18);
    CHECK(v[3] == 6.0);
    CHECK(v[4] == 45.0);
    CHECK(v[5] == 13.0);
    CHECK(from_vector(v, 6) == six);

    CHECK_THROWS_AS(from_vector(v, 5), EncodingError);
    const std::vector<double> out_of_bounds{35.0, 60.0, 20.0};
    CHECK_THROWS_AS(from_vector(out_of_bounds, 1), EncodingError);
}

TEST_CASE("bounds") {
    const TollBounds b;
    CHECK(b.lower(2) == std::vector<double>{4, 30, 10, 4, 30, 10});
    CHECK(b.upper(1) == std::vector<double>{30, 90, 50});
    TollBounds bad;
    bad.width = Interval{0.0, 10.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("clamping projects coordinatewise and is idempotent") {
    const TollBounds b;
    CHECK(clamp_to_bounds(std::vector<double>{35, 60, 20}, b) == std::vector<double>{30, 60, 20});
    CHECK(clamp_to_bounds(std::vector<double>{0, 0, 0}, b) == std::vector<double>{4, 30, 10});
    const std::vector<double> inside{10, 50, 25, 4, 90, 50};
    CHECK(clamp_to_bounds(inside, b) == inside);
    const auto once = clamp_to_bounds(std::vector<double>{-5, 100, 5, 50, 10, 70}, b);
    CHECK(clamp_to_bounds(once, b) == once);
    CHECK_THROWS_AS(clamp_to_bounds(std::vector<double>{1, 2}, b), EncodingError);
}
