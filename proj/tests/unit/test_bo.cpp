#include <doctest.h>

#include <cmath>
#include <set>

#include "todp/bo/bo.hpp"
#include "todp/errors.hpp"

using namespace todp;
using namespace todp::bo;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("latin hypercube stratification") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        for (int n : {1, 2, 4, 7, 30, 64}) {
            for (int dims : {1, 3, 18}) {
                const MatrixXd pts = lhs(n, dims, rng);
                REQUIRE(pts.rows() == n);
                REQUIRE(pts.cols() == dims);
                for (int d = 0; d < dims; ++d) {
                    std::vector<int> hits(static_cast<std::size_t>(n), 0);
                    for (int i = 0; i < n; ++i) {
                        REQUIRE(pts(i, d) >= 0.0);
                        REQUIRE(pts(i, d) < 1.0);
                        ++hits[static_cast<std::size_t>(std::floor(pts(i, d) * n))];
                    }
                    for (int h : hits) REQUIRE(h == 1);
                }
            }
        }
    }
    Rng rng(1);
    CHECK_THROWS_AS(lhs(0, 2, rng), ConfigError);
}

TEST_CASE("dropout selection") {
    Rng rng(12);
    SUBCASE("none and full random keep every coordinate") {
        const std::vector<int> all{0, 1, 2, 3, 4, 5};
        CHECK(dropout_select(Dropout::none(), 6, rng) == all);
        CHECK(dropout_select(Dropout::random(6), 6, rng) == all);
    }
    SUBCASE("random subsets") {
        std::vector<int> counts(18, 0);
        for (int k = 0; k < 10000; ++k) {
            const auto s = dropout_select(Dropout::random(5), 18, rng);
            REQUIRE(s.size() == 5);
            REQUIRE(std::set<int>(s.begin(), s.end()).size() == 5);
            for (int i : s) ++counts[static_cast<std::size_t>(i)];
        }
        // Each index appears with probability 5/18.
        for (int c : counts) CHECK(std::abs(c / 10000.0 - 5.0 / 18.0) < 0.03);
    }
    SUBCASE("s1 covers every parameter type") {
        for (int d : {3, 5, 7}) {
            for (int k = 0; k < 10000; ++k) {
                const auto s = dropout_select(Dropout::s1(d), 18, rng);
                REQUIRE(s.size() == static_cast<std::size_t>(d));
                REQUIRE(std::set<int>(s.begin(), s.end()).size() == s.size());
                bool seen[3] = {false, false, false};
                for (int i : s) seen[i % 3] = true;
                REQUIRE((seen[0] && seen[1] && seen[2]));
            }
        }
    }
    SUBCASE("s2 draws one variable from each chosen component") {
        for (int k = 0; k < 10000; ++k) {
            const auto s = dropout_select(Dropout::s2(5), 18, rng);
            REQUIRE(s.size() == 5);
            std::set<int> comps;
            for (int i : s) comps.insert(i / 3);
            REQUIRE(comps.size() == 5);
        }
    }
    SUBCASE("infeasible sizes") {
        CHECK_THROWS_AS(dropout_select(Dropout::random(0), 6, rng), ConfigError);
        CHECK_THROWS_AS(dropout_select(Dropout::random(7), 6, rng), ConfigError);
        CHECK_THROWS_AS(dropout_select(Dropout::s1(2), 18, rng), ConfigError);
        CHECK_THROWS_AS(dropout_select(Dropout::s2(7), 18, rng), ConfigError);
        CHECK_THROWS_AS(dropout_select(Dropout::s1(3), 7, rng), ConfigError);
    }
}

TEST_CASE("dropout text form") {
    for (const auto& d : {Dropout::none(), Dropout::random(3), Dropout::s1(5), Dropout::s2(4)}) {
        const auto back = parse_dropout(to_string(d));
        CHECK(back.kind == d.kind);
        CHECK(back.d == d.d);
    }
    CHECK_THROWS_AS(parse_dropout("random"), ConfigError);
    CHECK_THROWS_AS(parse_dropout("s3:2"), ConfigError);
    CHECK_THROWS_AS(parse_dropout("s1:x"), ConfigError);
}

TEST_CASE("ucb") {
    MatrixXd x(2, 1);
    x << 0.2, 0.7;
    VectorXd y(2);
    y << 1.0, 2.0;
    GPModel gp(MaternKernel::isotropic(1, 0.3), 1e-6);
    gp.fit(x, y);
    VectorXd q(1);
    q << 0.45;
    const auto p = gp.posterior(q);
    CHECK(ucb(gp, q, 0.0) == p.mean);
    CHECK(ucb(gp, q, 2.0) == doctest::Approx(p.mean + 2.0 * std::sqrt(p.variance)));
    CHECK(ucb(gp, x.row(1).transpose(), 2.0) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("acquisition maximization in one dimension matches a dense grid") {
    MatrixXd x(4, 1);
    x << 0.05, 0.3, 0.55, 0.9;
    VectorXd y(4);
    y << 0.2, 1.0, 0.4, -0.3;
    GPModel gp(MaternKernel::isotropic(1, 0.2), 1e-6);
    gp.fit(x, y);
    const double beta = 2.0;
    double best_t = 0.0, best = -INFINITY;
    for (int i = 0; i <= 200000; ++i) {
        VectorXd q(1);
        q << i / 200000.0;
        const double a = ucb(gp, q, beta);
        if (a > best) {
            best = a;
            best_t = q[0];
        }
    }
    Rng rng(3);
    const auto r = maximize_acquisition(gp, beta, {0}, VectorXd::Constant(1, 0.5), {}, rng);
    CHECK(std::abs(r[0] - best_t) < 1e-3);
    CHECK(ucb(gp, r, beta) >= best - 1e-9);
}

TEST_CASE("acquisition respects the active subspace and the probe contract") {
    Rng rng(7);
    const MatrixXd x = lhs(12, 4, rng);
    VectorXd y(12);
    for (int i = 0; i < 12; ++i) y[i] = -(x.row(i).array() - 0.3).square().sum();
    GPModel gp(MaternKernel::isotropic(4, 0.5), 1e-6);
    gp.fit(x, y);
    const VectorXd fill = VectorXd::Constant(4, 0.8);
    const auto r = maximize_acquisition(gp, 2.0, {0}, fill, {}, rng);
    CHECK(r[1] == fill[1]);
    CHECK(r[2] == fill[2]);
    CHECK(r[3] == fill[3]);
    CHECK(r[0] >= 0.0);
    CHECK(r[0] <= 1.0);
    CHECK(ucb(gp, r, 2.0) >= ucb(gp, fill, 2.0));

    const auto full = maximize_acquisition(gp, 0.0, {0, 1, 2, 3}, fill, {}, rng);
    CHECK((full.array() >= 0.0).all());
    CHECK((full.array() <= 1.0).all());
    CHECK(gp.posterior(full).mean >= gp.posterior(fill).mean);
}

namespace {

double sphere(const VectorXd& v, const VectorXd& lo, const VectorXd& hi, const VectorXd& c) {
    return 1.0 - (v - c).cwiseQuotient(hi - lo).squaredNorm();
}

}  // namespace

TEST_CASE("bo on a shifted sphere") {
    VectorXd lo(3), hi(3), c(3);
    lo << 4, 30, 10;
    hi << 30, 90, 50;
    c << 10, 75, 20;
    BOConfig cfg;
    cfg.n_init = 10;
    cfg.budget = 60;
    cfg.seed = 3;
    const auto f = [&](const VectorXd& v) { return sphere(v, lo, hi, c); };
    const auto trace = run_bo(f, lo, hi, cfg);
    CHECK(trace.evaluations.size() == 60);
    CHECK(trace.best_objective >= 0.99);
    for (std::size_t i = 1; i < trace.incumbent_series.size(); ++i) {
        CHECK(trace.incumbent_series[i] >= trace.incumbent_series[i - 1]);
    }
    for (const auto& e : trace.evaluations) {
        CHECK((e.x.array() >= lo.array()).all());
        CHECK((e.x.array() <= hi.array()).all());
    }
    SUBCASE("deterministic in the seed") {
        const auto again = run_bo(f, lo, hi, cfg);
        CHECK(again.best_x == trace.best_x);
        CHECK(again.incumbent_series == trace.incumbent_series);
    }
}

TEST_CASE("bo degenerate budget is pure LHS") {
    VectorXd lo = VectorXd::Zero(2), hi = VectorXd::Ones(2);
    BOConfig cfg;
    cfg.n_init = 8;
    cfg.budget = 8;
    int calls = 0;
    const auto trace = run_bo([&](const VectorXd& v) { ++calls; return v.sum(); }, lo, hi, cfg);
    CHECK(calls == 8);
    for (const auto& e : trace.evaluations) CHECK(e.initial);
}

TEST_CASE("stalled evaluations") {
    VectorXd lo = VectorXd::Zero(2), hi = VectorXd::Ones(2);
    const auto f = [](const VectorXd& v) -> double {
        if (v[0] > 0.7) throw SimulationStall(1.0, 10);
        return -v.squaredNorm();
    };
    BOConfig cfg;
    cfg.n_init = 6;
    cfg.budget = 12;
    const auto skipped = run_bo(f, lo, hi, cfg);
    int failed = 0;
    for (const auto& e : skipped.evaluations) {
        if (e.failed) {
            ++failed;
            CHECK(std::isnan(e.objective));
        }
    }
    CHECK(failed >= 1);
    CHECK(std::isfinite(skipped.best_objective));

    cfg.stall_penalty = -100.0;
    const auto penalized = run_bo(f, lo, hi, cfg);
    for (const auto& e : penalized.evaluations) {
        if (e.failed) CHECK(e.objective == -100.0);
    }

    const auto boom = [](const VectorXd&) -> double { throw InputError("bad"); };
    CHECK_THROWS_AS(run_bo(boom, lo, hi, cfg), InputError);
}

TEST_CASE("bo config validation") {
    BOConfig cfg;
    cfg.budget = 5;
    CHECK_THROWS_AS(cfg.validate(3), ConfigError);
    cfg = {};
    cfg.dropout = Dropout::s2(2);
    CHECK_THROWS_AS(cfg.validate(3), ConfigError);
    CHECK_NOTHROW(cfg.validate(6));
}
