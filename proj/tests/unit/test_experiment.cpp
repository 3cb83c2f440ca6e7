#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "todp/errors.hpp"
#include "todp/experiment.hpp"

using namespace todp;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("todp_unit_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse(
        "# comment\n"
        "[population]\nn_travelers = 10\npenalty_mean = 0.4, 3.5\nsde_bounds = 0.1, 0.9\n"
        "[dynamics]\nlogit_scale = 0.3\nchoice_rule = resample\n"
        "[toll]\nk = 2\nfixed = 11, 80, 18, 5, 60, 10\n"
        "[bo]\ndropout = s2:2\nstall_penalty = -50\n"
        "[experiment]\nreplications = 3\ntrajectory_days = 0, 4\ninclude_epsilon = true\n");
    CHECK(cfg.population.n_travelers == 10);
    CHECK(cfg.population.penalty_mean[1] == 3.5);
    CHECK(cfg.population.penalty_bounds[0].hi == 0.9);
    CHECK(cfg.population.trip_length_mean == 4600.0);
    CHECK(cfg.dynamics.logit_scale == 0.3);
    CHECK(cfg.dynamics.choice_rule == ChoiceRule::resample);
    CHECK(cfg.toll.k == 2);
    CHECK(cfg.fixed_toll()->size() == 2);
    CHECK(cfg.bo.dropout.kind == bo::DropoutKind::s2);
    CHECK(*cfg.bo.stall_penalty == -50.0);
    CHECK(cfg.replications == 3);
    CHECK(cfg.trajectory_days == std::vector<int>{0, 4});
    CHECK(cfg.include_epsilon);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config errors fail loudly") {
    CHECK_THROWS_AS(parse("[population]\nn_travelerz = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("[populace]\nn_travelers = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("n_travelers = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("[population]\nn_travelers = three\n"), ConfigError);
    CHECK_THROWS_AS(parse("[population]\nn_travelers = 3.5\n"), ConfigError);
    CHECK_THROWS_AS(parse("[toll]\nfixed = 1, 2\n"), ConfigError);
    CHECK_THROWS_AS(parse("[bo]\ndropout = sometimes\n"), ConfigError);
    CHECK_THROWS_AS(parse("[experiment]\ninclude_epsilon = yes\n"), ConfigError);
    CHECK_THROWS_AS(parse("[population]\nseed = 1\nseed = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse("[bo]\nbudget = 3\n").validate(), ConfigError);
    CHECK_THROWS_AS(parse("[toll]\nfixed = 11, 80, 0\n").validate(), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/todp.ini"), std::ios_base::failure);
}

TEST_CASE("config echo round-trips") {
    auto cfg = parse("[population]\nwindow_step = 2.5\n[toll]\nk = 3\nfixed = 0.1, 45.5, 12\n[bo]\ndropout = random:4\n");
    cfg.dynamics.toll_scale = 1.0 / 3.0;
    cfg.set_seed(77);
    std::ostringstream first;
    write_config(first, cfg);
    const auto back = parse(first.str());
    std::ostringstream second;
    write_config(second, back);
    CHECK(first.str() == second.str());
    CHECK(back.dynamics.toll_scale == cfg.dynamics.toll_scale);
    CHECK(back.population.seed == 77);
    CHECK(back.bo.seed == 77);
    CHECK(back.toll.fixed == cfg.toll.fixed);
}

TEST_CASE("replication seeds") {
    ExperimentConfig cfg;
    cfg.set_seed(10);
    const auto r = replication_config(cfg, 3);
    CHECK(r.bo.seed == 13);
    CHECK(r.dynamics.seed == 13);
    CHECK(r.bo.objective_seed == 13);
    CHECK(r.population.seed == 10);
}

TEST_CASE("single-traveler baseline") {
    ExperimentConfig cfg;
    cfg.population.n_travelers = 1;
    const auto dir = scratch_dir("nte1");
    const auto s = run_nte(cfg, dir);
    CHECK(s.converged);
    CHECK(s.peak_accumulation == 1);
    CHECK(s.welfare.revenue_per_capita == 0.0);
    for (const char* f : {"population.csv", "days.csv", "summary.json", "config.echo"}) {
        CHECK(fs::exists(dir / f));
    }
    CHECK(fs::exists(dir / ("trajectory_day_" + std::to_string(s.days_run) + ".csv")));
    const auto json = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(json["mode"] == "nte");
    CHECK(json["peak_accumulation"] == 1);
    fs::remove_all(dir);
}

TEST_CASE("scenario outputs are reproducible") {
    ExperimentConfig cfg;
    cfg.population.n_travelers = 200;
    cfg.dynamics.max_days = 10;
    cfg.toll.fixed = {11, 80, 18};
    const auto a = scratch_dir("toll_a");
    const auto b = scratch_dir("toll_b");
    const auto sa = run_fixed_toll(cfg, a);
    run_fixed_toll(load_config(a / "config.echo"), b);
    for (const char* f : {"population.csv", "days.csv", "summary.json", "config.echo"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(sa.welfare.revenue_per_capita > 0.0);
    CHECK(sa.toll.has_value());

    const auto days = slurp(a / "days.csv");
    CHECK(days.rfind("day,inconsistency,mean_consumer_surplus,welfare,peak_accumulation\n0,,", 0) == 0);

    SUBCASE("zero toll equals the baseline on a shared seed") {
        ExperimentConfig zero = cfg;
        zero.toll.fixed = {0, 80, 18};
        const auto tz = run_scenario(zero, zero.fixed_toll());
        const auto base = run_scenario(cfg, std::nullopt);
        CHECK(tz.summary.welfare.welfare_per_capita == doctest::Approx(base.summary.welfare.welfare_per_capita));
        CHECK(tz.summary.peak_accumulation == base.summary.peak_accumulation);
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("toll run without a profile is a config error") {
    CHECK_THROWS_AS(run_fixed_toll(ExperimentConfig{}, scratch_dir("none")), ConfigError);
}

TEST_CASE("small optimization campaign") {
    ExperimentConfig cfg;
    cfg.population.n_travelers = 150;
    cfg.dynamics.max_days = 8;
    cfg.bo.n_init = 4;
    cfg.bo.budget = 6;
    cfg.bo.acq_probe_points = 64;
    cfg.replications = 2;
    cfg.jobs = 2;
    const auto dir = scratch_dir("opt");
    const auto s = run_optimize(cfg, dir);
    REQUIRE(s.campaigns.size() == 2);
    for (int r = 0; r < 2; ++r) {
        const auto trace = slurp(dir / ("bo_trace_" + std::to_string(r) + ".csv"));
        CHECK(trace.rfind("iteration,A1,xi1,sigma1,objective,incumbent,phase,failed\n", 0) == 0);
        CHECK(std::count(trace.begin(), trace.end(), '\n') == 7);
    }
    const auto json = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(json["campaigns"].size() == 2);
    CHECK(json["best_objective_mean"].get<double>() == doctest::Approx(s.best_mean));
    CHECK(json["best_abs_mean"].get<double>() == doctest::Approx(std::abs(s.best_mean)));

    const auto again = run_optimize(cfg, scratch_dir("opt_again"));
    CHECK(again.campaigns[1].trace.incumbent_series == s.campaigns[1].trace.incumbent_series);
    fs::remove_all(dir);
    fs::remove_all(scratch_dir("opt_again"));
}

TEST_CASE("campaign statistics") {
    std::vector<CampaignResult> c(3);
    c[0].trace.best_objective = -27.0;
    c[1].trace.best_objective = -26.0;
    c[2].trace.best_objective = -25.0;
    const auto s = summarize(c);
    CHECK(s.best_mean == doctest::Approx(-26.0));
    CHECK(s.best_std == doctest::Approx(1.0));
    CHECK(summarize({c[0]}).best_std == 0.0);
}
