#include "todp/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "todp/errors.hpp"

namespace todp {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || end != t.data() + t.size() || t.empty()) {
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    }
    return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || end != t.data() + t.size() || t.empty()) {
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true") return true;
    if (t == "false") return false;
    throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::string format_double(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string format_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ", ";
        out += format_double(v[i]);
    }
    return out;
}

Interval parse_interval(const std::string& key, const std::string& text) {
    const auto v = parse_list(key, text);
    if (v.size() != 2) throw ConfigError(key + ": expected 'lo, hi'");
    return {v[0], v[1]};
}

// A config field: how to read it from text and how to print it back.
struct Field {
    std::function<void(ExperimentConfig&, const std::string&)> read;
    std::function<std::string(const ExperimentConfig&)> write;
};

using Section = std::vector<std::pair<std::string, Field>>;

template <typename Get>
Field number_field(std::string key, Get get) {
    return {[key, get](ExperimentConfig& c, const std::string& t) { get(c) = parse_double(key, t); },
            [get](const ExperimentConfig& c) {
                return format_double(get(const_cast<ExperimentConfig&>(c)));
            }};
}

template <typename Get>
Field integer_field(std::string key, Get get) {
    return {[key, get](ExperimentConfig& c, const std::string& t) {
                using T = std::remove_reference_t<decltype(get(c))>;
                get(c) = static_cast<T>(parse_integer(key, t));
            },
            [get](const ExperimentConfig& c) {
                return std::to_string(get(const_cast<ExperimentConfig&>(c)));
            }};
}

template <typename Get>
Field interval_field(std::string key, Get get) {
    return {[key, get](ExperimentConfig& c, const std::string& t) { get(c) = parse_interval(key, t); },
            [get](const ExperimentConfig& c) {
                const Interval& i = get(const_cast<ExperimentConfig&>(c));
                return format_list({i.lo, i.hi});
            }};
}

const std::vector<std::pair<std::string, Section>>& schema() {
    static const std::vector<std::pair<std::string, Section>> sections = [] {
        std::vector<std::pair<std::string, Section>> s;
        s.push_back({"population",
                     {
                         {"n_travelers", integer_field("population.n_travelers",
                                                       [](ExperimentConfig& c) -> auto& { return c.population.n_travelers; })},
                         {"trip_length_mean", number_field("population.trip_length_mean",
                                                           [](ExperimentConfig& c) -> auto& { return c.population.trip_length_mean; })},
                         {"trip_length_sd", number_field("population.trip_length_sd",
                                                         [](ExperimentConfig& c) -> auto& { return c.population.trip_length_sd; })},
                         {"value_of_time", number_field("population.value_of_time",
                                                        [](ExperimentConfig& c) -> auto& { return c.population.value_of_time; })},
                         {"penalty_mean",
                          {[](ExperimentConfig& c, const std::string& t) {
                               const auto v = parse_list("population.penalty_mean", t);
                               if (v.size() != 2) throw ConfigError("population.penalty_mean: expected 'sde, sdl'");
                               c.population.penalty_mean = {v[0], v[1]};
                           },
                           [](const ExperimentConfig& c) {
                               return format_list({c.population.penalty_mean[0], c.population.penalty_mean[1]});
                           }}},
                         {"penalty_cov",
                          {[](ExperimentConfig& c, const std::string& t) {
                               const auto v = parse_list("population.penalty_cov", t);
                               if (v.size() != 4) {
                                   throw ConfigError("population.penalty_cov: expected four entries, row major");
                               }
                               c.population.penalty_cov = {{{v[0], v[1]}, {v[2], v[3]}}};
                           },
                           [](const ExperimentConfig& c) {
                               const auto& m = c.population.penalty_cov;
                               return format_list({m[0][0], m[0][1], m[1][0], m[1][1]});
                           }}},
                         {"sde_bounds", interval_field("population.sde_bounds",
                                                       [](ExperimentConfig& c) -> auto& { return c.population.penalty_bounds[0]; })},
                         {"sdl_bounds", interval_field("population.sdl_bounds",
                                                       [](ExperimentConfig& c) -> auto& { return c.population.penalty_bounds[1]; })},
                         {"desired_arrival_lo", number_field("population.desired_arrival_lo",
                                                             [](ExperimentConfig& c) -> auto& { return c.population.desired_arrival_lo; })},
                         {"desired_arrival_hi", number_field("population.desired_arrival_hi",
                                                             [](ExperimentConfig& c) -> auto& { return c.population.desired_arrival_hi; })},
                         {"window_before", number_field("population.window_before",
                                                        [](ExperimentConfig& c) -> auto& { return c.population.window_before; })},
                         {"window_after", number_field("population.window_after",
                                                       [](ExperimentConfig& c) -> auto& { return c.population.window_after; })},
                         {"window_step", number_field("population.window_step",
                                                      [](ExperimentConfig& c) -> auto& { return c.population.window_step; })},
                         {"seed", integer_field("population.seed",
                                                [](ExperimentConfig& c) -> auto& { return c.population.seed; })},
                     }});
        s.push_back({"network",
                     {
                         {"n_jam", number_field("network.n_jam", [](ExperimentConfig& c) -> auto& { return c.network.n_jam; })},
                         {"v_f", number_field("network.v_f", [](ExperimentConfig& c) -> auto& { return c.network.v_f; })},
                     }});
        s.push_back({"dynamics",
                     {
                         {"logit_scale", number_field("dynamics.logit_scale",
                                                      [](ExperimentConfig& c) -> auto& { return c.dynamics.logit_scale; })},
                         {"learning_weight", number_field("dynamics.learning_weight",
                                                          [](ExperimentConfig& c) -> auto& { return c.dynamics.learning_weight; })},
                         {"toll_scale", number_field("dynamics.toll_scale",
                                                     [](ExperimentConfig& c) -> auto& { return c.dynamics.toll_scale; })},
                         {"max_days", integer_field("dynamics.max_days",
                                                    [](ExperimentConfig& c) -> auto& { return c.dynamics.max_days; })},
                         {"convergence_tol", number_field("dynamics.convergence_tol",
                                                          [](ExperimentConfig& c) -> auto& { return c.dynamics.convergence_tol; })},
                         {"stable_days", integer_field("dynamics.stable_days",
                                                       [](ExperimentConfig& c) -> auto& { return c.dynamics.stable_days; })},
                         {"choice_rule",
                          {[](ExperimentConfig& c, const std::string& t) {
                               const auto v = trim(t);
                               if (v == "gumbel_max") c.dynamics.choice_rule = ChoiceRule::gumbel_max;
                               else if (v == "resample") c.dynamics.choice_rule = ChoiceRule::resample;
                               else throw ConfigError("dynamics.choice_rule: expected gumbel_max or resample");
                           },
                           [](const ExperimentConfig& c) {
                               return std::string(c.dynamics.choice_rule == ChoiceRule::gumbel_max ? "gumbel_max"
                                                                                                   : "resample");
                           }}},
                         {"seed", integer_field("dynamics.seed", [](ExperimentConfig& c) -> auto& { return c.dynamics.seed; })},
                     }});
        s.push_back({"toll",
                     {
                         {"k", integer_field("toll.k", [](ExperimentConfig& c) -> auto& { return c.toll.k; })},
                         {"amplitude_bounds", interval_field("toll.amplitude_bounds",
                                                             [](ExperimentConfig& c) -> auto& { return c.toll.bounds.amplitude; })},
                         {"mean_bounds", interval_field("toll.mean_bounds",
                                                        [](ExperimentConfig& c) -> auto& { return c.toll.bounds.mean; })},
                         {"width_bounds", interval_field("toll.width_bounds",
                                                         [](ExperimentConfig& c) -> auto& { return c.toll.bounds.width; })},
                         {"fixed",
                          {[](ExperimentConfig& c, const std::string& t) { c.toll.fixed = parse_list("toll.fixed", t); },
                           [](const ExperimentConfig& c) { return format_list(c.toll.fixed); }}},
                     }});
        s.push_back({"bo",
                     {
                         {"n_init", integer_field("bo.n_init", [](ExperimentConfig& c) -> auto& { return c.bo.n_init; })},
                         {"budget", integer_field("bo.budget", [](ExperimentConfig& c) -> auto& { return c.bo.budget; })},
                         {"ucb_beta", number_field("bo.ucb_beta", [](ExperimentConfig& c) -> auto& { return c.bo.ucb_beta; })},
                         {"dropout",
                          {[](ExperimentConfig& c, const std::string& t) { c.bo.dropout = bo::parse_dropout(trim(t)); },
                           [](const ExperimentConfig& c) { return bo::to_string(c.bo.dropout); }}},
                         {"acq_restarts", integer_field("bo.acq_restarts",
                                                        [](ExperimentConfig& c) -> auto& { return c.bo.acq_restarts; })},
                         {"acq_probe_points", integer_field("bo.acq_probe_points",
                                                            [](ExperimentConfig& c) -> auto& { return c.bo.acq_probe_points; })},
                         {"fit_restarts", integer_field("bo.fit_restarts",
                                                        [](ExperimentConfig& c) -> auto& { return c.bo.fit_restarts; })},
                         {"fit_max_iterations", integer_field("bo.fit_max_iterations",
                                                              [](ExperimentConfig& c) -> auto& { return c.bo.fit_max_iterations; })},
                         {"stall_penalty",
                          {[](ExperimentConfig& c, const std::string& t) {
                               if (trim(t) == "none") c.bo.stall_penalty.reset();
                               else c.bo.stall_penalty = parse_double("bo.stall_penalty", t);
                           },
                           [](const ExperimentConfig& c) {
                               return c.bo.stall_penalty ? format_double(*c.bo.stall_penalty) : std::string("none");
                           }}},
                         {"seed", integer_field("bo.seed", [](ExperimentConfig& c) -> auto& { return c.bo.seed; })},
                     }});
        s.push_back({"experiment",
                     {
                         {"replications", integer_field("experiment.replications",
                                                        [](ExperimentConfig& c) -> auto& { return c.replications; })},
                         {"jobs", integer_field("experiment.jobs", [](ExperimentConfig& c) -> auto& { return c.jobs; })},
                         {"trajectory_days",
                          {[](ExperimentConfig& c, const std::string& t) {
                               c.trajectory_days.clear();
                               for (double d : parse_list("experiment.trajectory_days", t)) {
                                   if (d != std::floor(d) || d < 0) {
                                       throw ConfigError("experiment.trajectory_days: expected non-negative integers");
                                   }
                                   c.trajectory_days.push_back(static_cast<int>(d));
                               }
                           },
                           [](const ExperimentConfig& c) {
                               return format_list(std::vector<double>(c.trajectory_days.begin(), c.trajectory_days.end()));
                           }}},
                         {"include_epsilon",
                          {[](ExperimentConfig& c, const std::string& t) {
                               c.include_epsilon = parse_bool("experiment.include_epsilon", t);
                           },
                           [](const ExperimentConfig& c) { return std::string(c.include_epsilon ? "true" : "false"); }}},
                     }});
        return s;
    }();
    return sections;
}

void write_text(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    body(out);
    out.flush();
    if (!out) throw std::ios_base::failure("failed writing " + path.string());
}

void prepare_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::ios_base::failure("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<std::string> coordinate_names(int k) {
    std::vector<std::string> names;
    for (int c = 1; c <= k; ++c) {
        names.push_back("A" + std::to_string(c));
        names.push_back("xi" + std::to_string(c));
        names.push_back("sigma" + std::to_string(c));
    }
    return names;
}

std::string csv_number(double v) {
    if (std::isnan(v)) return "";
    return format_double(v);
}

}  // namespace

void ExperimentConfig::validate() const {
    population.validate();
    network.validate();
    dynamics.validate();
    toll.bounds.validate();
    if (toll.k < 1) throw ConfigError("toll.k must be >= 1");
    fixed_toll();
    bo.validate(3 * toll.k);
    if (replications < 1) throw ConfigError("experiment.replications must be >= 1");
    if (jobs < 1) throw ConfigError("experiment.jobs must be >= 1");
}

void ExperimentConfig::set_seed(std::uint64_t seed) {
    population.seed = seed;
    dynamics.seed = seed;
    bo.seed = seed;
}

std::optional<TollProfile> ExperimentConfig::fixed_toll() const {
    if (toll.fixed.empty()) return std::nullopt;
    if (toll.fixed.size() % 3 != 0) throw ConfigError("toll.fixed needs 3 numbers per component");
    std::vector<GaussianComponent> comps;
    for (std::size_t i = 0; i < toll.fixed.size(); i += 3) {
        comps.push_back({toll.fixed[i], toll.fixed[i + 1], toll.fixed[i + 2]});
    }
    try {
        return TollProfile(std::move(comps));
    } catch (const InputError& e) {
        throw ConfigError(std::string("toll.fixed: ") + e.what());
    }
}

ExperimentConfig parse_config(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    ExperimentConfig cfg;
    for (const auto& [section_name, section] : tree) {
        if (section.empty()) {
            throw ConfigError("key '" + section_name + "' outside of a section");
        }
        const Section* fields = nullptr;
        for (const auto& [name, s] : schema()) {
            if (name == section_name) fields = &s;
        }
        if (fields == nullptr) throw ConfigError("unknown config section [" + section_name + "]");
        for (const auto& [key, value] : section) {
            const Field* field = nullptr;
            for (const auto& [name, f] : *fields) {
                if (name == key) field = &f;
            }
            if (field == nullptr) throw ConfigError("unknown key '" + key + "' in [" + section_name + "]");
            field->read(cfg, value.data());
        }
    }
    if (cfg.toll.fixed.size() % 3 != 0) throw ConfigError("toll.fixed needs 3 numbers per component");
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config " + path.string());
    return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
    bool first = true;
    for (const auto& [name, fields] : schema()) {
        if (!first) out << '\n';
        first = false;
        out << '[' << name << "]\n";
        for (const auto& [key, field] : fields) out << key << " = " << field.write(cfg) << '\n';
    }
}

nlohmann::json to_json(const ScenarioSummary& s) {
    nlohmann::json j;
    j["welfare"] = s.welfare.welfare_per_capita;
    j["cs"] = s.welfare.consumer_surplus_per_capita;
    j["rr"] = s.welfare.revenue_per_capita;
    j["avg_tt_cost"] = s.welfare.avg_travel_time_cost;
    j["avg_sd_cost"] = s.welfare.avg_schedule_delay_cost;
    j["welfare_with_epsilon"] = s.welfare_with_epsilon;
    j["include_epsilon"] = s.welfare.include_epsilon;
    j["peak_accumulation"] = s.peak_accumulation;
    j["days_run"] = s.days_run;
    j["converged"] = s.converged;
    j["days_to_converge"] = s.converged ? nlohmann::json(s.days_run) : nlohmann::json(nullptr);
    if (s.toll) {
        nlohmann::json comps = nlohmann::json::array();
        for (const auto& c : s.toll->components()) {
            comps.push_back({{"amplitude", c.amplitude}, {"mean", c.mean}, {"width", c.width}});
        }
        j["toll"] = comps;
    } else {
        j["toll"] = nullptr;
    }
    return j;
}

namespace {

ScenarioSummary summarize_run(const ExperimentConfig& cfg, const EquilibriumResult& eq,
                              const Population& population) {
    ScenarioSummary s;
    s.welfare = welfare(eq, population, cfg.include_epsilon);
    s.welfare_with_epsilon = welfare(eq, population, true).welfare_per_capita;
    s.peak_accumulation = eq.final_day.peak_accumulation;
    s.days_run = eq.days_run;
    s.converged = eq.converged;
    s.toll = eq.toll;
    return s;
}

}  // namespace

ScenarioRun run_scenario(const ExperimentConfig& cfg, const std::optional<TollProfile>& toll) {
    ScenarioRun run;
    run.population = build_population(cfg.population);
    run.equilibrium = run_day_to_day(run.population, cfg.network, toll, cfg.dynamics);
    run.summary = summarize_run(cfg, run.equilibrium, run.population);
    return run;
}

namespace {

ScenarioSummary run_and_write(const ExperimentConfig& cfg, const std::optional<TollProfile>& toll,
                              const std::filesystem::path& out_dir, const char* mode) {
    cfg.validate();
    prepare_dir(out_dir);
    write_text(out_dir / "config.echo", [&](std::ostream& o) { write_config(o, cfg); });

    ScenarioRun run;
    run.population = build_population(cfg.population);
    std::map<int, DaySimResult> kept;
    const DayObserver observer = [&](int day, const DaySimResult& sim) {
        for (int d : cfg.trajectory_days) {
            if (d == day) kept.emplace(day, sim);
        }
    };
    run.equilibrium = run_day_to_day(run.population, cfg.network, toll, cfg.dynamics, observer);
    kept.insert_or_assign(run.equilibrium.days_run, run.equilibrium.final_day);

    run.summary = summarize_run(cfg, run.equilibrium, run.population);

    write_text(out_dir / "population.csv", [&](std::ostream& o) { write_population_csv(o, run.population); });
    write_text(out_dir / "days.csv", [&](std::ostream& o) { write_days_csv(o, run.equilibrium); });
    for (const auto& [day, sim] : kept) {
        write_text(out_dir / ("trajectory_day_" + std::to_string(day) + ".csv"),
                   [&](std::ostream& o) { write_trajectory_csv(o, sim); });
    }
    nlohmann::json j = to_json(run.summary);
    j["mode"] = mode;
    j["critical_accumulation"] = critical_accumulation(cfg.network);
    write_text(out_dir / "summary.json", [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    return run.summary;
}

}  // namespace

ScenarioSummary run_nte(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    return run_and_write(cfg, std::nullopt, out_dir, "nte");
}

ScenarioSummary run_fixed_toll(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    const auto toll = cfg.fixed_toll();
    if (!toll) throw ConfigError("toll run needs toll.fixed = A, xi, sigma[, ...]");
    return run_and_write(cfg, toll, out_dir, "toll");
}

bo::Objective welfare_objective(const ExperimentConfig& cfg, const Population& population) {
    const int k = cfg.toll.k;
    const TollBounds bounds = cfg.toll.bounds;
    const NetworkParams net = cfg.network;
    const DayToDayConfig dyn = cfg.dynamics;
    const bool eps = cfg.include_epsilon;
    return [k, bounds, net, dyn, eps, &population](const Eigen::VectorXd& v) {
        const std::vector<double> raw(v.data(), v.data() + v.size());
        const auto toll = from_vector(clamp_to_bounds(raw, bounds), k, bounds);
        const auto eq = run_day_to_day(population, net, toll, dyn);
        return welfare(eq, population, eps).welfare_per_capita;
    };
}

ExperimentConfig replication_config(const ExperimentConfig& cfg, int replication) {
    ExperimentConfig r = cfg;
    r.bo.seed = cfg.bo.seed + static_cast<std::uint64_t>(replication);
    r.dynamics.seed = cfg.dynamics.seed + static_cast<std::uint64_t>(replication);
    r.bo.objective_seed = r.dynamics.seed;
    return r;
}

CampaignResult run_campaign(const ExperimentConfig& cfg, int replication,
                            const bo::EvaluationObserver& observer) {
    const ExperimentConfig rc = replication_config(cfg, replication);
    const Population population = build_population(rc.population);
    const auto lo = rc.toll.bounds.lower(rc.toll.k);
    const auto hi = rc.toll.bounds.upper(rc.toll.k);
    CampaignResult result;
    result.replication = replication;
    result.trace = bo::run_bo(welfare_objective(rc, population),
                              Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                              Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size())),
                              rc.bo, observer);
    const auto baseline = run_day_to_day(population, rc.network, std::nullopt, rc.dynamics);
    result.baseline_welfare = welfare(baseline, population, rc.include_epsilon).welfare_per_capita;
    return result;
}

CampaignSummary summarize(std::vector<CampaignResult> campaigns) {
    CampaignSummary s;
    s.campaigns = std::move(campaigns);
    const auto n = static_cast<double>(s.campaigns.size());
    if (s.campaigns.empty()) return s;
    for (const auto& c : s.campaigns) s.best_mean += c.trace.best_objective;
    s.best_mean /= n;
    if (s.campaigns.size() > 1) {
        double ss = 0.0;
        for (const auto& c : s.campaigns) ss += std::pow(c.trace.best_objective - s.best_mean, 2);
        s.best_std = std::sqrt(ss / (n - 1.0));
    }
    return s;
}

CampaignSummary run_optimize(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    prepare_dir(out_dir);
    write_text(out_dir / "config.echo", [&](std::ostream& o) { write_config(o, cfg); });

    std::vector<CampaignResult> results(static_cast<std::size_t>(cfg.replications));
    std::atomic<int> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= cfg.replications || abort.load()) return;
            try {
                const auto trace_path = out_dir / ("bo_trace_" + std::to_string(r) + ".csv");
                results[static_cast<std::size_t>(r)] = run_campaign(cfg, r, [&](const bo::BOTrace& t) {
                    write_text(trace_path, [&](std::ostream& o) { write_trace_csv(o, t); });
                });
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                abort = true;
                return;
            }
        }
    };
    const int n_workers = std::min(cfg.jobs, cfg.replications);
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    auto summary = summarize(std::move(results));
    nlohmann::json campaigns = nlohmann::json::array();
    double abs_mean = 0.0;
    for (const auto& c : summary.campaigns) {
        int failed = 0;
        for (const auto& e : c.trace.evaluations) failed += e.failed ? 1 : 0;
        const std::vector<double> best(c.trace.best_x.data(), c.trace.best_x.data() + c.trace.best_x.size());
        campaigns.push_back({
            {"replication", c.replication},
            {"bo_seed", cfg.bo.seed + static_cast<std::uint64_t>(c.replication)},
            {"simulation_seed", cfg.dynamics.seed + static_cast<std::uint64_t>(c.replication)},
            {"best_vector", best},
            {"best_objective", c.trace.best_objective},
            {"baseline_welfare", c.baseline_welfare},
            {"improvement_pct", 100.0 * (c.trace.best_objective - c.baseline_welfare) / std::abs(c.baseline_welfare)},
            {"evaluations", c.trace.evaluations.size()},
            {"failed_evaluations", failed},
        });
        abs_mean += std::abs(c.trace.best_objective);
    }
    abs_mean /= static_cast<double>(summary.campaigns.size());
    nlohmann::json j;
    j["mode"] = "optimize";
    j["k"] = cfg.toll.k;
    j["dropout"] = bo::to_string(cfg.bo.dropout);
    j["campaigns"] = campaigns;
    j["best_objective_mean"] = summary.best_mean;
    j["best_objective_std"] = summary.best_std;
    j["best_abs_mean"] = abs_mean;
    write_text(out_dir / "summary.json", [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    return summary;
}

void write_days_csv(std::ostream& out, const EquilibriumResult& eq) {
    out << "day,inconsistency,mean_consumer_surplus,welfare,peak_accumulation\n";
    for (const auto& d : eq.day_results) {
        out << d.day << ',' << csv_number(d.inconsistency) << ',' << csv_number(d.mean_consumer_surplus)
            << ',' << csv_number(d.welfare) << ',' << d.peak_accumulation << '\n';
    }
}

void write_trace_csv(std::ostream& out, const bo::BOTrace& trace) {
    const int dims = trace.evaluations.empty() ? 0 : static_cast<int>(trace.evaluations.front().x.size());
    out << "iteration";
    if (dims % 3 == 0) {
        for (const auto& n : coordinate_names(dims / 3)) out << ',' << n;
    } else {
        for (int d = 0; d < dims; ++d) out << ",x" << d;
    }
    out << ",objective,incumbent,phase,failed\n";
    for (std::size_t i = 0; i < trace.evaluations.size(); ++i) {
        const auto& e = trace.evaluations[i];
        out << i;
        for (int d = 0; d < dims; ++d) out << ',' << format_double(e.x[d]);
        out << ',' << csv_number(e.objective) << ',' << csv_number(trace.incumbent_series[i]) << ','
            << (e.initial ? "lhs" : "bo") << ',' << (e.failed ? 1 : 0) << '\n';
    }
}

}  // namespace todp
