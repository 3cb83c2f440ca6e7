#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "todp/bo/bo.hpp"
#include "todp/bo/gp.hpp"
#include "todp/errors.hpp"
#include "todp/experiment.hpp"

namespace py = pybind11;
using namespace todp;

namespace {

ExperimentConfig config_from_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string config_to_text(const ExperimentConfig& cfg) {
    std::ostringstream out;
    write_config(out, cfg);
    return out.str();
}

py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

py::dict trace_to_dict(const bo::BOTrace& trace) {
    py::list evals;
    for (const auto& e : trace.evaluations) {
        py::dict d;
        d["x"] = e.x;
        d["objective"] = e.objective;
        d["failed"] = e.failed;
        d["initial"] = e.initial;
        evals.append(d);
    }
    py::dict out;
    out["evaluations"] = evals;
    out["incumbent"] = trace.incumbent_series;
    out["best_x"] = trace.best_x;
    out["best_objective"] = trace.best_objective;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Day-to-day departure-time simulation with tolls tuned by Bayesian optimization";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<EncodingError>(m, "EncodingError", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<SamplingError>(m, "SamplingError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<MisuseError>(m, "MisuseError", PyExc_RuntimeError);
    py::register_exception<SimulationStall>(m, "SimulationStall", PyExc_RuntimeError);

    py::class_<NetworkParams>(m, "Network")
        .def(py::init<>())
        .def(py::init([](double n_jam, double v_f) { return NetworkParams{n_jam, v_f}; }),
             py::arg("n_jam"), py::arg("v_f"))
        .def_readwrite("n_jam", &NetworkParams::n_jam)
        .def_readwrite("v_f", &NetworkParams::v_f);

    m.def("speed", &speed, py::arg("n"), py::arg("network") = NetworkParams{},
          "Speed in meters per minute at accumulation n.");
    m.def("critical_accumulation", &critical_accumulation, py::arg("network") = NetworkParams{});

    m.def(
        "simulate_day",
        [](const std::vector<double>& departures, const std::vector<double>& lengths,
           const NetworkParams& net) {
            const auto r = simulate_day(departures, lengths, net);
            std::vector<double> times;
            std::vector<int> acc;
            for (const auto& p : r.trajectory) {
                times.push_back(p.time);
                acc.push_back(p.accumulation);
            }
            py::dict out;
            out["travel_times"] = r.travel_times;
            out["times"] = times;
            out["accumulation"] = acc;
            out["peak_accumulation"] = r.peak_accumulation;
            return out;
        },
        py::arg("departures"), py::arg("lengths"), py::arg("network") = NetworkParams{},
        "One day of the trip-based reservoir. Returns travel times (min) and the accumulation "
        "after every event.");

    py::class_<TollProfile>(m, "TollProfile")
        .def(py::init([](const std::vector<double>& v) {
                 if (v.size() % 3 != 0) throw EncodingError("toll vector length must be a multiple of 3");
                 return from_vector(v, static_cast<int>(v.size() / 3));
             }),
             py::arg("vector"), "From [A_1, xi_1, sigma_1, A_2, ...].")
        .def("__call__", &TollProfile::operator(), py::arg("t"))
        .def("to_vector", [](const TollProfile& t) { return to_vector(t); })
        .def_property_readonly("k", &TollProfile::size);

    py::class_<ExperimentConfig>(m, "Config")
        .def(py::init<>())
        .def_static("from_text", &config_from_text, py::arg("text"))
        .def_static("load", [](const std::string& path) { return load_config(path); }, py::arg("path"))
        .def("to_text", &config_to_text)
        .def("set_seed", &ExperimentConfig::set_seed, py::arg("seed"))
        .def("validate", &ExperimentConfig::validate)
        .def_property(
            "n_travelers", [](const ExperimentConfig& c) { return c.population.n_travelers; },
            [](ExperimentConfig& c, int n) { c.population.n_travelers = n; })
        .def_property(
            "max_days", [](const ExperimentConfig& c) { return c.dynamics.max_days; },
            [](ExperimentConfig& c, int n) { c.dynamics.max_days = n; })
        .def_property(
            "k", [](const ExperimentConfig& c) { return c.toll.k; },
            [](ExperimentConfig& c, int k) { c.toll.k = k; })
        .def_property(
            "n_init", [](const ExperimentConfig& c) { return c.bo.n_init; },
            [](ExperimentConfig& c, int n) { c.bo.n_init = n; })
        .def_property(
            "budget", [](const ExperimentConfig& c) { return c.bo.budget; },
            [](ExperimentConfig& c, int n) { c.bo.budget = n; })
        .def_property(
            "dropout", [](const ExperimentConfig& c) { return bo::to_string(c.bo.dropout); },
            [](ExperimentConfig& c, const std::string& s) { c.bo.dropout = bo::parse_dropout(s); });

    m.def(
        "population",
        [](const ExperimentConfig& cfg) {
            py::list out;
            for (const auto& t : build_population(cfg.population)) {
                py::dict d;
                d["id"] = t.id;
                d["trip_length"] = t.trip_length;
                d["value_of_time"] = t.value_of_time;
                d["sde"] = t.sde;
                d["sdl"] = t.sdl;
                d["desired_arrival"] = t.desired_arrival;
                d["time_window"] = t.time_window;
                out.append(d);
            }
            return out;
        },
        py::arg("config"));

    m.def(
        "run_scenario",
        [](const ExperimentConfig& cfg, std::optional<std::vector<double>> toll) {
            std::optional<TollProfile> profile;
            if (toll) profile = from_vector(*toll, static_cast<int>(toll->size() / 3), cfg.toll.bounds);
            ScenarioRun run;
            {
                py::gil_scoped_release release;
                run = run_scenario(cfg, profile);
            }
            py::dict out = json_to_py(to_json(run.summary));
            out["inconsistency"] = run.equilibrium.inconsistency_series;
            return out;
        },
        py::arg("config"), py::arg("toll") = py::none(),
        "Runs the day-to-day process to equilibrium and returns the welfare summary.");

    m.def(
        "lhs",
        [](int n, int dims, std::uint64_t seed) {
            bo::Rng rng(seed);
            return bo::lhs(n, dims, rng);
        },
        py::arg("n"), py::arg("dims"), py::arg("seed") = 1);

    py::class_<bo::GPModel>(m, "GP")
        .def(py::init([](const Eigen::VectorXd& lengthscales, double signal_variance, double noise) {
                 return bo::GPModel(bo::MaternKernel{lengthscales, signal_variance}, noise);
             }),
             py::arg("lengthscales"), py::arg("signal_variance") = 1.0, py::arg("noise_variance") = 1e-6)
        .def_static(
            "fit_hyperparameters",
            [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::uint64_t seed) {
                bo::Rng rng(seed);
                return bo::fit_hyperparameters(x, y, rng);
            },
            py::arg("x"), py::arg("y"), py::arg("seed") = 1)
        .def("fit", &bo::GPModel::fit, py::arg("x"), py::arg("y"))
        .def(
            "posterior",
            [](const bo::GPModel& gp, const Eigen::VectorXd& x) {
                const auto p = gp.posterior(x);
                return py::make_tuple(p.mean, p.variance);
            },
            py::arg("x"), "Posterior mean and variance at one point.")
        .def("log_marginal_likelihood", &bo::GPModel::log_marginal_likelihood)
        .def_property_readonly("lengthscales", [](const bo::GPModel& gp) { return gp.kernel().lengthscales; })
        .def_property_readonly("signal_variance",
                               [](const bo::GPModel& gp) { return gp.kernel().signal_variance; })
        .def_property_readonly("noise_variance", &bo::GPModel::noise_variance);

    m.def(
        "run_bo",
        [](const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& lower,
           const Eigen::VectorXd& upper, int n_init, int budget, const std::string& dropout,
           std::uint64_t seed) {
            bo::BOConfig cfg;
            cfg.n_init = n_init;
            cfg.budget = budget;
            cfg.dropout = bo::parse_dropout(dropout);
            cfg.seed = seed;
            return trace_to_dict(bo::run_bo(f, lower, upper, cfg));
        },
        py::arg("objective"), py::arg("lower"), py::arg("upper"), py::arg("n_init") = 30,
        py::arg("budget") = 90, py::arg("dropout") = "none", py::arg("seed") = 1,
        "Maximizes a Python callable over a box with GP-UCB.");

    m.def(
        "run_campaign",
        [](const ExperimentConfig& cfg, int replication) {
            CampaignResult r;
            {
                py::gil_scoped_release release;
                r = run_campaign(cfg, replication);
            }
            py::dict out = trace_to_dict(r.trace);
            out["baseline_welfare"] = r.baseline_welfare;
            return out;
        },
        py::arg("config"), py::arg("replication") = 0,
        "One toll optimization campaign on the welfare objective.");
}
