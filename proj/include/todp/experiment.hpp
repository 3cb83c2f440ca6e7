#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "todp/bo/bo.hpp"
#include "todp/dynamics.hpp"
#include "todp/mfd_sim.hpp"
#include "todp/population.hpp"
#include "todp/toll.hpp"
#include "todp/welfare.hpp"

namespace todp {

struct TollSection {
    int k = 1;
    TollBounds bounds;
    // Concrete profile for fixed-toll runs, flattened as [A, xi, sigma, ...].
    std::vector<double> fixed;
};

struct ExperimentConfig {
    PopulationConfig population;
    NetworkParams network;
    DayToDayConfig dynamics;
    TollSection toll;
    bo::BOConfig bo;
    int replications = 1;
    int jobs = 1;
    // Extra days whose trajectories are written; the final day always is.
    std::vector<int> trajectory_days;
    bool include_epsilon = false;

    void validate() const;
    // Sets the population, dynamics and BO seeds at once.
    void set_seed(std::uint64_t seed);
    std::optional<TollProfile> fixed_toll() const;
};

// Sectioned key = value text ([population], [network], [dynamics], [toll],
// [bo], [experiment]). Missing keys keep their defaults; unknown sections or
// keys throw ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
// Writes every field, defaults included, in a form parse_config reads back.
void write_config(std::ostream& out, const ExperimentConfig& cfg);

struct ScenarioSummary {
    WelfareReport welfare;
    double welfare_with_epsilon = 0.0;
    int peak_accumulation = 0;
    int days_run = 0;
    bool converged = false;
    std::optional<TollProfile> toll;
};

nlohmann::json to_json(const ScenarioSummary& summary);

struct ScenarioRun {
    Population population;
    EquilibriumResult equilibrium;
    ScenarioSummary summary;
};

// One day-to-day run to equilibrium under `toll` (none for the baseline).
ScenarioRun run_scenario(const ExperimentConfig& cfg, const std::optional<TollProfile>& toll);

// Runs the scenario and writes population.csv, days.csv, trajectory files,
// summary.json and config.echo into out_dir.
ScenarioSummary run_nte(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
ScenarioSummary run_fixed_toll(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Welfare per capita at the equilibrium reached under from_vector(v).
bo::Objective welfare_objective(const ExperimentConfig& cfg, const Population& population);

struct CampaignResult {
    int replication = 0;
    bo::BOTrace trace;
    double baseline_welfare = 0.0;  // untolled welfare on the same seeds
};

struct CampaignSummary {
    std::vector<CampaignResult> campaigns;
    double best_mean = 0.0;
    double best_std = 0.0;  // sample standard deviation; 0 for one campaign
};

CampaignSummary summarize(std::vector<CampaignResult> campaigns);

// Configuration of replication r: BO and dynamics seeds shifted by r.
ExperimentConfig replication_config(const ExperimentConfig& cfg, int replication);

// One BO campaign (no file output).
CampaignResult run_campaign(const ExperimentConfig& cfg, int replication,
                            const bo::EvaluationObserver& observer = {});

// `replications` campaigns on `jobs` worker threads. Writes bo_trace_<r>.csv
// after every evaluation, then summary.json and config.echo.
CampaignSummary run_optimize(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

void write_days_csv(std::ostream& out, const EquilibriumResult& eq);
void write_trace_csv(std::ostream& out, const bo::BOTrace& trace);

}  // namespace todp
