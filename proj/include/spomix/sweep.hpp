#pragma once

#include "spomix/moment_problem.hpp"
#include "spomix/types.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace spomix {

/// One sweep: a grid of (mu_zt, mu_xy) points (single point for the
/// four-covariate and csv models), `runs` repetitions each, at the requested
/// hierarchy levels. n = 0 is the exact-population sentinel: estimators run
/// on enumerated moments instead of samples.
struct ExperimentConfig {
    std::string model = "paper";    // "paper" | "appendix1" | "appendix2" | CSV path
    std::vector<double> mu_zt{0.0};
    std::vector<double> mu_xy{0.0};
    std::int64_t n = 1000;
    int runs = 100;
    std::uint64_t seed = 1;
    std::vector<int> levels{2, 3, 4};
    int k = 2;
    std::string output = "out";
    int restarts = 10;              // CP-ALS restarts (level 2)
    int threads = 0;                // worker pool size, 0 = hardware

    void validate() const;         // throws ConfigError
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

/// Per-level outcome of a single run. Estimator failures land in `failure`
/// (the error code) instead of aborting the run.
struct LevelOutcome {
    std::string metric;            // "tv" | "mte" | "ate"
    double error = std::numeric_limits<double>::quiet_NaN();
    double estimate = std::numeric_limits<double>::quiet_NaN(); // level 4: the ATE
    Vector weights;                // level 3: recovered mixture (empty otherwise)
    Vector effects;
    std::string failure;
};

struct RunRecord {
    double mu_zt = 0.0;
    double mu_xy = 0.0;
    int run_index = 0;
    std::uint64_t seed = 0;        // derived data-stream seed
    std::map<int, LevelOutcome> levels;
    std::array<double, 2> arm_sigma_min{std::numeric_limits<double>::quiet_NaN(),
                                        std::numeric_limits<double>::quiet_NaN()};
    std::array<double, 2> arm_condition{std::numeric_limits<double>::quiet_NaN(),
                                        std::numeric_limits<double>::quiet_NaN()};
    PencilDiagnostics pencil;
    bool has_pencil = false;
    double wall_seconds = 0.0;
};

/// One aggregated CSV row: schema mu_zt,mu_xy,level,metric,mean,sd,runs,failures.
/// mean/sd are over the successful runs; `failures` counts the rest.
struct SweepRow {
    double mu_zt = 0.0;
    double mu_xy = 0.0;
    int level = 0;
    std::string metric;
    double mean = 0.0;
    double sd = 0.0;
    int runs = 0;
    int failures = 0;
};

struct SweepResult {
    ExperimentConfig config;
    std::vector<RunRecord> records;
    std::vector<SweepRow> rows;
    /// Mean over all grid points, keyed "level<L>:<metric>".
    std::map<std::string, double> grand_mean;
};

/// One grid point, one repetition. The data stream is derived from
/// (base seed, mu bits, run index) and the ALS stream separately, so enabling
/// or disabling levels never changes another level's numbers.
RunRecord run_once(const ExperimentConfig& config, double mu_zt, double mu_xy,
                   int run_index);

/// Full grid x runs sweep on a bounded worker pool; records are gathered in
/// grid-then-run order regardless of completion order.
SweepResult sweep(const ExperimentConfig& config);

/// Writes <dir>/sweep.csv and <dir>/sweep.json (records, config echo, version,
/// seeds, grand means). Throws IoError.
void emit(const SweepResult& result, const std::filesystem::path& dir);

/// Re-reads the aggregated table from a sweep.json written by emit().
std::vector<SweepRow> rows_from_sweep_json(const nlohmann::json& j);

} // namespace spomix
