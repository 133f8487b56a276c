#include "spomix/sweep.hpp"

#include "spomix/baseline.hpp"
#include "spomix/dataset.hpp"
#include "spomix/errors.hpp"
#include "spomix/moments.hpp"
#include "spomix/rng.hpp"
#include "spomix/spo.hpp"
#include "spomix/synthetic.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

namespace spomix {

namespace {

constexpr std::uint64_t kStreamData = 0x64617461; // "data"
constexpr std::uint64_t kStreamAls = 0x616c73;    // "als"

bool is_synthetic_model(const std::string& model) {
    return model == "paper" || model == "appendix1" || model == "appendix2";
}

std::optional<ModelSpec> model_spec_for(const ExperimentConfig& config, double mu_zt, double mu_xy) {
    if (config.model == "paper") return hierarchy_model(mu_zt, mu_xy);
    if (config.model == "appendix1" || config.model == "appendix2") return four_covariate_model();
    return std::nullopt; // CSV-backed: no oracle
}

std::uint64_t run_stream_seed(const ExperimentConfig& config, double mu_zt, double mu_xy,
                              int run_index, std::uint64_t stream) {
    // Keyed on the grid point's value bits (not its index), so extending the
    // grid leaves existing points' streams untouched.
    return Rng::derive({config.seed, std::bit_cast<std::uint64_t>(mu_zt),
                        std::bit_cast<std::uint64_t>(mu_xy),
                        static_cast<std::uint64_t>(run_index), stream});
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

struct Aggregate {
    double mean = 0.0;
    double sd = 0.0;
    int successes = 0;
    int failures = 0;
};

Aggregate aggregate_errors(const std::vector<double>& errors, int failures) {
    Aggregate agg;
    agg.failures = failures;
    agg.successes = static_cast<int>(errors.size());
    if (errors.empty()) return agg;
    double s = 0.0;
    for (double e : errors) s += e;
    agg.mean = s / static_cast<double>(errors.size());
    double ss = 0.0;
    for (double e : errors) ss += (e - agg.mean) * (e - agg.mean);
    agg.sd = std::sqrt(ss / static_cast<double>(errors.size()));
    return agg;
}

} // namespace

void ExperimentConfig::validate() const {
    if (!is_synthetic_model(model) && model.empty()) {
        throw ConfigError("model must be paper, appendix1, appendix2 or a CSV path");
    }
    if (n < 0) throw ConfigError("n must be >= 0 (0 = exact population moments)");
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (restarts < 1) throw ConfigError("restarts must be >= 1");
    if (levels.empty()) throw ConfigError("levels must be non-empty");
    for (int level : levels) {
        if (level < 2 || level > 4) throw ConfigError("levels must be a subset of {2,3,4}");
    }
    if (mu_zt.empty() || mu_xy.empty()) throw ConfigError("grid must be non-empty");
    for (double v : mu_zt) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("mu_zt values must lie in [0,1]");
    }
    for (double v : mu_xy) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("mu_xy values must lie in [0,1]");
    }
    if (!is_synthetic_model(model) && n == 0) {
        throw ConfigError("exact mode (n=0) needs a synthetic model");
    }
}

nlohmann::json ExperimentConfig::to_json() const {
    return nlohmann::json{
        {"model", model}, {"mu_zt", mu_zt},   {"mu_xy", mu_xy},     {"n", n},
        {"runs", runs},   {"seed", seed},     {"levels", levels},   {"k", k},
        {"output", output}, {"restarts", restarts}, {"threads", threads},
    };
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("model")) c.model = j.at("model").get<std::string>();
        if (j.contains("mu_zt")) c.mu_zt = j.at("mu_zt").get<std::vector<double>>();
        if (j.contains("mu_xy")) c.mu_xy = j.at("mu_xy").get<std::vector<double>>();
        if (j.contains("n")) c.n = j.at("n").get<std::int64_t>();
        if (j.contains("runs")) c.runs = j.at("runs").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("levels")) c.levels = j.at("levels").get<std::vector<int>>();
        if (j.contains("k")) c.k = j.at("k").get<int>();
        if (j.contains("output")) c.output = j.at("output").get<std::string>();
        if (j.contains("restarts")) c.restarts = j.at("restarts").get<int>();
        if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    c.validate();
    return c;
}

RunRecord run_once(const ExperimentConfig& config, double mu_zt, double mu_xy, int run_index) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    RunRecord record;
    record.mu_zt = mu_zt;
    record.mu_xy = mu_xy;
    record.run_index = run_index;
    record.seed = run_stream_seed(config, mu_zt, mu_xy, run_index, kStreamData);

    const std::optional<ModelSpec> spec = model_spec_for(config, mu_zt, mu_xy);
    std::optional<GroundTruth> truth;
    if (spec) truth = exact_ground_truth(*spec);

    const bool want2 = std::find(config.levels.begin(), config.levels.end(), 2) != config.levels.end();
    const bool want3 = std::find(config.levels.begin(), config.levels.end(), 3) != config.levels.end();
    const bool want4 = std::find(config.levels.begin(), config.levels.end(), 4) != config.levels.end();

    // One dataset (or the exact population) shared by every requested level.
    std::optional<Dataset> data;
    std::optional<MomentBundle> bundle;
    std::optional<JointTensor> tensor;
    std::string input_failure;
    try {
        if (spec && config.n > 0) {
            data = sample(*spec, config.n, record.seed);
        } else if (!spec) {
            data = read_csv(config.model);
        }
        if (want3 || want4) {
            bundle = spec && config.n == 0 ? exact_bundle(*spec) : estimate_bundle(*data);
        }
        if (want2) {
            tensor = spec && config.n == 0 ? joint_tensor(truth->joint) : joint_tensor(*data);
        }
    } catch (const Error& e) {
        input_failure = e.code();
    }

    if (bundle) {
        const ConditionDiagnostic diag = condition_diagnostic(*bundle);
        for (int t = 0; t < 2; ++t) {
            record.arm_sigma_min[t] = diag.arm[t].sigma_min;
            record.arm_condition[t] = diag.arm[t].condition;
        }
    }

    if (want4) {
        LevelOutcome& out = record.levels[4];
        out.metric = "ate";
        if (!input_failure.empty()) {
            out.failure = input_failure;
        } else {
            try {
                out.estimate = ate(*bundle);
                if (truth) out.error = ate_error(truth->ate, out.estimate);
            } catch (const Error& e) {
                out.failure = e.code();
            }
        }
    }

    if (want3) {
        LevelOutcome& out = record.levels[3];
        out.metric = "mte";
        if (!input_failure.empty()) {
            out.failure = input_failure;
        } else {
            try {
                const MomentSequence seq = response_moment_sequence(*bundle, config.k);
                auto [mix, diag] = matrix_pencil(seq);
                record.pencil = diag;
                record.has_pencil = true;
                out.weights = mix.weights;
                out.effects = mix.effects;
                if (truth) out.error = mte_error(truth->mte, mix);
            } catch (const Error& e) {
                out.failure = e.code();
            }
        }
    }

    if (want2) {
        LevelOutcome& out = record.levels[2];
        out.metric = "tv";
        if (!input_failure.empty()) {
            out.failure = input_failure;
        } else {
            try {
                const std::uint64_t als_seed =
                    run_stream_seed(config, mu_zt, mu_xy, run_index, kStreamAls);
                const MixtureFactors factors = cp_als(*tensor, config.k, config.restarts, als_seed);
                if (truth) out.error = tv_distance(truth->joint, factors);
            } catch (const Error& e) {
                out.failure = e.code();
            }
        }
    }

    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return record;
}

SweepResult sweep(const ExperimentConfig& config) {
    config.validate();

    struct GridPoint {
        double mu_zt;
        double mu_xy;
    };
    std::vector<GridPoint> grid;
    if (config.model == "paper") {
        for (double zt : config.mu_zt) {
            for (double xy : config.mu_xy) grid.push_back({zt, xy});
        }
    } else {
        grid.push_back({0.0, 0.0}); // single-point families; mu columns are placeholders
    }

    SweepResult result;
    result.config = config;
    result.records.resize(grid.size() * static_cast<std::size_t>(config.runs));

    // Independent jobs on a bounded pool; each writes its preassigned slot so
    // gather order never depends on scheduling.
    const std::size_t total = result.records.size();
    unsigned pool = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
    pool = static_cast<unsigned>(std::min<std::size_t>(pool, total));
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (std::size_t job = cursor.fetch_add(1); job < total; job = cursor.fetch_add(1)) {
            const GridPoint& gp = grid[job / static_cast<std::size_t>(config.runs)];
            const int run_index = static_cast<int>(job % static_cast<std::size_t>(config.runs));
            result.records[job] = run_once(config, gp.mu_zt, gp.mu_xy, run_index);
        }
    };
    if (pool <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(pool);
        for (unsigned i = 0; i < pool; ++i) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }

    std::map<std::string, std::pair<double, int>> grand; // sum of grid means, count
    for (std::size_t g = 0; g < grid.size(); ++g) {
        for (int level : config.levels) {
            std::vector<double> errors;
            int failures = 0;
            std::string metric;
            for (int r = 0; r < config.runs; ++r) {
                const RunRecord& rec = result.records[g * static_cast<std::size_t>(config.runs) +
                                                      static_cast<std::size_t>(r)];
                const auto it = rec.levels.find(level);
                if (it == rec.levels.end()) continue;
                metric = it->second.metric;
                if (!it->second.failure.empty()) {
                    ++failures;
                } else if (std::isfinite(it->second.error)) {
                    errors.push_back(it->second.error);
                }
            }
            const Aggregate agg = aggregate_errors(errors, failures);
            result.rows.push_back({grid[g].mu_zt, grid[g].mu_xy, level, metric, agg.mean, agg.sd,
                                   config.runs, agg.failures});
            if (agg.successes > 0) {
                auto& acc = grand["level" + std::to_string(level) + ":" + metric];
                acc.first += agg.mean;
                acc.second += 1;
            }
        }
    }
    for (const auto& [key, acc] : grand) {
        result.grand_mean[key] = acc.first / static_cast<double>(acc.second);
    }
    return result;
}

namespace {

nlohmann::json record_to_json(const RunRecord& r) {
    nlohmann::json levels = nlohmann::json::object();
    for (const auto& [level, out] : r.levels) {
        nlohmann::json o{{"metric", out.metric}};
        if (!out.failure.empty()) o["failure"] = out.failure;
        if (std::isfinite(out.error)) o["error"] = out.error;
        if (std::isfinite(out.estimate)) o["estimate"] = out.estimate;
        if (out.weights.size() > 0) {
            o["weights"] = std::vector<double>(out.weights.data(), out.weights.data() + out.weights.size());
            o["effects"] = std::vector<double>(out.effects.data(), out.effects.data() + out.effects.size());
        }
        levels[std::to_string(level)] = std::move(o);
    }
    nlohmann::json j{
        {"mu_zt", r.mu_zt}, {"mu_xy", r.mu_xy},   {"run", r.run_index},
        {"seed", r.seed},   {"levels", levels},    {"wall_seconds", r.wall_seconds},
    };
    if (std::isfinite(r.arm_sigma_min[0])) {
        j["arm_sigma_min"] = {r.arm_sigma_min[0], r.arm_sigma_min[1]};
        j["arm_condition"] = {r.arm_condition[0], r.arm_condition[1]};
    }
    if (r.has_pencil) {
        j["pencil"] = {{"hankel_sigma_min", r.pencil.hankel_sigma_min},
                       {"atom_separation", r.pencil.atom_separation},
                       {"weight_negativity", r.pencil.weight_negativity}};
    }
    return j;
}

} // namespace

void emit(const SweepResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    {
        std::ofstream csv(dir / "sweep.csv");
        if (!csv) throw IoError("cannot open " + (dir / "sweep.csv").string());
        csv << "mu_zt,mu_xy,level,metric,mean,sd,runs,failures\n";
        for (const SweepRow& row : result.rows) {
            csv << format_double(row.mu_zt) << "," << format_double(row.mu_xy) << "," << row.level
                << "," << row.metric << "," << format_double(row.mean) << ","
                << format_double(row.sd) << "," << row.runs << "," << row.failures << "\n";
        }
        if (!csv) throw IoError("write failed: " + (dir / "sweep.csv").string());
    }

    nlohmann::json rows = nlohmann::json::array();
    for (const SweepRow& row : result.rows) {
        rows.push_back({{"mu_zt", row.mu_zt},
                        {"mu_xy", row.mu_xy},
                        {"level", row.level},
                        {"metric", row.metric},
                        {"mean", row.mean},
                        {"sd", row.sd},
                        {"runs", row.runs},
                        {"failures", row.failures}});
    }
    nlohmann::json records = nlohmann::json::array();
    for (const RunRecord& r : result.records) records.push_back(record_to_json(r));

    nlohmann::json doc{
        {"version", kVersion},
        {"config", result.config.to_json()},
        {"rows", std::move(rows)},
        {"grand_mean", result.grand_mean},
        {"records", std::move(records)},
    };
    std::ofstream js(dir / "sweep.json");
    if (!js) throw IoError("cannot open " + (dir / "sweep.json").string());
    js << doc.dump(2) << "\n";
    if (!js) throw IoError("write failed: " + (dir / "sweep.json").string());
}

std::vector<SweepRow> rows_from_sweep_json(const nlohmann::json& j) {
    std::vector<SweepRow> rows;
    for (const auto& r : j.at("rows")) {
        rows.push_back({r.at("mu_zt").get<double>(), r.at("mu_xy").get<double>(),
                        r.at("level").get<int>(), r.at("metric").get<std::string>(),
                        r.at("mean").get<double>(), r.at("sd").get<double>(), r.at("runs").get<int>(),
                        r.at("failures").get<int>()});
    }
    return rows;
}

} // namespace spomix
