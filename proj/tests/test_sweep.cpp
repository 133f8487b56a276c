#include "spomix/sweep.hpp"

#include "spomix/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace spomix;

namespace {

ExperimentConfig tiny_config() {
    ExperimentConfig c;
    c.model = "paper";
    c.mu_zt = {0.0, 1.0};
    c.mu_xy = {0.0};
    c.n = 300;
    c.runs = 3;
    c.seed = 5;
    c.levels = {3, 4};
    c.k = 2;
    c.restarts = 3;
    c.threads = 1;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("config validation rejects bad fields") {
    ExperimentConfig c = tiny_config();
    c.levels = {};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny_config();
    c.levels = {5};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny_config();
    c.runs = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny_config();
    c.mu_zt = {1.5};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = tiny_config();
    c.n = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_NOTHROW(tiny_config().validate());
}

TEST_CASE("config JSON round-trip") {
    const ExperimentConfig c = tiny_config();
    const ExperimentConfig back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.model == c.model);
    CHECK(back.mu_zt == c.mu_zt);
    CHECK(back.mu_xy == c.mu_xy);
    CHECK(back.n == c.n);
    CHECK(back.runs == c.runs);
    CHECK(back.seed == c.seed);
    CHECK(back.levels == c.levels);
    CHECK(back.k == c.k);
}

TEST_CASE("run_once produces finite errors on sampled data") {
    ExperimentConfig c = tiny_config();
    c.n = 1000;
    c.levels = {2, 3, 4};

    const RunRecord rec = run_once(c, 1.0, 0.0, 0);
    REQUIRE(rec.levels.count(3) == 1);
    CHECK(rec.levels.at(3).failure.empty());
    CHECK(std::isfinite(rec.levels.at(3).error));
    CHECK(rec.has_pencil);
    CHECK(std::isfinite(rec.arm_sigma_min[0]));

    const RunRecord rec2 = run_once(c, 0.0, 0.0, 1);
    REQUIRE(rec2.levels.count(2) == 1);
    CHECK(rec2.levels.at(2).failure.empty());
    CHECK(std::isfinite(rec2.levels.at(2).error));
    CHECK(rec2.levels.at(2).error >= 0.0);
    CHECK(rec2.levels.at(2).error <= 1.0);
}

TEST_CASE("exact mode recovers the mixture to solver precision") {
    ExperimentConfig c = tiny_config();
    c.n = 0; // population moments
    c.levels = {3, 4};
    const RunRecord rec = run_once(c, 1.0, 0.0, 0);
    CHECK(rec.levels.at(3).error < 1e-9);
    CHECK(rec.levels.at(4).error < 1e-18); // squared error
}

TEST_CASE("sweep emits one row per grid point, level and metric") {
    ExperimentConfig c = tiny_config();
    c.mu_zt = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    c.runs = 2;
    c.n = 200;
    const SweepResult result = sweep(c);
    CHECK(result.rows.size() == 22); // 11 grid points x 2 levels
    CHECK(result.records.size() == 22);
    CHECK(result.grand_mean.count("level3:mte") == 1);
    CHECK(result.grand_mean.count("level4:ate") == 1);

    // runs=1 collapses the sd column
    ExperimentConfig single = tiny_config();
    single.runs = 1;
    for (const SweepRow& row : sweep(single).rows) CHECK(row.sd == 0.0);
}

TEST_CASE("sweep output is byte-deterministic") {
    const ExperimentConfig c = tiny_config();
    TempDir d1("spomix_sweep_a");
    TempDir d2("spomix_sweep_b");
    emit(sweep(c), d1.path);
    emit(sweep(c), d2.path);
    const std::string csv1 = slurp(d1.path / "sweep.csv");
    CHECK_FALSE(csv1.empty());
    CHECK(csv1 == slurp(d2.path / "sweep.csv"));
    CHECK(csv1.substr(0, csv1.find('\n')) == "mu_zt,mu_xy,level,metric,mean,sd,runs,failures");
}

TEST_CASE("disabling one level leaves the others' numbers untouched") {
    ExperimentConfig with2 = tiny_config();
    with2.levels = {2, 3, 4};
    ExperimentConfig without2 = tiny_config();
    without2.levels = {3, 4};

    const SweepResult a = sweep(with2);
    const SweepResult b = sweep(without2);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        for (int level : {3, 4}) {
            REQUIRE(a.records[i].levels.count(level) == 1);
            REQUIRE(b.records[i].levels.count(level) == 1);
            CHECK(a.records[i].levels.at(level).error == b.records[i].levels.at(level).error);
        }
    }
}

TEST_CASE("estimator failures are recorded in-band, never fatal") {
    ExperimentConfig c = tiny_config();
    c.n = 5; // tiny samples: empty arms and singular matrices happen
    c.runs = 40;
    c.levels = {2, 3, 4};
    const SweepResult result = sweep(c);
    int failures = 0;
    for (const SweepRow& row : result.rows) failures += row.failures;
    CHECK(failures > 0);
    for (const RunRecord& rec : result.records) {
        for (int level : {2, 3, 4}) REQUIRE(rec.levels.count(level) == 1);
    }
    for (const SweepRow& row : result.rows) CHECK(row.runs == 40);
}

TEST_CASE("emitted JSON round-trips the aggregated table") {
    const SweepResult result = sweep(tiny_config());
    TempDir dir("spomix_sweep_json");
    emit(result, dir.path);
    std::ifstream in(dir.path / "sweep.json");
    nlohmann::json j;
    in >> j;
    const auto rows = rows_from_sweep_json(j);
    REQUIRE(rows.size() == result.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].mu_zt == result.rows[i].mu_zt);
        CHECK(rows[i].level == result.rows[i].level);
        CHECK(rows[i].metric == result.rows[i].metric);
        CHECK(rows[i].mean == result.rows[i].mean);
        CHECK(rows[i].sd == result.rows[i].sd);
        CHECK(rows[i].failures == result.rows[i].failures);
    }
    CHECK(j.at("version").get<std::string>() == std::string(kVersion));
    CHECK(j.at("records").size() == result.records.size());
}

TEST_CASE("four-covariate sweeps collapse to a single grid point") {
    ExperimentConfig c = tiny_config();
    c.model = "appendix1";
    c.n = 2000;
    c.levels = {4};
    c.runs = 2;
    const SweepResult result = sweep(c);
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0].metric == "ate");
    CHECK(std::isfinite(result.rows[0].mean));
}
