// spo-mix: dataset generation, single-run estimation at hierarchy levels
// 2/3/4, parameter sweeps and the exact-population oracle.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error.

#include "spomix/baseline.hpp"
#include "spomix/dataset.hpp"
#include "spomix/errors.hpp"
#include "spomix/moments.hpp"
#include "spomix/rng.hpp"
#include "spomix/spo.hpp"
#include "spomix/sweep.hpp"
#include "spomix/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

json vec_json(const spomix::Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

json matrix_json(const spomix::Matrix& m) {
    json rows = json::array();
    for (spomix::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (spomix::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

spomix::ModelSpec spec_for_model(const std::string& model, double mu_zt, double mu_xy) {
    if (model == "paper") return spomix::hierarchy_model(mu_zt, mu_xy);
    if (model == "appendix1" || model == "appendix2") return spomix::four_covariate_model();
    throw spomix::ConfigError("unknown model '" + model + "' (expected paper, appendix1 or appendix2)");
}

int run_gen(const std::string& model, double mu_zt, double mu_xy, std::int64_t n,
            std::uint64_t seed, const std::string& out) {
    const spomix::ModelSpec spec = spec_for_model(model, mu_zt, mu_xy);
    const spomix::Dataset data = spomix::sample(spec, n, seed);
    spomix::write_csv(data, out);
    std::cerr << "wrote " << data.n() << " rows to " << out << "\n";
    return kExitOk;
}

int run_estimate(const std::string& in, int level, int k, bool dump_moments,
                 std::uint64_t seed, int restarts) {
    const spomix::Dataset data = spomix::read_csv(in);
    const auto violations = spomix::validate_dataset(data);
    if (!violations.empty()) {
        json v = violations;
        std::cerr << "invalid dataset:\n" << v.dump(2) << "\n";
        return kExitConfig;
    }

    json out{{"input", in}, {"level", level}, {"n", data.n()}};
    if (level == 2) {
        const spomix::JointTensor tensor = spomix::joint_tensor(data);
        spomix::CpAlsInfo info;
        const spomix::MixtureFactors factors = spomix::cp_als(tensor, k, restarts, seed, &info);
        out["weights"] = vec_json(factors.weights);
        out["f_z"] = matrix_json(factors.f_z);
        out["f_x"] = matrix_json(factors.f_x);
        out["f_s"] = matrix_json(factors.f_s);
        out["als"] = {{"residual", info.residual},
                      {"iterations", info.iterations},
                      {"converged", info.converged}};
    } else {
        const spomix::MomentBundle bundle = spomix::estimate_bundle(data);
        const spomix::ConditionDiagnostic diag = spomix::condition_diagnostic(bundle);
        out["arm_sigma_min"] = {diag.arm[0].sigma_min, diag.arm[1].sigma_min};
        out["arm_condition"] = {diag.arm[0].condition, diag.arm[1].condition};
        if (dump_moments) out["moments"] = spomix::bundle_to_json(bundle);
        if (level == 4) {
            out["ate"] = spomix::ate(bundle);
            if (bundle.d_z() >= bundle.d_x()) {
                out["ate_pseudoinverse"] = spomix::ate_via_pseudoinverse(bundle);
            }
        } else {
            const spomix::MomentSequence seq = spomix::response_moment_sequence(bundle, k);
            const auto [mix, pencil_diag] = spomix::matrix_pencil(seq);
            out["moment_sequence"] = vec_json(seq.values);
            out["weights"] = vec_json(mix.weights);
            out["effects"] = vec_json(mix.effects);
            out["pencil"] = {{"hankel_sigma_min", pencil_diag.hankel_sigma_min},
                             {"atom_separation", pencil_diag.atom_separation},
                             {"weight_negativity", pencil_diag.weight_negativity}};
        }
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int run_sweep(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw spomix::IoError("cannot open config " + config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw spomix::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const spomix::ExperimentConfig config = spomix::ExperimentConfig::from_json(j);
    const spomix::SweepResult result = spomix::sweep(config);
    spomix::emit(result, config.output);
    std::cerr << "wrote " << result.rows.size() << " rows to " << config.output << "/sweep.csv\n";
    for (const auto& [key, mean] : result.grand_mean) {
        std::cerr << "  grand mean " << key << " = " << mean << "\n";
    }
    return kExitOk;
}

int run_oracle(const std::string& model, double mu_zt, double mu_xy, int k) {
    const spomix::ModelSpec spec = spec_for_model(model, mu_zt, mu_xy);
    const spomix::GroundTruth truth = spomix::exact_ground_truth(spec);
    const spomix::MomentBundle bundle = spomix::exact_bundle(spec);

    json out{
        {"model", model},
        {"mu_zt", mu_zt},
        {"mu_xy", mu_xy},
        {"truth",
         {{"ate", truth.ate},
          {"weights", vec_json(truth.mte.weights)},
          {"effects", vec_json(truth.mte.effects)}}},
        {"moments", spomix::bundle_to_json(bundle)},
    };
    out["estimates"]["ate"] = spomix::ate(bundle);
    out["estimates"]["ate_pseudoinverse"] = spomix::ate_via_pseudoinverse(bundle);
    const spomix::MomentSequence seq = spomix::response_moment_sequence(bundle, k);
    out["estimates"]["moment_sequence"] = vec_json(seq.values);
    try {
        const auto [mix, diag] = spomix::matrix_pencil(seq);
        out["estimates"]["weights"] = vec_json(mix.weights);
        out["estimates"]["effects"] = vec_json(mix.effects);
        out["estimates"]["pencil"] = {{"hankel_sigma_min", diag.hankel_sigma_min},
                                      {"atom_separation", diag.atom_separation},
                                      {"weight_negativity", diag.weight_negativity}};
    } catch (const spomix::Error& e) {
        out["estimates"]["mte_failure"] = e.code();
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixture-of-treatment-effects estimation from confounded observational data"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Sample a synthetic dataset to CSV");
    std::string gen_model = "paper";
    double gen_mu_zt = 0.0, gen_mu_xy = 0.0;
    std::int64_t gen_n = 1000;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    gen->add_option("--model", gen_model, "paper | appendix1 | appendix2");
    gen->add_option("--mu-zt", gen_mu_zt, "treatment-assignment parameter in [0,1] (paper model)");
    gen->add_option("--mu-xy", gen_mu_xy, "treatment-effect parameter in [0,1] (paper model)");
    gen->add_option("--n", gen_n, "sample count")->required();
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--out", gen_out, "output CSV path")->required();

    // estimate
    auto* est = app.add_subcommand("estimate", "Run one estimator on a dataset CSV");
    std::string est_in;
    int est_level = 3;
    int est_k = 2;
    bool est_dump = false;
    std::uint64_t est_seed = 1;
    int est_restarts = 10;
    est->add_option("--in", est_in, "input CSV path")->required();
    est->add_option("--level", est_level, "2 (mixture), 3 (MTE) or 4 (ATE)")
        ->check(CLI::IsMember({2, 3, 4}));
    est->add_option("--k", est_k, "latent component count");
    est->add_flag("--dump-moments", est_dump, "include the moment bundle in the output");
    est->add_option("--seed", est_seed, "rng seed (level 2 restarts)");
    est->add_option("--restarts", est_restarts, "CP-ALS restarts (level 2)");

    // sweep
    auto* sw = app.add_subcommand("sweep", "Run a configured grid of experiments");
    std::string sweep_config;
    sw->add_option("--config", sweep_config, "JSON config path")->required();

    // oracle
    auto* orc = app.add_subcommand("oracle", "Print exact ground truth and exact-moment estimates");
    std::string orc_model = "paper";
    double orc_mu_zt = 0.0, orc_mu_xy = 0.0;
    int orc_k = 2;
    orc->add_option("--model", orc_model, "paper | appendix1 | appendix2");
    orc->add_option("--mu-zt", orc_mu_zt, "treatment-assignment parameter");
    orc->add_option("--mu-xy", orc_mu_xy, "treatment-effect parameter");
    orc->add_option("--k", orc_k, "latent component count");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen->parsed()) return run_gen(gen_model, gen_mu_zt, gen_mu_xy, gen_n, gen_seed, gen_out);
        if (est->parsed()) return run_estimate(est_in, est_level, est_k, est_dump, est_seed, est_restarts);
        if (sw->parsed()) return run_sweep(sweep_config);
        if (orc->parsed()) return run_oracle(orc_model, orc_mu_zt, orc_mu_xy, orc_k);
    } catch (const spomix::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const spomix::Error& e) {
        std::cerr << e.code() << ": " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
