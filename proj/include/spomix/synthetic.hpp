#pragma once

#include "spomix/types.hpp"

#include <cstdint>
#include <vector>

namespace spomix {

enum class FeatureMap {
    /// Single binary covariate mapped to the indicator pair (1{v=0}, 1{v=1}).
    one_hot,
    /// Each binary covariate is its own 0/1 feature column.
    direct,
};

/// Fully discrete structural model over (U, Z, X, T, Y) with independent
/// Bernoulli covariates given U. Covariate configurations are bit-packed
/// (config = sum_c bit_c << c), and the treatment/outcome tables are indexed
/// by (configuration row, latent class column).
struct ModelSpec {
    int k = 0;
    Vector p_u;               // length k
    Matrix p_z_given_u;       // z covariates x k, P(Z_c = 1 | u)
    Matrix p_x_given_u;       // x covariates x k
    Matrix p_t_given_zu;      // 2^(z covariates) x k, P(T = 1 | z, u)
    Matrix p_y0_given_xu;     // 2^(x covariates) x k, P(Y(0) = 1 | x, u)
    Matrix p_y1_given_xu;     // 2^(x covariates) x k
    FeatureMap feature_map = FeatureMap::one_hot;

    int z_covariates() const { return static_cast<int>(p_z_given_u.rows()); }
    int x_covariates() const { return static_cast<int>(p_x_given_u.rows()); }
    int z_configs() const { return 1 << z_covariates(); }
    int x_configs() const { return 1 << x_covariates(); }
    int d_z() const { return feature_map == FeatureMap::one_hot ? 2 : z_covariates(); }
    int d_x() const { return feature_map == FeatureMap::one_hot ? 2 : x_covariates(); }

    /// Throws OutOfRange when probabilities leave [0,1], p_u is not a
    /// distribution, or the treatment table violates positivity.
    void validate() const;
};

/// Feature vector of a covariate configuration under the spec's feature map.
Vector z_features(const ModelSpec& spec, int z_config);
Vector x_features(const ModelSpec& spec, int x_config);

/// Exact joint probability table over (U, Z, X, T, Y), flat in that index
/// order (Z and X as bit-packed configurations).
struct JointDistribution {
    int k = 0;
    int z_configs = 0;
    int x_configs = 0;
    std::vector<double> p;

    double& at(int u, int z, int x, int t, int y) {
        return p[static_cast<std::size_t>((((u * z_configs + z) * x_configs + x) * 2 + t) * 2 + y)];
    }
    double at(int u, int z, int x, int t, int y) const {
        return p[static_cast<std::size_t>((((u * z_configs + z) * x_configs + x) * 2 + t) * 2 + y)];
    }
    double total() const;
};

/// Exact model-level answers, mechanized by exhaustive enumeration.
struct GroundTruth {
    double ate = 0.0;
    MixtureOfEffects mte;             // canonical order
    JointDistribution joint;          // (U,Z,X,T,Y)
    std::vector<double> joint_potential; // (U,Z,X,T,Y0,Y1), same leading strides

    double potential_at(int u, int z, int x, int t, int y0, int y1) const {
        const auto& j = joint;
        return joint_potential[static_cast<std::size_t>(
            ((((u * j.z_configs + z) * j.x_configs + x) * 2 + t) * 2 + y0) * 2 + y1)];
    }
};

/// The two-parameter binary family behind the identifiability sweeps:
/// uniform U, P[Z=1|U] = P[X=1|U] = (1/4, 3/4), with mu_zt shifting treatment
/// assignment from U-driven (0) to Z-driven (1) and mu_xy shifting the
/// treatment effect from U-driven (0) to X-driven (1). One-hot features.
ModelSpec hierarchy_model(double mu_zt, double mu_xy);

/// Four-covariate Bernoulli benchmark: two Z proxies and two X proxies with
/// class-dependent rates, T depending on U only, outcome depending on (U,T).
/// Direct 0/1 features, so d_z = d_x = k = 2.
ModelSpec four_covariate_model();

/// Ancestral sampling U -> (Z,X) -> T -> Y. Both potential outcomes are drawn
/// and Y(T) revealed; the u column is included for evaluation. Deterministic
/// in (spec, n, seed), identically across platforms (see rng.hpp).
Dataset sample(const ModelSpec& spec, std::int64_t n, std::uint64_t seed);

GroundTruth exact_ground_truth(const ModelSpec& spec);

/// Population values of every MomentBundle field (the oracle every empirical
/// estimator is tested against); `exact` flag set, n_t = 0.
MomentBundle exact_bundle(const ModelSpec& spec);

} // namespace spomix
