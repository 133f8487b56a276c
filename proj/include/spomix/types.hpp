#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>

namespace spomix {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;
using Index = Eigen::Index;

inline constexpr const char* kVersion = "0.1.0";

/// Tabular observational sample: proxy features Z, proxy features X, binary
/// treatment T, outcome Y, and (synthetic data only) the latent class U.
/// Immutable by convention once constructed.
struct Dataset {
    Matrix z;                      // n x d_z
    Matrix x;                      // n x d_x
    IntVector t;                   // n, entries in {0,1}
    Vector y;                      // n
    std::optional<IntVector> u;    // n, latent class labels, evaluation only

    Index n() const { return t.size(); }
    Index d_z() const { return z.cols(); }
    Index d_x() const { return x.cols(); }
};

/// The observable moment objects an estimator consumes. Arm-conditional
/// entries are within-arm averages E[. | T=t]. `exact` marks bundles produced
/// by population enumeration rather than sample averages (n_t is then 0).
struct MomentBundle {
    Vector m_x;                        // E[X], length d_x
    std::array<Matrix, 2> m_zx_t;      // E[Z_i X_j | T=t], d_z x d_x
    std::array<Vector, 2> m_zy_t;      // E[Z_i Y | T=t], length d_z
    std::array<Matrix, 2> m_zxy_t;     // E[Z_i X_j Y | T=t], d_z x d_x
    std::array<std::int64_t, 2> n_t{0, 0};
    bool exact = false;

    Index d_z() const { return m_zx_t[0].rows(); }
    Index d_x() const { return m_x.size(); }
};

/// Coefficient triple for one moment order: applying gamma to E[X] yields the
/// order-`order` moment of the treatment response.
struct SpoCoefficients {
    int order = 0;
    Vector alpha;
    Vector beta;
    Vector gamma;   // alpha - beta, by construction
};

/// Discrete mixture of treatment effects in canonical order: effects sorted
/// ascending (ties broken by descending weight), weights on the simplex.
struct MixtureOfEffects {
    int k = 0;
    Vector weights;
    Vector effects;
};

/// Response power moments nu_1..nu_{2k-1}; nu_0 = 1 is implicit.
struct MomentSequence {
    int k = 0;
    Vector values;   // length 2k-1
};

} // namespace spomix
