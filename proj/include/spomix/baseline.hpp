#pragma once

#include "spomix/synthetic.hpp"
#include "spomix/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace spomix {

/// Empirical joint probability tensor over (Z value, X value, S) where
/// S = (T,Y) has the 4 values s = 2t + y.
struct JointTensor {
    std::array<int, 3> dims{0, 0, 4};
    std::vector<double> p;

    double& at(int z, int x, int s) {
        return p[static_cast<std::size_t>((z * dims[1] + x) * dims[2] + s)];
    }
    double at(int z, int x, int s) const {
        return p[static_cast<std::size_t>((z * dims[1] + x) * dims[2] + s)];
    }
    double total() const;
};

/// Rank-k mixture-of-products estimate: per-class weight plus column-
/// stochastic conditionals for Z, X and S = (T,Y).
struct MixtureFactors {
    Vector weights;   // k, on the simplex
    Matrix f_z;       // |Z| x k
    Matrix f_x;       // |X| x k
    Matrix f_s;       // 4 x k
};

struct CpAlsInfo {
    double residual = 0.0;             // Frobenius residual of the best restart
    int iterations = 0;                // sweeps used by the best restart
    bool converged = false;            // false = stopped at max_iterations
    std::vector<double> residual_trace; // per-sweep residuals, best restart
};

struct CpAlsOptions {
    int max_iterations = 500;
    double rel_change_tolerance = 1e-9;
};

/// Frequency tensor of a dataset. Z/X columns must be binary: rows that are
/// exact one-hot indicators decode to the indicated value, otherwise 0/1
/// columns are read as bits of a packed value. Throws NonBinaryData.
JointTensor joint_tensor(const Dataset& d);

/// Population tensor of an exact joint (U marginalized out).
JointTensor joint_tensor(const JointDistribution& joint);

/// Best-of-restarts rank-k CP approximation by alternating least squares,
/// then per-component sign canonicalization, clipping at 0, column
/// renormalization (scales absorbed into the weights) and simplex projection.
/// Components ordered by descending weight, ties by lexicographic f_s column.
/// Non-convergence is reported through CpAlsInfo, never thrown.
MixtureFactors cp_als(const JointTensor& t, int k, int restarts,
                      std::uint64_t seed, CpAlsInfo* info = nullptr,
                      const CpAlsOptions& opts = {});

/// Total variation distance between the exact joint and the product-form
/// estimate, minimized over the k! latent label permutations.
double tv_distance(const JointDistribution& truth, const MixtureFactors& est);

/// Squared l2 distance between mixture parameters, minimized over label
/// permutations: min_pi ||w - w'_pi||^2 + ||e - e'_pi||^2.
double mte_error(const MixtureOfEffects& truth, const MixtureOfEffects& est);

/// Squared ATE difference.
double ate_error(double truth, double est);

} // namespace spomix
