#pragma once

#include "spomix/types.hpp"

namespace spomix {

struct SpoSolveOptions {
    /// Relative sigma_min threshold below which an arm matrix counts as
    /// singular and SingularMomentMatrix is thrown.
    double rel_tolerance = 1e-8;
    /// Exploratory ridge added to the diagonal of E[Z,X|t] before solving.
    /// Off by default; leaving it at 0 keeps identifiability failures loud
    /// instead of smoothing them over.
    double ridge = 0.0;
};

/// Order-1 coefficients: alpha = solve(E[Z,X|T=1], E[Z,Y|T=1]), beta the
/// T=0 analogue, gamma = alpha - beta. Requires square arm matrices
/// (d_z == d_x) passing the conditioning check.
SpoCoefficients first_moment_coeffs(const MomentBundle& bundle,
                                    const SpoSolveOptions& opts = {});

/// Order l = prev.order + 1 coefficients:
/// alpha = solve(E[Z,X|T=1], E[Z,XY|T=1] * prev.gamma), beta analogously.
SpoCoefficients next_moment_coeffs(const MomentBundle& bundle,
                                   const SpoCoefficients& prev,
                                   const SpoSolveOptions& opts = {});

/// Average treatment effect E[X]^T gamma^(1).
double ate(const MomentBundle& bundle, const SpoSolveOptions& opts = {});

/// Response moments nu_1..nu_{2k-1} via the coefficient recursion. Each arm
/// matrix is factorized once and the factorization reused across orders.
MomentSequence response_moment_sequence(const MomentBundle& bundle, int k,
                                        const SpoSolveOptions& opts = {});

/// ATE through the rectangular route: E[Y^(t)] = E[ZY|t]^T pinv(E[Z,X|t]^T) E[X]
/// per arm, differenced. Needs d_z >= d_x and full row rank d_x of E[X,Z|t];
/// coincides with ate() on square nonsingular bundles.
double ate_via_pseudoinverse(const MomentBundle& bundle,
                             double rel_tolerance = 1e-8);

} // namespace spomix
