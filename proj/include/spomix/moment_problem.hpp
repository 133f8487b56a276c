#pragma once

#include "spomix/types.hpp"

#include <utility>

namespace spomix {

/// Stability report for a pencil solve.
struct PencilDiagnostics {
    double hankel_sigma_min = 0.0;   // smallest singular value of H0
    /// Min pairwise distance among recovered effects; DBL_MAX when k = 1.
    double atom_separation = 0.0;
    /// Smallest weight before simplex projection; negative values mean the
    /// raw Vandermonde solve left the simplex.
    double weight_negativity = 0.0;
};

struct PencilOptions {
    /// H0 counts as degenerate when sigma_min < hankel_rel_tolerance * sigma_max.
    double hankel_rel_tolerance = 1e-10;
    /// Absolute imaginary-part tolerance; atoms beyond it raise ComplexAtoms,
    /// below it the imaginary part is truncated.
    double imag_tolerance = 1e-6;
};

/// k x k Hankel matrix over (nu_0=1, seq.values): entry (i,j) = nu_{i+j+shift},
/// shift in {0,1}.
Matrix hankel(const MomentSequence& seq, int shift);

/// Matrix pencil solve of the k-atom moment problem: effects are the
/// generalized eigenvalues of (H1, H0), weights come from the Vandermonde
/// system against nu_0..nu_{k-1} and are projected to the simplex. Output in
/// canonical order (effects ascending, ties by descending weight).
/// Throws DegenerateHankel / ComplexAtoms.
std::pair<MixtureOfEffects, PencilDiagnostics>
matrix_pencil(const MomentSequence& seq, const PencilOptions& opts = {});

/// Prony cross-check: solve the Hankel system for the annihilating
/// polynomial, take its roots as effects, then the same weight recovery and
/// canonicalization as matrix_pencil.
MixtureOfEffects prony(const MomentSequence& seq, const PencilOptions& opts = {});

/// Euclidean projection onto the probability simplex. Idempotent.
Vector project_to_simplex(const Vector& w);

} // namespace spomix
