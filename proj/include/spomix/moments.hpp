#pragma once

#include "spomix/types.hpp"

#include <json.hpp>

#include <array>

namespace spomix {

/// E[X]: column means over the whole dataset. Throws EmptyDataset.
Vector mean_vector(const Dataset& d);

/// E[Z_i X_j] (weight_by_outcome=false) or E[Z_i X_j Y] (true) over the whole
/// dataset. Throws EmptyDataset.
Matrix cross_moment(const Dataset& d, bool weight_by_outcome = false);

/// All observable moments: the full-population mean of X plus the within-arm
/// averages of Z x X, Z x Y and Z x XY. Throws EmptyArm.
MomentBundle estimate_bundle(const Dataset& d);

struct ArmConditioning {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    double condition = 0.0;      // sigma_max / sigma_min, inf when singular
    bool rank_deficient = false; // sigma_min < tolerance * sigma_max
};

struct ConditionDiagnostic {
    std::array<ArmConditioning, 2> arm;
    double rel_tolerance = 0.0;
};

/// Smallest singular value and condition number of E[Z,X|t] per arm. An arm
/// is flagged when sigma_min < rel_tolerance * sigma_max.
ConditionDiagnostic condition_diagnostic(const MomentBundle& bundle,
                                         double rel_tolerance = 1e-8);

/// JSON form used by the CLI --dump-moments flag; matrices serialize as
/// nested row-major arrays.
nlohmann::json bundle_to_json(const MomentBundle& bundle);
MomentBundle bundle_from_json(const nlohmann::json& j);

} // namespace spomix
