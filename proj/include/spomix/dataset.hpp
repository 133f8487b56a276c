#pragma once

#include "spomix/types.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace spomix {

/// Checks every Dataset invariant and returns one human-readable line per
/// violation (empty list = valid). Diagnostic only, never throws.
std::vector<std::string> validate_dataset(const Dataset& d);

/// Row-disjoint partition into the T=0 and T=1 arms, preserving row order and
/// the u column. Throws EmptyArm if either arm has no rows.
std::pair<Dataset, Dataset> split_by_treatment(const Dataset& d);

/// CSV schema: header `z1,..,zdZ,x1,..,xdX,t,y[,u]`, 64-bit float cells,
/// t in {0,1}, u integer. Values are written in shortest round-trip form, so
/// write/read is lossless and byte-deterministic.
Dataset read_csv(const std::filesystem::path& path);
void write_csv(const Dataset& d, const std::filesystem::path& path);

} // namespace spomix
