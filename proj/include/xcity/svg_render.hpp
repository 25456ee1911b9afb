#pragma once

#include <string>

#include "xcity/json_io.hpp"

namespace xcity {

// Renders a result (either phase) to a standalone SVG: space boundary, asset
// segments as solid strokes with node dots and id labels, transitions as
// dashed blue strokes. Byte output is deterministic for identical input.
std::string render_svg(const LoadedResult& result);

}  // namespace xcity
