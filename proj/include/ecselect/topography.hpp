#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ecselect/icec.hpp"
#include "ecselect/signal.hpp"

namespace ecselect {

/// "#rrggbb" linearly interpolated from blue (0) to red (1).
std::string importance_color(double normalized);

/// Schematic scalp map: head outline, nose marker, one disc per electrode coloured
/// by normalized ICEC and sized by rank. nullopt when any channel lacks a position.
std::optional<std::string> topography_svg(const IcecReport& report,
                                          const std::vector<ChannelMeta>& channels);

}  // namespace ecselect
