#include "ecselect/topography.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ecselect/error.hpp"

namespace ecselect {

std::string importance_color(double normalized) {
  const double v = std::clamp(normalized, 0.0, 1.0);
  const int red = static_cast<int>(std::lround(255.0 * v));
  const int blue = 255 - red;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x00%02x", red, blue);
  return buf;
}

std::optional<std::string> topography_svg(const IcecReport& report,
                                          const std::vector<ChannelMeta>& channels) {
  const std::size_t k = report.normalized.size();
  if (channels.size() != k) throw ConfigError("channel list does not match the report");
  for (const ChannelMeta& c : channels) {
    if (!c.position) return std::nullopt;
  }
  std::vector<std::size_t> rank(k);
  for (std::size_t r = 0; r < report.ranking.size(); ++r) rank[report.ranking[r]] = r;

  constexpr double kSize = 400.0;
  constexpr double kCentre = kSize / 2.0;
  constexpr double kHead = 170.0;
  constexpr double kMinR = 5.0;
  constexpr double kMaxR = 14.0;
  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" "
         "viewBox=\"0 0 400 400\">\n";
  svg << "<title>" << report.metric << " " << report.band.name << "</title>\n";
  svg << "<polygon points=\"" << kCentre - 14 << "," << kCentre - kHead + 2 << " " << kCentre
      << "," << kCentre - kHead - 18 << " " << kCentre + 14 << "," << kCentre - kHead + 2
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  svg << "<circle cx=\"" << kCentre << "\" cy=\"" << kCentre << "\" r=\"" << kHead
      << "\" fill=\"white\" stroke=\"black\" stroke-width=\"2\"/>\n";
  // Largest discs last so they stay visible where neighbours overlap.
  for (std::size_t n = k; n-- > 0;) {
    const std::size_t c = report.ranking[n];
    const auto& pos = *channels[c].position;
    const double scale = k > 1 ? static_cast<double>(k - 1 - rank[c]) / static_cast<double>(k - 1)
                               : 1.0;
    const double radius = kMinR + (kMaxR - kMinR) * scale;
    svg << "<circle cx=\"" << kCentre + kHead * pos[0] << "\" cy=\"" << kCentre - kHead * pos[1]
        << "\" r=\"" << radius << "\" fill=\"" << importance_color(report.normalized[c])
        << "\" stroke=\"black\" stroke-width=\"0.5\"><title>" << channels[c].name << " "
        << report.normalized[c] << "</title></circle>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ecselect
