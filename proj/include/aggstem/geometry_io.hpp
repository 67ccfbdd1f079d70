#ifndef AGGSTEM_GEOMETRY_IO_HPP
#define AGGSTEM_GEOMETRY_IO_HPP

#include <filesystem>
#include <string>

#include "aggstem/geometry.hpp"

namespace aggstem {

// Text geometry format: '#'-prefixed header lines carrying seed and theta,
// then one particle per line as `x y z r label` (nm). Floating fields are
// written with 17 significant digits so a write/read cycle is bit exact.
//
//   # seed 42
//   # theta 2 0.5 3 3
//   0 0 0 12.5 0

std::string format_geometry(const Aggregate& a);
Aggregate parse_geometry(const std::string& text);

void save_geometry(const Aggregate& a, const std::filesystem::path& file);
Aggregate load_geometry(const std::filesystem::path& file);

// Shared numeric formatting: shortest round-trip-safe decimal for doubles.
std::string format_double(double v);

} // namespace aggstem

#endif
