#pragma once

#include <iosfwd>
#include <string>

#include "rrmfem/mesh.hpp"

namespace rrm {

/// JSON object {"xs": [...], "ys": [...], "active": [0/1,...]} with the
/// active mask stored row-major (i fastest).
std::string grid_to_json(const RectGrid& g);
RectGrid grid_from_json(const std::string& text);
RectGrid load_grid(const std::string& path);
void save_grid(const RectGrid& g, const std::string& path);

}  // namespace rrm
