#include "rrmfem/mesh_io.hpp"

#include <fstream>

#include <json.hpp>

namespace rrm {

std::string grid_to_json(const RectGrid& g) {
  nlohmann::ordered_json j;
  j["xs"] = g.xs;
  j["ys"] = g.ys;
  j["active"] = std::vector<int>(g.active.begin(), g.active.end());
  return j.dump();
}

RectGrid grid_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("mesh JSON parse error: ") + e.what());
  }
  RectGrid g;
  try {
    g.xs = j.at("xs").get<std::vector<double>>();
    g.ys = j.at("ys").get<std::vector<double>>();
    auto act = j.at("active").get<std::vector<int>>();
    g.active.assign(act.begin(), act.end());
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("mesh JSON missing field: ") + e.what());
  }
  g.m = (int)g.xs.size() - 1;
  g.n = (int)g.ys.size() - 1;
  if (g.m < 1 || g.n < 1 || (int)g.active.size() != g.m * g.n)
    throw PreconditionError("mesh JSON has inconsistent sizes");
  for (int i = 0; i < g.m; ++i)
    if (!(g.xs[i + 1] > g.xs[i])) throw PreconditionError("mesh JSON: xs not increasing");
  for (int j2 = 0; j2 < g.n; ++j2)
    if (!(g.ys[j2 + 1] > g.ys[j2])) throw PreconditionError("mesh JSON: ys not increasing");
  return g;
}

RectGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open mesh file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return grid_from_json(text);
}

void save_grid(const RectGrid& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write mesh file: " + path);
  out << grid_to_json(g) << "\n";
}

}  // namespace rrm
