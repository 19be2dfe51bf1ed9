#include "glc/chain_io.hpp"

#include <fstream>

#include <json.hpp>

namespace glc {

using nlohmann::json;

std::string chain_to_json(const PolyChain& chain) {
  json j;
  j["dim"] = chain.q();
  j["group"] = to_string(chain.group_kind());
  j["cells"] = json::array();
  for (const auto& c : chain.cells()) {
    json cell;
    json geom = json::array();
    auto push_point = [&](const Point& p) {
      json pt = json::array();
      for (int d = 0; d < chain.ambient(); ++d) pt.push_back(p[d]);
      geom.push_back(pt);
    };
    push_point(c.a);
    if (chain.q() == 1) push_point(c.b);
    cell["geom"] = geom;
    json mult = json::array();
    mult.push_back(c.mult.a);
    if (chain.group_kind() == GroupKind::ZxZ_torus) mult.push_back(c.mult.b);
    cell["mult"] = mult;
    j["cells"].push_back(cell);
  }
  return j.dump(2);
}

PolyChain chain_from_json(const std::string& text) {
  const json j = json::parse(text);
  const int q = j.at("dim").get<int>();
  const GroupKind gk = group_kind_from_string(j.at("group").get<std::string>());
  int ambient = 3;
  if (!j.at("cells").empty())
    ambient = int(j.at("cells")[0].at("geom")[0].size());
  PolyChain chain(q, ambient, gk);
  for (const auto& cell : j.at("cells")) {
    auto read_point = [&](const json& pt) {
      Point p{0, 0, 0};
      for (size_t d = 0; d < pt.size() && d < 3; ++d) p[d] = pt[d].get<double>();
      return p;
    };
    const auto& geom = cell.at("geom");
    const auto& mult = cell.at("mult");
    GroupElement sigma = GroupElement::zero(gk);
    sigma.a = mult[0].get<int>();
    if (gk == GroupKind::ZxZ_torus && mult.size() > 1) sigma.b = mult[1].get<int>();
    if (q == 0)
      chain.add_point(read_point(geom[0]), sigma);
    else
      chain.add_segment(read_point(geom[0]), read_point(geom[1]), sigma);
  }
  return chain;
}

void save_chain(const PolyChain& chain, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << chain_to_json(chain) << "\n";
}

PolyChain load_chain(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(is)),
                   std::istreambuf_iterator<char>());
  return chain_from_json(text);
}

}  // namespace glc
