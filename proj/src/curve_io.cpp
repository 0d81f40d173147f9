#include "hdyn/curve_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace hdyn {

namespace {

using nlohmann::json;

double finite_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw CurveSpecError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw CurveSpecError(where + ": number is not finite");
  return x;
}

}  // namespace

AnalyticCurve parse_curve_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CurveSpecError(std::string("curve spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw CurveSpecError("curve spec must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (key != "n" && key != "interval" && key != "components" && key != "id")
      throw CurveSpecError("curve spec: unknown field '" + key + "'");
  for (const char* key : {"n", "interval", "components"})
    if (!doc.contains(key)) throw CurveSpecError(std::string("curve spec: missing field '") + key + "'");

  const json& n = doc["n"];
  if (!n.is_number_integer()) throw CurveSpecError("curve spec: 'n' must be an integer");
  const auto dim = n.get<long long>();
  if (dim < 2) throw CurveSpecError("curve spec: 'n' must be at least 2");

  const json& interval = doc["interval"];
  if (!interval.is_array() || interval.size() != 2)
    throw CurveSpecError("curve spec: 'interval' must be [a, b]");
  const double a = finite_number(interval[0], "interval[0]");
  const double b = finite_number(interval[1], "interval[1]");
  if (!(a < b)) throw CurveSpecError("curve spec: empty interval (need a < b)");

  const json& comps = doc["components"];
  if (!comps.is_array()) throw CurveSpecError("curve spec: 'components' must be an array");
  if (static_cast<long long>(comps.size()) != dim - 1)
    throw CurveSpecError("curve spec: n = " + std::to_string(dim) + " needs " + std::to_string(dim - 1) +
                         " components, got " + std::to_string(comps.size()));
  std::vector<Polynomial> polys;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const json& c = comps[i];
    if (!c.is_array() || c.empty())
      throw CurveSpecError("curve spec: component " + std::to_string(i) + " must be a nonempty array");
    std::vector<double> coeffs;
    for (std::size_t k = 0; k < c.size(); ++k)
      coeffs.push_back(finite_number(c[k], "components[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
    polys.emplace_back(std::move(coeffs));
  }

  std::string id;
  if (doc.contains("id")) {
    if (!doc["id"].is_string()) throw CurveSpecError("curve spec: 'id' must be a string");
    id = doc["id"].get<std::string>();
  }
  return AnalyticCurve(std::move(polys), a, b, std::move(id));
}

std::string serialize_curve_spec(const AnalyticCurve& curve) {
  json doc = json::object();
  doc["n"] = curve.n();
  doc["interval"] = json::array({curve.begin(), curve.end()});
  json comps = json::array();
  for (const auto& p : curve.components()) comps.push_back(p.coeffs());
  doc["components"] = std::move(comps);
  if (!curve.id().empty()) doc["id"] = curve.id();
  return doc.dump();
}

AnalyticCurve read_curve_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CurveSpecError("cannot open curve spec '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_curve_spec(buf.str());
}

void write_curve_spec(const std::filesystem::path& path, const AnalyticCurve& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write curve spec '" + path.string() + "'");
  out << serialize_curve_spec(curve) << '\n';
}

}  // namespace hdyn
