#pragma once

// Curve spec files: a JSON object
//   { "n": 3, "interval": [a, b], "components": [[c0, c1, ...], ...], "id": "name" }
// with ascending-degree coefficients and one component per coordinate of R^{n-1}.
// "id" is optional; any other key is an error. Doubles are written in shortest
// round-trip form, so write -> read reproduces every coefficient bit for bit.

#include "hdyn/curves.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace hdyn {

class CurveSpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

AnalyticCurve parse_curve_spec(const std::string& text);
std::string serialize_curve_spec(const AnalyticCurve& curve);

AnalyticCurve read_curve_spec(const std::filesystem::path& path);
void write_curve_spec(const std::filesystem::path& path, const AnalyticCurve& curve);

}  // namespace hdyn
