#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "fiberatlas/error.hpp"
#include "fiberatlas/polycore/parser.hpp"
#include "fiberatlas/polycore/polynomial.hpp"
#include "fiberatlas/polycore/rational.hpp"

namespace fiberatlas {

using polycore::Rational;

/// Curve gamma: [0,1] -> R^n in the target of a map, either polynomial in s
/// or piecewise linear through equally spaced vertices, plus the schedule of
/// parameters at which fibers are examined.
class Arc {
 public:
  static Arc polynomial(std::vector<polycore::Polynomial> components, std::vector<double> schedule) {
    Arc a;
    for (auto& c : components) {
      if (c.num_variables() == 0) c = polycore::Polynomial::constant({"s"}, c.constant_term());
      if (c.variables() != std::vector<std::string>{"s"}) {
        c = c.with_variables({"s"});
      }
    }
    a.components_ = std::move(components);
    a.schedule_ = std::move(schedule);
    a.validate();
    return a;
  }

  /// Parses "expr1; expr2; ..." in the variable s.
  static Arc parse(const std::string& text, std::vector<double> schedule) {
    std::vector<polycore::Polynomial> comps;
    std::size_t start = 0;
    for (;;) {
      auto semi = text.find(';', start);
      comps.push_back(polycore::parse_polynomial(text.substr(start, semi - start), {"s"}));
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
    return polynomial(std::move(comps), std::move(schedule));
  }

  static Arc polyline(std::vector<std::vector<Rational>> vertices, std::vector<double> schedule) {
    if (vertices.size() < 2) throw InvalidArgument("a polyline arc needs two vertices");
    for (const auto& v : vertices) {
      if (v.size() != vertices.front().size()) throw DimensionMismatch("polyline vertices differ in dimension");
    }
    Arc a;
    a.vertices_ = std::move(vertices);
    a.schedule_ = std::move(schedule);
    a.validate();
    return a;
  }

  std::size_t dim() const { return vertices_.empty() ? components_.size() : vertices_.front().size(); }
  const std::vector<double>& schedule() const { return schedule_; }

  std::vector<Rational> exact_at(const Rational& s) const {
    std::vector<Rational> out;
    if (vertices_.empty()) {
      std::vector<Rational> pt{s};
      for (const auto& c : components_) out.push_back(c.evaluate<Rational>(pt));
      return out;
    }
    const auto segments = static_cast<long long>(vertices_.size() - 1);
    Rational pos = s * segments;
    auto k = static_cast<long long>(polycore::to_double(pos));
    k = std::clamp<long long>(k, 0, segments - 1);
    Rational w = pos - k;
    for (std::size_t d = 0; d < dim(); ++d) {
      out.push_back(vertices_[static_cast<std::size_t>(k)][d] * (1 - w) + vertices_[static_cast<std::size_t>(k) + 1][d] * w);
    }
    return out;
  }

  std::vector<double> at(double s) const {
    std::vector<double> out;
    for (const auto& r : exact_at(polycore::rational_from_double(s))) out.push_back(polycore::to_double(r));
    return out;
  }

  std::vector<double> start() const { return at(0.0); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    if (vertices_.empty()) {
      std::vector<std::string> comps;
      for (const auto& c : components_) comps.push_back(c.to_string());
      j["components"] = comps;
    } else {
      nlohmann::json verts = nlohmann::json::array();
      for (const auto& v : vertices_) {
        std::vector<std::string> row;
        for (const auto& r : v) row.push_back(r.str());
        verts.push_back(row);
      }
      j["vertices"] = verts;
    }
    j["schedule"] = schedule_;
    return j;
  }

 private:
  void validate() const {
    if (dim() == 0) throw InvalidArgument("arc has no components");
    if (schedule_.empty()) throw InvalidArgument("arc schedule is empty");
    bool has0 = false, has1 = false;
    for (double s : schedule_) {
      if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("arc schedule leaves [0,1]");
      has0 = has0 || s == 0.0;
      has1 = has1 || s == 1.0;
    }
    if (!has0 || !has1) throw InvalidArgument("arc schedule must contain 0 and 1");
    std::vector<std::vector<double>> pts;
    for (double s : schedule_) pts.push_back(at(s));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (pts[i] == pts[j] && schedule_[i] != schedule_[j]) {
          throw InvalidArgument("arc is not injective on its schedule");
        }
      }
    }
  }

  std::vector<polycore::Polynomial> components_;
  std::vector<std::vector<Rational>> vertices_;
  std::vector<double> schedule_;
};

/// Schedule 1, 1 - step, ..., 0 (decreasing toward the endpoint fiber).
inline std::vector<double> uniform_schedule(int intervals) {
  if (intervals < 1) throw InvalidArgument("schedule needs at least one interval");
  std::vector<double> s;
  for (int k = intervals; k >= 0; --k) s.push_back(static_cast<double>(k) / intervals);
  return s;
}

}  // namespace fiberatlas
