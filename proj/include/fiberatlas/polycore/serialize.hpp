#pragma once

#include <nlohmann/json.hpp>

#include "fiberatlas/polycore/polynomial.hpp"

namespace fiberatlas::polycore {

// {"variables": [...], "terms": [{"exponents": [...], "num": "...", "den": "..."}]}
inline nlohmann::json to_json(const Polynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [m, c] : p.terms()) {
    terms.push_back({{"exponents", m}, {"num", numerator_string(c)}, {"den", denominator_string(c)}});
  }
  return {{"variables", p.variables()}, {"terms", terms}};
}

inline Polynomial polynomial_from_json(const nlohmann::json& j) {
  try {
    Polynomial p(j.at("variables").get<std::vector<std::string>>());
    for (const auto& t : j.at("terms")) {
      auto m = t.at("exponents").get<Monomial>();
      Rational c(Integer(t.at("num").get<std::string>()), Integer(t.at("den").get<std::string>()));
      p.add_term(std::move(m), c);
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed polynomial JSON: ") + e.what());
  }
}

inline nlohmann::json to_json(const PolynomialMap& f) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : f.components()) comps.push_back(to_json(c));
  return {{"variables", f.variables()}, {"components", comps}};
}

inline PolynomialMap map_from_json(const nlohmann::json& j) {
  std::vector<Polynomial> comps;
  for (const auto& c : j.at("components")) comps.push_back(polynomial_from_json(c));
  return PolynomialMap(j.at("variables").get<std::vector<std::string>>(), std::move(comps));
}

}  // namespace fiberatlas::polycore
