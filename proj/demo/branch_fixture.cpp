// Two small maps with known answers: x(xy - 1) gains a branch over 0, the
// product x^2 + y^2 along t stays a circle.
#include <iostream>

#include "fiberatlas/arcscan.hpp"

using namespace fiberatlas;

static void show(const std::string& name, const polycore::PolynomialMap& F, const Arc& arc) {
  arcscan::ScanConfig cfg;
  cfg.R = 4.0;
  cfg.count = 1500;
  cfg.seed = 1;
  auto report = arcscan::scan_arc(F, arc, cfg);
  std::cout << name << '\n';
  for (const auto& rec : report.records) {
    std::cout << "  s=" << rec.s << "  b0=" << rec.summary.beta0 << "  b1=" << rec.summary.beta1 << '\n';
  }
  std::cout << "  " << arcscan::verdict_line(arcscan::atypicality_verdict(report)) << "\n\n";
}

int main() {
  show("x(xy - 1) over s", polycore::parse_map("x*(x*y-1)", {"x", "y"}), Arc::parse("s", {1.0, 0.5, 0.25, 0.0}));
  show("(x^2 + y^2, t) over (1, s)", polycore::parse_map("x^2+y^2; t", {"x", "y", "t"}), Arc::parse("1; s", {1.0, 0.5, 0.0}));
  return 0;
}
