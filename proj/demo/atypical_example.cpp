// Walks through the worked example with reduced sample sizes: betti numbers
// of X_u along the arc, the Morse point of r_u, and the loop x = z^2 on X_u.
#include <iomanip>
#include <iostream>

#include "fiberatlas/example5.hpp"

using namespace fiberatlas;
using namespace fiberatlas::example5;

int main(int argc, char** argv) {
  std::uint64_t seed = argc > 1 ? std::stoull(argv[1]) : 1;
  auto bundle = build_example();
  std::cout << "X_u: " << kF1 << " = 0 with " << kVFormula << "\n\n";

  Claims23Config topo;
  topo.u_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  topo.count = 8000;
  topo.seed = seed;
  auto t = verify_claims23(bundle, topo);
  std::cout << "u      b0  b1  points  eps\n";
  for (const auto& rec : t.scan.records) {
    std::cout << std::left << std::setw(7) << rec.s << rec.summary.beta0 << "   " << rec.summary.beta1 << "   "
              << std::setw(7) << rec.points << rec.summary.eps << '\n';
  }

  Claim4Config c4;
  c4.critical.seed = seed;
  c4.critical.multistart_n = 200;
  std::cout << "\ncritical points of r = x - z^2 on X_u with r >= 0\n";
  for (double u : {0.5, 1.0}) {
    auto mc = check_morse_point(bundle, u, c4);
    for (const auto& p : mc.found) {
      std::cout << "  u=" << u << "  at (" << p.location[0] << ", " << p.location[1] << ", " << p.location[2]
                << ")  index " << p.morse_index << "  chart eigenvalues " << mc.chart_eigenvalues[0] << ", "
                << mc.chart_eigenvalues[1] << '\n';
    }
  }

  c4.loop.seed = seed;
  auto loops = check_loop_dichotomy(bundle, c4);
  std::cout << "\nloop {x = z^2} on X_u\n";
  if (!loops.trace) {
    std::cout << "  not realized: " << loops.error << '\n';
    return 1;
  }
  for (const auto& st : loops.trace->steps) {
    std::cout << "  u=" << std::setw(5) << st.s << (st.verdict.is_boundary ? "bounds a Z/2 chain" : "does not bound")
              << "  (" << st.loop.size() << " loop points, side sample radius " << st.radius << ")\n";
  }
  auto verdict = arcscan::atypicality_verdict(t.scan, loops.trace);
  std::cout << '\n' << arcscan::verdict_line(verdict) << '\n';
  return 0;
}
