#pragma once

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fiberatlas/arcscan.hpp"
#include "fiberatlas/cli/io.hpp"
#include "fiberatlas/example5.hpp"
#include "fiberatlas/polycore.hpp"
#include "fiberatlas/topo.hpp"
#include "fiberatlas/varnum.hpp"

namespace fiberatlas::cli {

struct Common {
  std::string out = "fiberatlas_out";
  unsigned threads = 0;
  bool no_timing = false;
  bool emit_persistence = false;
};

struct MapInput {
  std::string text;
  std::string file;
  std::vector<std::string> vars;
};

struct VerifyExampleOptions {
  std::uint64_t seed = 0;
  std::vector<std::string> claim1_grid;
  std::size_t claim1_starts = 2000;
  std::vector<double> u_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  double R = 8.0;
  std::size_t count = 8000;
  std::vector<double> morse_grid{0.5, 0.75, 1.0};
  std::size_t critical_starts = 400;
  std::vector<double> loop_grid{0.0, 0.25, 0.5, 1.0};
  std::size_t loop_count = 4000;
};

struct ScanArcOptions {
  MapInput map;
  std::string arc;
  std::vector<double> schedule;
  int intervals = 4;
  std::uint64_t seed = 0;
  double R = 8.0;
  std::size_t count = 2000;
  std::vector<std::size_t> ball_axes;
  double scale_factor = 3.0;
  double persistence_fraction = 0.75;
  std::size_t simplex_cap = 2'000'000;
  std::size_t min_component = 3;
  std::vector<std::string> loop_cut;
  std::size_t loop_count = 4000;
  bool loop_two_sided = false;
};

struct CriticalOptions {
  std::string objective;
  std::string constraints;
  std::vector<std::string> inequalities;
  std::vector<std::string> vars;
  std::uint64_t seed = 0;
  double half_width = 8.0;
  std::vector<double> box;
  std::size_t starts = 400;
  double tol = 1e-10;
  bool no_boundary = false;
};

struct FiberSampleOptions {
  MapInput map;
  std::vector<double> target;
  std::uint64_t seed = 0;
  double R = 8.0;
  std::size_t count = 2000;
  std::vector<std::size_t> ball_axes;
  std::vector<std::string> inequalities;
};

struct BettiOptions {
  std::string in;
  std::string eps = "auto";
  double scale_factor = 3.0;
  double persistence_fraction = 0.75;
  std::size_t simplex_cap = 2'000'000;
};

/// Outcome of one command: report body, extra stdout lines and exit code.
struct CommandResult {
  nlohmann::json result;
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<std::string> lines;
  int exit_code = 0;
};

namespace detail {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string map_text(const MapInput& m) {
  if (!m.text.empty() && !m.file.empty()) throw InvalidArgument("give either --map or --map-file");
  std::string t = m.file.empty() ? m.text : read_text(m.file);
  std::replace(t.begin(), t.end(), '\n', ' ');
  if (t.find_first_not_of(" \t\r") == std::string::npos) throw InvalidArgument("no map given");
  return t;
}

inline std::vector<std::string> variables_for(const std::vector<std::string>& given, const std::string& text) {
  return given.empty() ? polycore::collect_variables(text) : given;
}

inline std::vector<std::pair<double, double>> box_for(std::size_t n, double half_width, const std::vector<double>& box) {
  std::vector<std::pair<double, double>> b;
  if (box.empty()) {
    for (std::size_t i = 0; i < n; ++i) b.emplace_back(-half_width, half_width);
    return b;
  }
  if (box.size() != 2 * n) throw DimensionMismatch("--box needs lo,hi for each of the " + std::to_string(n) + " variables");
  for (std::size_t i = 0; i < n; ++i) b.emplace_back(box[2 * i], box[2 * i + 1]);
  return b;
}

// Options as given (or their defaults), keyed by long name; runtime-only
// options stay out so reports compare equal across machines.
inline nlohmann::json echo_options(const CLI::App* sub) {
  static const std::vector<std::string> runtime{"help", "threads", "out", "no-timing", "config"};
  nlohmann::json j = nlohmann::json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    std::string name = opt->get_single_name();
    if (std::find(runtime.begin(), runtime.end(), name) != runtime.end()) continue;
    auto res = opt->results();
    if (res.empty()) {
      std::string d = opt->get_default_str();
      if (opt->get_expected_max() == 0) d = "false";
      j[name] = d;
    } else if (res.size() == 1) {
      j[name] = res[0];
    } else {
      j[name] = res;
    }
  }
  return j;
}

}  // namespace detail

inline CommandResult cmd_verify_example(const VerifyExampleOptions& o, const Common& c) {
  example5::Example5Config cfg;
  cfg.seed = o.seed;
  cfg.threads = c.threads;
  if (!o.claim1_grid.empty()) {
    cfg.claim1.u_grid.clear();
    for (const auto& s : o.claim1_grid) cfg.claim1.u_grid.push_back(polycore::parse_rational(s));
  }
  cfg.claim1.certify.multistart_n = o.claim1_starts;
  cfg.claims23.u_grid = o.u_grid;
  cfg.claims23.R = o.R;
  cfg.claims23.count = o.count;
  cfg.claims23.keep_points = true;
  cfg.claims23.summary.keep_pairs = c.emit_persistence;
  cfg.claim4.morse_grid = o.morse_grid;
  cfg.claim4.critical.multistart_n = o.critical_starts;
  cfg.claim4.loop_grid = o.loop_grid;
  cfg.claim4.loop.count = o.loop_count;

  auto rep = example5::verify_all(cfg);
  auto resolved = example5::resolved(cfg);
  CommandResult out;
  out.result = example5::to_json(rep);
  out.seeds = {{"master", o.seed},
               {"claim1", resolved.claim1.certify.seed},
               {"claims23", resolved.claims23.seed},
               {"claim4_critical", resolved.claim4.critical.seed},
               {"claim4_loops", resolved.claim4.loop.seed}};

  const std::filesystem::path dir = c.out;
  for (const auto& rec : rep.topology.scan.records) {
    if (!rec.ok) continue;
    // v eliminated in the reduced coordinates, restored from its closed form
    PointCloud withv;
    for (const auto& p : rec.cloud) {
      double z2 = p[2] * p[2], u2 = rec.s * rec.s;
      Point q = p;
      q.push_back((z2 + u2) / ((u2 + 1) * (z2 + 1)));
      withv.push_back(std::move(q));
    }
    write_file(dir, "fiber_u" + tag(rec.s) + ".csv", [&](std::ostream& os) { write_point_csv(os, {"x", "y", "z", "u", "v"}, withv); });
    if (c.emit_persistence) {
      write_file(dir, "persistence_u" + tag(rec.s) + ".csv",
                 [&](std::ostream& os) { topo::write_persistence_csv(os, rec.summary.pairs); });
    }
  }
  if (rep.claim4.loops.trace) {
    for (const auto& st : rep.claim4.loops.trace->steps) {
      write_file(dir, "loop_u" + tag(st.s) + ".csv", [&](std::ostream& os) { write_point_csv(os, {"x", "y", "z", "u"}, st.loop); });
    }
  }
  for (const auto& cl : rep.claims) out.lines.push_back(cl.name + ": " + example5::to_string(cl.status));
  for (const auto& w : rep.warnings) out.lines.push_back("warning: " + w);
  out.lines.push_back(example5::headline(rep));
  out.lines.push_back(arcscan::verdict_line(rep.verdict));
  out.exit_code = rep.overall_pass ? 0 : 1;
  return out;
}

inline CommandResult cmd_scan_arc(const ScanArcOptions& o, const Common& c) {
  const std::string text = detail::map_text(o.map);
  const auto vars = detail::variables_for(o.map.vars, text);
  auto F = polycore::parse_map(text, vars);
  if (o.arc.empty()) throw InvalidArgument("no arc given");
  auto arc = Arc::parse(o.arc, o.schedule.empty() ? uniform_schedule(o.intervals) : o.schedule);

  arcscan::ScanConfig sc;
  sc.R = o.R;
  sc.count = o.count;
  sc.seed = o.seed;
  sc.sample.ball_axes = o.ball_axes;
  sc.sample.threads = c.threads;
  sc.summary.scale_factor = o.scale_factor;
  sc.summary.persistence_fraction = o.persistence_fraction;
  sc.summary.simplex_cap = o.simplex_cap;
  sc.summary.keep_pairs = c.emit_persistence;
  sc.min_component = o.min_component;
  sc.keep_points = true;
  auto report = arcscan::scan_arc(F, arc, sc);

  CommandResult out;
  out.seeds = {{"master", o.seed}};
  std::optional<arcscan::LoopTrace> trace;
  nlohmann::json loops = nullptr;
  if (!o.loop_cut.empty()) {
    arcscan::LoopConfig lc;
    lc.R = o.R;
    lc.count = o.loop_count;
    lc.seed = varnum::derive_seed(o.seed, 1, 0x100B);
    lc.one_side = !o.loop_two_sided;
    lc.sample.ball_axes = o.ball_axes;
    lc.sample.threads = c.threads;
    out.seeds["loops"] = lc.seed;
    std::vector<polycore::Polynomial> cuts;
    for (const auto& t : o.loop_cut) cuts.push_back(polycore::parse_polynomial(t, vars));
    try {
      trace = arcscan::track_loop_along_arc(F, arc, polycore::PolynomialMap(vars, cuts), lc);
      loops = arcscan::to_json(*trace);
    } catch (const CutLocusNotACircle& e) {
      loops = error_json(e.code(), e.what());
    }
  }
  nlohmann::json vanishing = nlohmann::json::array();
  if (report.records.size() >= 2) {
    for (const auto& f : arcscan::detect_vanishing_components(report, o.min_component)) vanishing.push_back(arcscan::to_json(f));
  }
  auto verdict = arcscan::atypicality_verdict(report, trace, o.min_component);
  out.result = {{"map", polycore::to_json(F)},
                {"arc", arc.to_json()},
                {"scan", arcscan::to_json(report)},
                {"vanishing_components", vanishing},
                {"loops", loops},
                {"verdict", arcscan::to_json(verdict)}};

  const std::filesystem::path dir = c.out;
  for (const auto& rec : report.records) {
    if (!rec.ok) continue;
    write_file(dir, "fiber_s" + tag(rec.s) + ".csv", [&](std::ostream& os) { write_point_csv(os, vars, rec.cloud); });
    if (c.emit_persistence) {
      write_file(dir, "persistence_s" + tag(rec.s) + ".csv",
                 [&](std::ostream& os) { topo::write_persistence_csv(os, rec.summary.pairs); });
    }
  }
  if (trace) {
    for (const auto& st : trace->steps) {
      write_file(dir, "loop_s" + tag(st.s) + ".csv", [&](std::ostream& os) { write_point_csv(os, vars, st.loop); });
    }
  }
  for (const auto& rec : report.records) {
    out.lines.push_back("s=" + tag(rec.s) + ": " +
                        (rec.ok ? "(b0, b1) = (" + std::to_string(rec.summary.beta0) + ", " + std::to_string(rec.summary.beta1) + ")"
                                : rec.error));
  }
  out.lines.push_back(arcscan::verdict_line(verdict));
  return out;
}

inline CommandResult cmd_critical_points(const CriticalOptions& o, const Common& c) {
  std::string all = o.objective + ";" + o.constraints;
  for (const auto& q : o.inequalities) all += ";" + q;
  const auto vars = detail::variables_for(o.vars, all);
  varnum::RestrictedFunction rf;
  rf.objective = polycore::parse_polynomial(o.objective, vars);
  rf.constraints = polycore::parse_map(o.constraints, vars);
  for (const auto& q : o.inequalities) rf.inequalities.push_back(polycore::parse_polynomial(q, vars));
  varnum::CriticalConfig cc;
  cc.box = detail::box_for(vars.size(), o.half_width, o.box);
  cc.multistart_n = o.starts;
  cc.seed = o.seed;
  cc.tol = o.tol;
  cc.boundary_pass = !o.no_boundary;
  cc.threads = c.threads;
  auto search = varnum::constrained_critical_points(rf, cc);

  CommandResult out;
  out.seeds = {{"master", o.seed}};
  out.result = {{"variables", vars}, {"search", varnum::to_json(search)}};
  write_file(c.out, "critical_points.csv", [&](std::ostream& os) {
    for (const auto& v : vars) os << v << ',';
    os << "morse_index,on_boundary\n";
    os.precision(17);
    for (const auto* list : {&search.points, &search.boundary_points}) {
      for (const auto& p : *list) {
        for (double x : p.location) os << x << ',';
        os << p.morse_index << ',' << (p.on_boundary ? 1 : 0) << '\n';
      }
    }
  });
  out.lines.push_back("critical points: " + std::to_string(search.points.size()) + " interior, " +
                      std::to_string(search.boundary_points.size()) + " on the boundary");
  return out;
}

inline CommandResult cmd_fiber_sample(const FiberSampleOptions& o, const Common& c) {
  const std::string text = detail::map_text(o.map);
  const auto vars = detail::variables_for(o.map.vars, text);
  auto F = polycore::parse_map(text, vars);
  varnum::SampleConfig sc;
  sc.ball_axes = o.ball_axes;
  sc.threads = c.threads;
  for (const auto& q : o.inequalities) sc.inequalities.push_back(polycore::parse_polynomial(q, vars));
  auto sample = varnum::sample_fiber(F, o.target, o.R, o.count, o.seed, sc);

  CommandResult out;
  out.seeds = {{"master", o.seed}};
  out.result = {{"map", polycore::to_json(F)}, {"sample", varnum::to_json(sample, false)}};
  write_file(c.out, "sample.csv", [&](std::ostream& os) { varnum::write_csv(os, sample); });
  out.lines.push_back("sampled " + std::to_string(sample.size()) + " points");
  return out;
}

inline CommandResult cmd_betti(const BettiOptions& o, const Common& c) {
  auto cloud = read_point_csv(o.in);
  topo::SummaryOptions so;
  if (o.eps != "auto") {
    double e = 0.0;
    if (!detail::parse_double(o.eps, e) || !(e > 0)) throw InvalidArgument("--eps must be 'auto' or a positive number");
    so.eps = e;
  }
  so.scale_factor = o.scale_factor;
  so.persistence_fraction = o.persistence_fraction;
  so.simplex_cap = o.simplex_cap;
  so.keep_pairs = c.emit_persistence;
  auto s = topo::summarize(cloud.points, so);

  CommandResult out;
  out.result = {{"columns", cloud.columns}, {"summary", topo::to_json(s)}};
  if (c.emit_persistence) write_file(c.out, "persistence.csv", [&](std::ostream& os) { topo::write_persistence_csv(os, s.pairs); });
  out.lines.push_back("beta0=" + std::to_string(s.beta0) + " beta1=" + std::to_string(s.beta1));
  return out;
}

inline nlohmann::json envelope(const std::string& command, const nlohmann::json& config, const CommandResult& r,
                               const Common& c, double wall_seconds) {
  nlohmann::json runtime = {{"threads", nullptr}, {"wall_time_s", nullptr}};
  if (!c.no_timing) runtime = {{"threads", c.threads ? c.threads : thread_count()}, {"wall_time_s", wall_seconds}};
  return {{"tool", kToolName}, {"version", kVersion}, {"command", command}, {"config", config},
          {"seeds", r.seeds},  {"result", r.result},  {"runtime", runtime}};
}

/// Parses args (without the program name), runs the chosen command and
/// returns the exit code: command-specific on success, 2 for usage errors,
/// 3 for library errors, 4 otherwise. Errors go to err as one JSON line.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical probes of polynomial-map fibers along arcs", kToolName};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "INI file with one [command] section of option = value lines; flags override it");
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "output directory")->capture_default_str();
    sub->add_option("--threads", common.threads, "worker threads (0: FIBER_ATLAS_THREADS or hardware)");
    sub->add_flag("--no-timing", common.no_timing, "leave runtime fields null so reports compare byte for byte");
    sub->add_flag("--emit-persistence", common.emit_persistence, "also write persistence-pair CSVs");
  };
  auto add_map = [](CLI::App* sub, MapInput& m) {
    sub->add_option("--map", m.text, "map components separated by ';'");
    sub->add_option("--map-file", m.file, "file holding the map text")->check(CLI::ExistingFile);
    sub->add_option("--vars", m.vars, "variable order (default: order of appearance)")->delimiter(',');
  };

  VerifyExampleOptions ve;
  auto* sv = app.add_subcommand("verify-example", "check the four claims of the worked example");
  sv->add_option("--seed", ve.seed, "master seed")->required();
  sv->add_option("--claim1-grid", ve.claim1_grid, "rational u values (default k/10)")->delimiter(',');
  sv->add_option("--claim1-starts", ve.claim1_starts, "multistarts per u")->capture_default_str();
  sv->add_option("--u-grid", ve.u_grid, "u values for the fiber topology")->delimiter(',')->capture_default_str();
  sv->add_option("--radius", ve.R, "ball radius")->capture_default_str();
  sv->add_option("--count", ve.count, "points per fiber")->capture_default_str();
  sv->add_option("--morse-grid", ve.morse_grid, "u values for the Morse point")->delimiter(',')->capture_default_str();
  sv->add_option("--critical-starts", ve.critical_starts, "multistarts of the critical-point search")->capture_default_str();
  sv->add_option("--loop-grid", ve.loop_grid, "u values for the loop test")->delimiter(',')->capture_default_str();
  sv->add_option("--loop-count", ve.loop_count, "points per side sample of the loop test")->capture_default_str();
  add_common(sv);

  ScanArcOptions sa;
  auto* ss = app.add_subcommand("scan-arc", "sample fibers along an arc and report betti jumps");
  add_map(ss, sa.map);
  ss->add_option("--arc", sa.arc, "arc components in s separated by ';'")->required();
  ss->add_option("--schedule", sa.schedule, "s values (default: uniform from 1 to 0)")->delimiter(',');
  ss->add_option("--intervals", sa.intervals, "uniform schedule intervals")->capture_default_str();
  ss->add_option("--seed", sa.seed, "master seed")->required();
  ss->add_option("--radius", sa.R, "ball radius")->capture_default_str();
  ss->add_option("--count", sa.count, "points per fiber")->capture_default_str();
  ss->add_option("--ball-axes", sa.ball_axes, "coordinates measured by the ball (default all)")->delimiter(',');
  ss->add_option("--scale-factor", sa.scale_factor, "Rips scale as a multiple of the 90th NN percentile")->capture_default_str();
  ss->add_option("--persistence-fraction", sa.persistence_fraction, "birth cutoff of counted H1 classes")->capture_default_str();
  ss->add_option("--simplex-cap", sa.simplex_cap, "largest Rips complex built")->capture_default_str();
  ss->add_option("--min-component", sa.min_component, "smallest tracked component")->capture_default_str();
  ss->add_option("--loop-cut", sa.loop_cut, "cut polynomial realizing a loop (repeatable)");
  ss->add_option("--loop-count", sa.loop_count, "points per side sample of the loop test")->capture_default_str();
  ss->add_flag("--loop-two-sided", sa.loop_two_sided, "use the whole fiber instead of the side cut >= 0");
  add_common(ss);

  CriticalOptions co;
  auto* sc = app.add_subcommand("critical-points", "critical points of a function restricted to a variety");
  sc->add_option("--objective", co.objective, "restricted function")->required();
  sc->add_option("--constraints", co.constraints, "constraint polynomials separated by ';'")->required();
  sc->add_option("--ineq", co.inequalities, "inequality g >= 0 (repeatable)");
  sc->add_option("--vars", co.vars, "variable order")->delimiter(',');
  sc->add_option("--seed", co.seed, "master seed")->required();
  sc->add_option("--half-width", co.half_width, "start box half width")->capture_default_str();
  sc->add_option("--box", co.box, "lo,hi per variable")->delimiter(',');
  sc->add_option("--starts", co.starts, "multistarts")->capture_default_str();
  sc->add_option("--tol", co.tol, "KKT residual tolerance")->capture_default_str();
  sc->add_flag("--no-boundary", co.no_boundary, "skip the pass on the inequality boundary");
  add_common(sc);

  FiberSampleOptions fs;
  auto* sf = app.add_subcommand("fiber-sample", "sample one fiber inside a ball and write it as CSV");
  add_map(sf, fs.map);
  sf->add_option("--target", fs.target, "target point")->delimiter(',')->required();
  sf->add_option("--seed", fs.seed, "master seed")->required();
  sf->add_option("--radius", fs.R, "ball radius")->capture_default_str();
  sf->add_option("--count", fs.count, "points")->capture_default_str();
  sf->add_option("--ball-axes", fs.ball_axes, "coordinates measured by the ball (default all)")->delimiter(',');
  sf->add_option("--ineq", fs.inequalities, "inequality g >= 0 (repeatable)");
  add_common(sf);

  BettiOptions bo;
  auto* sb = app.add_subcommand("betti", "Rips betti numbers of a CSV point cloud");
  sb->add_option("--in", bo.in, "CSV point cloud")->required()->check(CLI::ExistingFile);
  sb->add_option("--eps", bo.eps, "Rips scale or 'auto'")->capture_default_str();
  sb->add_option("--scale-factor", bo.scale_factor, "auto scale multiple of the 90th NN percentile")->capture_default_str();
  sb->add_option("--persistence-fraction", bo.persistence_fraction, "birth cutoff of counted H1 classes")->capture_default_str();
  sb->add_option("--simplex-cap", bo.simplex_cap, "largest Rips complex built")->capture_default_str();
  add_common(sb);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << error_json("UsageError", e.what()).dump() << '\n';
    return 2;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    CLI::App* sub = app.get_subcommands().front();
    CommandResult r;
    if (sub == sv) {
      r = cmd_verify_example(ve, common);
    } else if (sub == ss) {
      r = cmd_scan_arc(sa, common);
    } else if (sub == sc) {
      r = cmd_critical_points(co, common);
    } else if (sub == sf) {
      r = cmd_fiber_sample(fs, common);
    } else {
      r = cmd_betti(bo, common);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    auto report = envelope(sub->get_name(), detail::echo_options(sub), r, common, wall);
    write_file(common.out, "report.json", [&](std::ostream& os) { os << report.dump(2) << '\n'; });
    for (const auto& line : r.lines) out << line << '\n';
    out << "report: " << (std::filesystem::path(common.out) / "report.json").string() << '\n';
    return r.exit_code;
  } catch (const Error& e) {
    err << error_json(e.code(), e.what()).dump() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << error_json("InternalError", e.what()).dump() << '\n';
    return 4;
  }
}

}  // namespace fiberatlas::cli
