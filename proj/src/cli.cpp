#include "srgeo/cli.hpp"

#include "srgeo/flow.hpp"
#include "srgeo/heisenberg.hpp"
#include "srgeo/jacobi.hpp"
#include "srgeo/maslov.hpp"
#include "srgeo/verify.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace srgeo::cli {

namespace {

// ---------------------------------------------------------------------------
// JSON output

void write_json(std::ostream& os, const nlohmann::json& j, int indent, int level) {
  const std::string pad(indent > 0 ? static_cast<std::size_t>(indent * (level + 1)) : 0, ' ');
  const std::string end_pad(indent > 0 ? static_cast<std::size_t>(indent * level) : 0, ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
      }
      break;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      // flat numeric arrays stay on one line
      const bool flat = std::all_of(j.begin(), j.end(), [](const auto& e) { return e.is_number(); });
      os << "[" << (flat ? "" : nl);
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << "," << (flat ? " " : nl);
        if (!flat) os << pad;
        write_json(os, e, indent, level + 1);
        first = false;
      }
      os << (flat ? "" : nl) << (flat ? "" : end_pad) << "]";
      break;
    }
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{" << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << "," << nl;
        os << pad << nlohmann::json(it.key()).dump() << ":" << (indent > 0 ? " " : "");
        write_json(os, it.value(), indent, level + 1);
        first = false;
      }
      os << nl << end_pad << "}";
      break;
    }
    default:
      os << j.dump();
  }
}

// ---------------------------------------------------------------------------
// Configuration

struct RunConfig {
  std::string structure = "heisenberg";
  std::string structure_file;
  std::string point;
  std::string covector;
  std::optional<double> t_min;
  std::optional<double> t_max;
  double tol = kDefaultTol;
  std::string out;
  std::string format;
  unsigned long long seed = 42;
  bool phi = false;
  double radius = 0.0;
  int grid = 40;
  std::string init;
  std::string curve = "jacobi";
  std::string suite;
};

Vec parse_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (item.empty() || used != item.size() || !std::isfinite(v)) {
      throw InvalidArgument(std::string(flag) + ": cannot parse '" + text + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw InvalidArgument(std::string(flag) + ": empty list");
  return Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Structure load_structure(const RunConfig& cfg) {
  if (!cfg.structure_file.empty()) return load_structure_file(cfg.structure_file);
  return structure_from_registry(cfg.structure);
}

bool is_heisenberg(const RunConfig& cfg) {
  return cfg.structure_file.empty() && cfg.structure == "heisenberg";
}

struct Prepared {
  std::shared_ptr<const Structure> s;
  Vec point;
  Vec covector;
};

Prepared prepare(const RunConfig& cfg, bool need_covector = true) {
  if (!(cfg.tol >= 1e-13 && cfg.tol <= 1e-3)) {
    throw InvalidArgument("--tol must lie in [1e-13, 1e-3]");
  }
  Prepared p;
  p.s = std::make_shared<const Structure>(load_structure(cfg));
  const int n = p.s->dim();
  p.point = cfg.point.empty() ? Vec(Vec::Zero(n)) : parse_list(cfg.point, "--point");
  if (p.point.size() != n) throw DimensionError("--point must have " + std::to_string(n) + " entries");
  if (need_covector) {
    p.covector = parse_list(cfg.covector, "--covector");
    if (p.covector.size() != n) {
      throw DimensionError("--covector must have " + std::to_string(n) + " entries");
    }
  }
  return p;
}

std::pair<double, double> window(const RunConfig& cfg, double default_min, double default_max) {
  const double lo = cfg.t_min.value_or(default_min);
  const double hi = cfg.t_max.value_or(default_max);
  if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw InvalidArgument("time window must satisfy 0 <= t-min < t-max");
  }
  return {lo, hi};
}

std::string format_of(const RunConfig& cfg, const std::string& fallback) {
  const std::string f = cfg.format.empty() ? fallback : cfg.format;
  if (f != "csv" && f != "json") throw InvalidArgument("--format must be csv or json");
  return f;
}

nlohmann::json vec_json(const Vec& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

// ---------------------------------------------------------------------------
// Commands. Each returns the text to emit.

std::string cmd_geodesic(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const auto [lo, hi] = window(cfg, 0.0, 1.0);
  const auto full = integrate_extremal(p.s, p.point, p.covector, hi, cfg.tol);
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<Mat> phis;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const FlowSample smp = full.sample(i);
    if (smp.t < lo) continue;
    times.push_back(smp.t);
    states.push_back(smp.state.packed());
    phis.push_back(smp.phi);
  }
  const ExtremalTrajectory traj(p.s, full.initial(), cfg.tol, times, states, phis);

  std::ostringstream os;
  if (format_of(cfg, "csv") == "csv") {
    write_trajectory_csv(os, traj, cfg.phi);
    return os.str();
  }
  nlohmann::json j;
  j["structure"] = p.s->name();
  j["t"] = times;
  j["q"] = nlohmann::json::array();
  j["p"] = nlohmann::json::array();
  j["H"] = nlohmann::json::array();
  if (cfg.phi) j["phi"] = nlohmann::json::array();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const FlowSample smp = traj.sample(i);
    j["q"].push_back(vec_json(smp.state.q));
    j["p"].push_back(vec_json(smp.state.p));
    j["H"].push_back(hamiltonian(*p.s, smp.state));
    if (cfg.phi) {
      const Mat rowmajor = smp.phi.transpose();
      j["phi"].push_back(vec_json(Eigen::Map<const Vec>(rowmajor.data(), rowmajor.size())));
    }
  }
  return dump_json(j) + "\n";
}

std::string cmd_jacobi(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const int n = p.s->dim();
  const auto [lo, hi] = window(cfg, 0.0, 1.0);
  (void)lo;
  Vec init = Vec::Zero(2 * n);
  init[0] = 1.0;
  if (!cfg.init.empty()) init = parse_list(cfg.init, "--init");
  if (init.size() != 2 * n) {
    throw DimensionError("--init must have 2n = " + std::to_string(2 * n) + " entries (p0, x0)");
  }
  const auto traj = integrate_extremal(p.s, p.point, p.covector, hi, cfg.tol);
  const auto jc = propagate_jacobi(traj, init.head(n), init.tail(n));

  std::ostringstream os;
  if (format_of(cfg, "csv") == "csv") {
    write_jacobi_csv(os, jc);
    return os.str();
  }
  nlohmann::json j;
  j["frame"] = jc.frame;
  j["t"] = jc.times;
  j["p"] = nlohmann::json::array();
  j["x"] = nlohmann::json::array();
  for (std::size_t i = 0; i < jc.times.size(); ++i) {
    j["p"].push_back(vec_json(jc.p[i]));
    j["x"].push_back(vec_json(jc.x[i]));
  }
  return dump_json(j) + "\n";
}

std::string crossings_csv(const std::vector<CrossingReport>& reps) {
  std::ostringstream os;
  os.precision(12);
  os << "t,multiplicity,signature,bracket_lo,bracket_hi\n";
  for (const auto& r : reps) {
    os << r.t << "," << r.multiplicity << "," << r.signature << "," << r.bracket_lo << ","
       << r.bracket_hi << "\n";
  }
  return os.str();
}

std::string cmd_conjugate(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const auto [lo, hi] = window(cfg, 0.05, 1.0);
  if (!(lo > 0.0)) throw InvalidArgument("conjugate: t-min must be positive");
  const auto reps = count_conjugate_on_ray(*p.s, p.point, p.covector, lo, hi, cfg.tol);
  if (format_of(cfg, "json") == "csv") return crossings_csv(reps);

  nlohmann::json list = crossings_to_json(reps);
  if (is_heisenberg(cfg)) {
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const ConjugateClass cls =
          classify_conjugate(HeisCovector(p.point, reps[i].t * p.covector), 1e-6);
      list[i]["class"] = cls.label();
    }
  }
  int total = 0, mu = 0;
  for (const auto& r : reps) {
    total += r.multiplicity;
    mu += r.signature;
  }
  nlohmann::json j;
  j["structure"] = p.s->name();
  j["covector"] = vec_json(p.covector);
  j["window"] = {lo, hi};
  j["crossings"] = list;
  j["total_multiplicity"] = total;
  j["maslov_index"] = mu;
  return dump_json(j) + "\n";
}

std::string cmd_maslov(const RunConfig& cfg) {
  const Prepared p = prepare(cfg);
  const auto [lo, hi] = window(cfg, 0.05, 1.0);
  if (cfg.curve != "jacobi" && cfg.curve != "transport") {
    throw InvalidArgument("--curve must be jacobi or transport");
  }
  if (hamiltonian(*p.s, PhaseState(p.point, p.covector)) == 0.0) {
    throw InvalidArgument("maslov: zero Hamiltonian (covector in H^{-1}(0))");
  }
  const double margin = 0.01 * (hi - lo);
  auto traj = std::make_shared<const ExtremalTrajectory>(
      integrate_extremal(p.s, p.point, p.covector, hi + margin, cfg.tol));
  const JacobiCurveSamples curve(traj,
                                 cfg.curve == "jacobi" ? CurveKind::Jacobi : CurveKind::Transport,
                                 std::max(0.0, lo - margin), hi + margin);
  const auto reps = find_crossings(curve, LagrangianFrame::vertical(p.s->dim()), lo, hi);
  if (format_of(cfg, "json") == "csv") return crossings_csv(reps);
  int mu = 0;
  for (const auto& r : reps) mu += r.signature;
  nlohmann::json j;
  j["curve"] = cfg.curve;
  j["window"] = {lo, hi};
  j["index"] = mu;
  j["crossings"] = crossings_to_json(reps);
  return dump_json(j) + "\n";
}

std::string cmd_collide(const RunConfig& cfg) {
  if (!is_heisenberg(cfg)) throw InvalidArgument("collide: only the heisenberg structure is supported");
  if (!(cfg.radius > 0.0) || !std::isfinite(cfg.radius)) {
    throw InvalidArgument("--radius must be positive");
  }
  const Prepared p = prepare(cfg);
  const auto r = find_collision(HeisCovector(p.point, p.covector), cfg.radius);
  nlohmann::json j;
  j["class"] = r.kind == ConjugateClass::Kind::C0 ? "C0" : "C1";
  j["lambda1"] = vec_json(r.lambda1);
  j["lambda2"] = vec_json(r.lambda2);
  j["image1"] = vec_json(r.image1);
  j["image2"] = vec_json(r.image2);
  j["gap"] = r.gap;
  j["separation"] = r.separation;
  j["radius"] = cfg.radius;
  j["iterations"] = r.iterations;
  return dump_json(j) + "\n";
}

std::string cmd_locus(const RunConfig& cfg) {
  if (!is_heisenberg(cfg)) throw InvalidArgument("locus: only the heisenberg structure is supported");
  if (cfg.grid < 2) throw InvalidArgument("--grid must be at least 2");
  const Prepared p = prepare(cfg, false);
  const int g = cfg.grid;
  struct Row {
    double u, v, a;
    ConjugateClass cls;
  };
  std::vector<Row> rows;
  for (int i = 0; i < g; ++i) {
    const double u = 0.2 + 1.8 * i / (g - 1);
    for (int k = 1; k <= g; ++k) {
      const double a = 10.0 * k / g;
      const Vec cov{{u, 0.0, a}};
      rows.push_back({u, 0.0, a, classify_conjugate(HeisCovector(p.point, cov))});
    }
  }
  if (format_of(cfg, "csv") == "csv") {
    std::ostringstream os;
    os.precision(12);
    os << "u0,v0,alpha0,conjugate,class,k1,k2,k3\n";
    for (const auto& r : rows) {
      os << r.u << "," << r.v << "," << r.a << "," << (r.cls.conjugate() ? 1 : 0) << ","
         << r.cls.label();
      for (int k = 0; k < 3; ++k) os << "," << (r.cls.conjugate() ? r.cls.kernel[k] : 0.0);
      os << "\n";
    }
    return os.str();
  }
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json e{{"u0", r.u}, {"v0", r.v}, {"alpha0", r.a},
                     {"conjugate", r.cls.conjugate()}, {"class", r.cls.label()}};
    e["kernel"] = r.cls.conjugate() ? vec_json(r.cls.kernel) : nlohmann::json::array();
    j.push_back(std::move(e));
  }
  return dump_json(j) + "\n";
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  const auto results = run_verify_suite(cfg.suite, cfg.seed);
  int failed = 0;
  for (const auto& r : results) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "value=%.6g limit=%.6g", r.value, r.limit);
    out << (r.pass ? "PASS " : "FAIL ") << r.suite << ": " << r.name << " (" << buf;
    if (!r.detail.empty()) out << "; " << r.detail;
    out << ")\n";
    if (!r.pass) ++failed;
  }
  out << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << " ("
      << results.size() << " total)\n";
  return failed == 0 ? kOk : kVerificationFailure;
}

void add_common(CLI::App* sub, RunConfig& cfg, bool covector_required) {
  sub->add_option("--structure", cfg.structure, "registry name: heisenberg | euclidean:<n>")
      ->capture_default_str();
  sub->add_option("--structure-file", cfg.structure_file, "JSON structure description");
  sub->add_option("--point", cfg.point, "base point, comma separated (default: origin)");
  auto* c = sub->add_option("--covector", cfg.covector, "initial covector, comma separated");
  if (covector_required) c->required();
  sub->add_option("--t-min", cfg.t_min, "start of the time window");
  sub->add_option("--t-max", cfg.t_max, "end of the time window");
  sub->add_option("--tol", cfg.tol, "integrator tolerance in [1e-13, 1e-3]")->capture_default_str();
  sub->add_option("--out", cfg.out, "output file (default: standard output)");
  sub->add_option("--format", cfg.format, "csv | json");
  sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::ostringstream os;
  write_json(os, j, indent, 0);
  return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Normal geodesics, Jacobi fields, conjugate points and Maslov indices"};
  app.name("srgeo");
  app.require_subcommand(1);

  auto* geodesic = app.add_subcommand("geodesic", "integrate a normal extremal (CSV trajectory)");
  add_common(geodesic, cfg, true);
  geodesic->add_flag("--phi", cfg.phi, "append the fundamental matrix, row-major");

  auto* jacobi = app.add_subcommand("jacobi", "propagate a Jacobi field in the Darboux frame");
  add_common(jacobi, cfg, true);
  jacobi->add_option("--init", cfg.init, "initial (p0, x0), 2n comma-separated values");

  auto* conjugate = app.add_subcommand("conjugate", "conjugate times along the ray t*covector");
  add_common(conjugate, cfg, true);

  auto* maslov = app.add_subcommand("maslov", "Maslov index of the Jacobi curve over a window");
  add_common(maslov, cfg, true);
  maslov->add_option("--curve", cfg.curve, "jacobi | transport")->capture_default_str();

  auto* collide = app.add_subcommand("collide", "two covectors with equal exp image (heisenberg)");
  add_common(collide, cfg, true);
  collide->add_option("--radius", cfg.radius, "neighbourhood radius")->required();

  auto* locus = app.add_subcommand("locus", "heisenberg conjugate-locus classification grid");
  add_common(locus, cfg, false);
  locus->add_option("--grid", cfg.grid, "grid points per axis")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run an invariant battery");
  verify->add_option("suite", cfg.suite, "r1 | r2 | r3 | oracle | all")->required();
  verify->add_option("--seed", cfg.seed, "random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << "error: " << e.what() << "\n\n";
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    err << target->help();
    return kConfigError;
  }

  try {
    if (verify->parsed()) return cmd_verify(cfg, out);

    std::string text;
    if (geodesic->parsed()) text = cmd_geodesic(cfg);
    else if (jacobi->parsed()) text = cmd_jacobi(cfg);
    else if (conjugate->parsed()) text = cmd_conjugate(cfg);
    else if (maslov->parsed()) text = cmd_maslov(cfg);
    else if (collide->parsed()) text = cmd_collide(cfg);
    else if (locus->parsed()) text = cmd_locus(cfg);

    if (cfg.out.empty()) {
      out << text;
    } else {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw InvalidArgument("cannot open output file '" + cfg.out + "'");
      f << text;
      if (!f) throw InvalidArgument("cannot write output file '" + cfg.out + "'");
    }
    return kOk;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DimensionError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const RangeError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConjugateEndpointError& e) {
    err << "conjugate endpoint: " << e.what() << "\n";
    return kConjugateEndpoint;
  } catch (const SearchError& e) {
    err << "search failure: " << e.what() << " (best gap " << e.best_gap() << ")\n";
    return kSearchFailure;
  } catch (const IntegrationError& e) {
    err << "integration failure: " << e.what() << "\n";
    return kIntegrationError;
  } catch (const Error& e) {
    if (verify->parsed()) {
      err << "verification failure: " << e.what() << "\n";
      return kVerificationFailure;
    }
    err << "numerical failure: " << e.what() << "\n";
    return kIntegrationError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"srgeo"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace srgeo::cli
