#include "srgeo/verify.hpp"

#include "srgeo/heisenberg.hpp"
#include "srgeo/jacobi.hpp"
#include "srgeo/maslov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace srgeo {

namespace {

using Rng = std::mt19937_64;

Vec random_in_ball(Rng& rng, int n, double radius) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v.normalized() * radius * std::pow(u(rng), 1.0 / n);
}

/// (1, 0, 2 pi) and (1, 0, alpha*) at the origin: the first C1 and C0 conjugate covectors.
std::vector<Vec> conjugate_covectors() {
  const auto roots = heis_conjugate_roots(10.0);
  std::vector<Vec> out;
  for (const auto& r : roots) out.push_back(Vec{{1.0, 0.0, r.alpha}});
  return out;
}

std::string covector_label(const Vec& c) {
  std::ostringstream os;
  os.precision(10);
  os << "(" << c[0] << "," << c[1] << "," << c[2] << ")";
  return os.str();
}

CheckResult at_most(std::string suite, std::string name, double value, double limit,
                    std::string detail = {}) {
  return {std::move(suite), std::move(name), value <= limit, value, limit, std::move(detail)};
}

void suite_r1(std::vector<CheckResult>& out, unsigned long long seed) {
  const Structure s = make_heisenberg();
  Rng rng(seed);
  std::vector<Vec> covectors = conjugate_covectors();
  for (int i = 0; i < 20; ++i) covectors.push_back(random_in_ball(rng, 3, 3.0));
  const Vec origin = Vec::Zero(3);

  double drift = 0.0, speed = 0.0, margin = std::numeric_limits<double>::infinity(), symp = 0.0;
  for (const auto& c : covectors) {
    const auto traj = integrate_extremal(s, origin, c, 1.0, kDefaultTol);
    const auto sd = check_constant_speed(traj);
    drift = std::max(drift, sd.max_relative_drift);
    speed = std::max(speed, sd.max_speed_defect / std::max(1.0, 2.0 * sd.hamiltonian));
    margin = std::min(margin, check_ray_velocity(traj).margin());
    symp = std::max(symp, traj.max_symplectic_defect());
  }
  const std::string n = std::to_string(covectors.size()) + " extremals";
  out.push_back(at_most("r1", "hamiltonian drift (relative)", drift, 1e-9, n));
  out.push_back(at_most("r1", "speed identity |sum h_k^2 - 2H| (relative)", speed, 1e-9, n));
  out.push_back({"r1", "ray velocity image >= sqrt(2H) - 1e-6", margin >= -1e-6, margin, -1e-6,
                 "min over samples of |d exp(lambda0)| - sqrt(2H)"});
  out.push_back(at_most("r1", "symplecticity of Phi", symp, 1e-7, n));
}

void suite_r2(std::vector<CheckResult>& out, unsigned long long seed) {
  const Structure s = make_heisenberg();
  const Vec origin = Vec::Zero(3);
  Rng rng(seed + 1);
  std::vector<Vec> covectors = conjugate_covectors();
  for (const auto& c : covectors) {
    const auto traj = integrate_extremal(s, origin, c, 1.0, kDefaultTol);
    const auto rc = regularity_check(traj);
    const std::string lbl = covector_label(c);
    out.push_back({"r2", "kernel dimension at " + lbl, rc.kernel_dim == 1,
                   static_cast<double>(rc.kernel_dim), 1.0, ""});
    out.push_back({"r2", "regularity (theta rank = k) at " + lbl, rc.pass,
                   static_cast<double>(rc.theta_rank), static_cast<double>(rc.kernel_dim), ""});
    const auto dec = decomposition(traj, 1.0);
    out.push_back({"r2", "decomposition dim A + dim B = n at " + lbl,
                   dec.dim_a() + dec.dim_b() == 3 && dec.max_cross() <= 1e-7, dec.max_cross(),
                   1e-7, "dim A=" + std::to_string(dec.dim_a()) +
                             " dim B=" + std::to_string(dec.dim_b())});
  }
  for (int i = 0; i < 3; ++i) covectors.push_back(random_in_ball(rng, 3, 3.0));
  double drift = 0.0;
  for (const auto& c : covectors) {
    const auto traj = integrate_extremal(s, origin, c, 1.0, kDefaultTol);
    std::vector<JacobiCoordinates> fields;
    for (int k = 0; k < 6; ++k) {
      Vec y = Vec::Unit(6, k);
      fields.push_back(propagate_jacobi(traj, y.head(3), y.tail(3)));
    }
    for (std::size_t a = 0; a < fields.size(); ++a)
      for (std::size_t b = a + 1; b < fields.size(); ++b)
        drift = std::max(drift, pairing_drift(fields[a], fields[b]));
  }
  out.push_back(at_most("r2", "pairing constancy drift", drift, 1e-9,
                        "all pairs of basis Jacobi fields on " +
                            std::to_string(covectors.size()) + " extremals"));
}

void suite_r3(std::vector<CheckResult>& out, unsigned long long seed) {
  const Structure s = make_heisenberg();
  const Vec origin = Vec::Zero(3);
  for (const auto& c : conjugate_covectors()) {
    ContinuityOptions opts;
    opts.seed = seed;
    const auto rep = continuity_check(s, origin, c, opts);
    std::ostringstream detail;
    detail << rep.rays.size() << " rays, expected multiplicity " << rep.expected
           << ", index -multiplicity per ray";
    out.push_back({"r3", "continuity at " + covector_label(c), rep.pass && rep.expected == 1,
                   static_cast<double>(rep.failures()), 0.0, detail.str()});
  }
}

void suite_oracle(std::vector<CheckResult>& out, unsigned long long seed) {
  const Structure s = make_heisenberg();
  Rng rng(seed + 2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  double worst = 0.0;
  std::vector<Vec> covectors;
  for (int i = 0; i < 100; ++i) covectors.push_back(random_in_ball(rng, 3, 10.0));
  covectors.push_back(Vec{{0.7, -0.4, 3e-5}});  // small-alpha branch
  for (const auto& c : covectors) {
    const Vec p{{u(rng), u(rng), u(rng)}};
    const HeisCovector hc(p, c);
    const auto traj = integrate_extremal(s, p, c, 1.0, kDefaultTol);
    auto compare = [&](const FlowSample& smp) {
      const HeisState h = heis_exp_closed(hc, smp.t);
      Vec a(6), b(6);
      a << h.q(), h.p();
      b << smp.state.q, smp.state.p;
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    };
    for (std::size_t i = 0; i < traj.size(); ++i) compare(traj.sample(i));
    for (int k = 1; k < 10; ++k) compare(traj.at(0.1 * k + 0.013));
  }
  out.push_back(at_most("oracle", "extremals vs closed form (sup norm)", worst, 1e-8,
                        std::to_string(covectors.size()) + " covectors, |lambda0| <= 10"));

  double m_err = 0.0, m_symp = 0.0;
  const Mat om = omega_px(3);
  for (int i = 0; i < 20; ++i) {
    const Vec p{{u(rng), u(rng), u(rng)}};
    const Vec c = random_in_ball(rng, 3, 10.0);
    const double t = 0.5 * (u(rng) + 1.0);
    const HeisCovector hc(p, c);
    const Mat m = heis_jacobi_matrix(hc, t);
    const auto traj = integrate_extremal(s, p, c, 1.0, kDefaultTol);
    m_err = std::max(m_err, (m - traj.at(t).phi_px()).cwiseAbs().maxCoeff());
    m_symp = std::max(m_symp, (m.transpose() * om * m - om).cwiseAbs().maxCoeff());
  }
  out.push_back(at_most("oracle", "fundamental matrix vs closed form M(t)", m_err, 1e-7,
                        "20 random (lambda0, t)"));
  out.push_back(at_most("oracle", "M(t) symplecticity", m_symp, 1e-10));

  const auto roots = heis_conjugate_roots(10.0);
  const bool ok = roots.size() == 2 && roots[0].sin_zero &&
                  std::abs(roots[0].alpha - 2 * std::numbers::pi) < 1e-12 &&
                  !roots[1].sin_zero && std::abs(roots[1].alpha - 8.986818916) < 1e-9;
  std::ostringstream detail;
  detail.precision(12);
  for (const auto& r : roots) detail << r.alpha << (r.sin_zero ? " (sin=0) " : " ");
  out.push_back({"oracle", "conjugate roots below 10", ok, static_cast<double>(roots.size()), 2.0,
                 detail.str()});
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names{"r1", "r2", "r3", "oracle", "all"};
  return names;
}

std::vector<CheckResult> run_verify_suite(const std::string& suite, unsigned long long seed) {
  const auto& names = verify_suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    throw InvalidArgument("unknown verify suite '" + suite + "' (expected r1, r2, r3, oracle, all)");
  }
  std::vector<CheckResult> out;
  const bool all = suite == "all";
  if (all || suite == "r1") suite_r1(out, seed);
  if (all || suite == "r2") suite_r2(out, seed);
  if (all || suite == "r3") suite_r3(out, seed);
  if (all || suite == "oracle") suite_oracle(out, seed);
  return out;
}

}  // namespace srgeo
