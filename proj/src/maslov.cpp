#include "srgeo/maslov.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace srgeo {

namespace {

Mat orthonormal_columns(const Mat& m) {
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ() * Mat::Identity(m.rows(), m.cols());
}

/// Orthonormal basis of the Euclidean complement of a Lagrangian subspace;
/// it is itself Lagrangian and transverse, so N^T F is singular exactly when
/// span F meets L0.
Mat complement_of(const LagrangianFrame& l0) {
  const Mat g = orthonormal_columns(l0.matrix());
  return omega_px(l0.dim()) * g;
}

double sigma_min(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().minCoeff();
}

struct SweepPoint {
  double s = 0.0;
  double det = 0.0;
  double sigma = 0.0;  // smallest singular value of N^T (orthonormalized F), in [0, 1]
};

SweepPoint probe(const JacobiCurveSamples& curve, const Mat& nt, double s) {
  const Mat f = curve.raw(s);
  SweepPoint p;
  p.s = s;
  p.det = (nt * f).determinant();
  p.sigma = sigma_min(nt * orthonormal_columns(f));
  return p;
}

std::vector<double> sweep_points(const JacobiCurveSamples& curve, double r, double s,
                                 double max_step) {
  std::vector<double> base{r};
  for (double g : curve.grid()) {
    if (g > r && g < s) base.push_back(g);
  }
  base.push_back(s);
  std::vector<double> out{r};
  for (std::size_t i = 1; i < base.size(); ++i) {
    const double gap = base[i] - base[i - 1];
    if (gap <= 0.0) continue;
    const int pieces = std::max(1, static_cast<int>(std::ceil(gap / max_step)));
    for (int k = 1; k < pieces; ++k) out.push_back(base[i - 1] + gap * k / pieces);
    out.push_back(base[i]);
  }
  return out;
}

Inertia strict_inertia(const Mat& q, double scale) {
  Eigen::SelfAdjointEigenSolver<Mat> es(q);
  Inertia in;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double e = es.eigenvalues()[i];
    if (std::abs(e) <= 1e-8 * scale) {
      ++in.zero;
    } else if (e > 0) {
      ++in.positive;
    } else {
      ++in.negative;
    }
  }
  return in;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lagrangian frames

LagrangianFrame::LagrangianFrame(Mat f) : f_(std::move(f)) {
  const auto n = f_.cols();
  if (n < 1 || f_.rows() != 2 * n) throw DimensionError("LagrangianFrame: expected a 2n x n frame");
  if (!f_.allFinite()) throw InvalidArgument("LagrangianFrame: non-finite entries");
  if (numerical_rank(f_, "LagrangianFrame") != n) {
    throw InvalidArgument("LagrangianFrame: columns are not independent");
  }
  if (isotropy_defect() > 1e-9) throw InvalidArgument("LagrangianFrame: subspace is not isotropic");
}

double LagrangianFrame::isotropy_defect() const {
  const double norm2 = Eigen::JacobiSVD<Mat>(f_).singularValues()[0];
  return (f_.transpose() * omega_px(dim()) * f_).cwiseAbs().maxCoeff() / (norm2 * norm2);
}

LagrangianFrame LagrangianFrame::vertical(int n) {
  Mat f = Mat::Zero(2 * n, n);
  f.topRows(n).setIdentity();
  return LagrangianFrame(f);
}

LagrangianFrame LagrangianFrame::horizontal(int n) {
  Mat f = Mat::Zero(2 * n, n);
  f.bottomRows(n).setIdentity();
  return LagrangianFrame(f);
}

namespace {

Mat raw_frame(const ExtremalTrajectory& traj, CurveKind kind, double t) {
  const int n = traj.dim();
  const Mat phi = traj.at(t).phi_px();
  if (kind == CurveKind::Transport) return phi.leftCols(n);
  // symplectic inverse: Phi^{-1} = Omega^{-1} Phi^T Omega = -Omega Phi^T Omega
  const Mat om = omega_px(n);
  return -(om * phi.transpose() * om).leftCols(n);
}

}  // namespace

LagrangianFrame jacobi_curve(const ExtremalTrajectory& traj, double t) {
  return LagrangianFrame(raw_frame(traj, CurveKind::Jacobi, t));
}

LagrangianFrame l_curve(const ExtremalTrajectory& traj, double t) {
  return LagrangianFrame(raw_frame(traj, CurveKind::Transport, t));
}

// ---------------------------------------------------------------------------
// Curves

JacobiCurveSamples::JacobiCurveSamples(std::shared_ptr<const ExtremalTrajectory> traj,
                                       CurveKind kind, double a, double b)
    : traj_(std::move(traj)), kind_(kind), a_(a), b_(b), to_time_([](double s) { return s; }) {
  if (!traj_) throw InvalidArgument("JacobiCurveSamples: null trajectory");
  if (!(b > a)) throw InvalidArgument("JacobiCurveSamples: empty parameter interval");
  const double slack = 1e-12 * std::max(1.0, std::abs(traj_->t_end()));
  if (a < traj_->times().front() - slack || b > traj_->t_end() + slack) {
    throw RangeError("JacobiCurveSamples: interval exceeds the trajectory span");
  }
  grid_.push_back(a);
  for (double t : traj_->times()) {
    if (t > a && t < b) grid_.push_back(t);
  }
  grid_.push_back(b);
}

double JacobiCurveSamples::time_at(double s) const { return to_time_(s); }

Mat JacobiCurveSamples::raw(double s) const { return raw_frame(*traj_, kind_, to_time_(s)); }

JacobiCurveSamples JacobiCurveSamples::reversed() const {
  JacobiCurveSamples c = *this;
  const double a = a_, b = b_;
  auto inner = to_time_;
  c.to_time_ = [inner, a, b](double s) { return inner(a + b - s); };
  c.reversed_ = !reversed_;
  c.grid_.clear();
  for (auto it = grid_.rbegin(); it != grid_.rend(); ++it) c.grid_.push_back(a + b - *it);
  return c;
}

JacobiCurveSamples JacobiCurveSamples::resampled(std::vector<double> grid) const {
  if (grid.size() < 2 || !std::is_sorted(grid.begin(), grid.end()) || grid.front() != a_ ||
      grid.back() != b_) {
    throw InvalidArgument("resampled: grid must be sorted and span [a, b]");
  }
  JacobiCurveSamples c = *this;
  c.grid_ = std::move(grid);
  return c;
}

JacobiCurveSamples JacobiCurveSamples::reparametrized(std::function<double(double)> sigma,
                                                      double a2, double b2) const {
  if (!(b2 > a2)) throw InvalidArgument("reparametrized: empty interval");
  const double slack = 1e-12 * std::max(1.0, std::abs(b_));
  if (std::abs(sigma(a2) - a_) > slack || std::abs(sigma(b2) - b_) > slack) {
    throw InvalidArgument("reparametrized: sigma must map [a2, b2] onto [a, b]");
  }
  JacobiCurveSamples c = *this;
  auto inner = to_time_;
  c.to_time_ = [inner, sigma](double s) { return inner(sigma(s)); };
  c.a_ = a2;
  c.b_ = b2;
  const int pieces = static_cast<int>(grid_.size()) - 1;
  c.grid_.clear();
  for (int k = 0; k <= pieces; ++k) c.grid_.push_back(a2 + (b2 - a2) * k / pieces);
  return c;
}

// ---------------------------------------------------------------------------
// Intersections and crossing forms

int intersection_dim(const Mat& f, const Mat& g, const RankPolicy& policy) {
  if (f.rows() != g.rows() || f.cols() != g.cols()) {
    throw DimensionError("intersection_dim: frame shapes differ");
  }
  Mat joined(f.rows(), f.cols() + g.cols());
  joined << orthonormal_columns(f), orthonormal_columns(g);
  return static_cast<int>(f.rows()) - numerical_rank(joined, "intersection_dim", policy);
}

int intersection_dim(const LagrangianFrame& f, const LagrangianFrame& g,
                     const RankPolicy& policy) {
  return intersection_dim(f.matrix(), g.matrix(), policy);
}

Mat crossing_form(const JacobiCurveSamples& curve, double s, const LagrangianFrame& l0,
                  const RankPolicy& policy) {
  const int n = l0.dim();
  const Mat f = curve.raw(s);
  if (f.cols() != n) throw DimensionError("crossing_form: dimension mismatch");
  const Mat nt = complement_of(l0).transpose();
  const Mat coeffs = null_space(nt * f, "crossing_form", policy);
  if (coeffs.cols() == 0) throw Error("crossing_form: curve does not meet L0 at this parameter");

  const double h = 1e-4 * curve.timescale();
  Mat fdot;
  if (s - 2 * h >= curve.a() && s + 2 * h <= curve.b()) {
    fdot = (-curve.raw(s + 2 * h) + 8 * curve.raw(s + h) - 8 * curve.raw(s - h) +
            curve.raw(s - 2 * h)) /
           (12 * h);
  } else {
    const double d = (s - 2 * h >= curve.a()) ? -h : h;  // one-sided, pointing inside
    fdot = (-25 * f + 48 * curve.raw(s + d) - 36 * curve.raw(s + 2 * d) +
            16 * curve.raw(s + 3 * d) - 3 * curve.raw(s + 4 * d)) /
           (12 * d);
  }
  const Mat full = f.transpose() * omega_px(n) * fdot;
  return symmetrized(coeffs.transpose() * full * coeffs);
}

// ---------------------------------------------------------------------------
// Crossings and the Maslov index

std::vector<CrossingReport> find_crossings(const JacobiCurveSamples& curve,
                                           const LagrangianFrame& l0, double r, double s,
                                           const MaslovOptions& opts) {
  if (!(s > r)) throw InvalidArgument("find_crossings: need r < s");
  if (r < curve.a() || s > curve.b()) throw RangeError("find_crossings: interval outside curve");
  const Mat nt = complement_of(l0).transpose();
  const double singular_level = opts.policy.relative_threshold;

  const std::vector<double> pts = sweep_points(curve, r, s, opts.sweep_step);
  std::vector<SweepPoint> sw;
  sw.reserve(pts.size());
  // high-order contact at a conjugate endpoint (e.g. t = 0) is not a vanishing
  // indicator, so the run is only counted away from the endpoints
  const double band = 0.01 * (s - r);
  int run = 0;
  for (double p : pts) {
    sw.push_back(probe(curve, nt, p));
    const bool interior = p >= r + band && p <= s - band;
    run = interior && sw.back().sigma <= singular_level ? run + 1 : 0;
    if (run >= 3) {
      throw NonIdealStructureError(
          "crossing indicator vanishes on a sub-interval (non-ideal structure)");
    }
  }

  for (double e : {r, s}) {
    const RankDecision rd = [&] {
      Mat joined(2 * l0.dim(), 2 * l0.dim());
      joined << orthonormal_columns(curve.raw(e)), orthonormal_columns(l0.matrix());
      return decide_rank(joined, opts.policy);
    }();
    if (rd.ambiguous || rd.rank < 2 * l0.dim()) {
      std::ostringstream os;
      os << "endpoint " << e << " is a crossing (conjugate endpoint)";
      throw ConjugateEndpointError(os.str());
    }
  }

  auto resolved = [&](double t) {
    return 1e-12 * std::max(1.0, std::abs(t));
  };
  struct Bracket {
    double lo, hi;
  };
  std::vector<Bracket> found;

  for (std::size_t i = 0; i + 1 < sw.size(); ++i) {
    // odd multiplicity: sign change of the determinant
    if (sw[i].det != 0.0 && sw[i + 1].det != 0.0 && (sw[i].det < 0) != (sw[i + 1].det < 0)) {
      double lo = sw[i].s, hi = sw[i + 1].s;
      const bool lo_negative = sw[i].det < 0;
      while (hi - lo > opts.refine_tol * std::max(1.0, std::abs(hi)) + resolved(hi)) {
        const double mid = 0.5 * (lo + hi);
        const double d = (nt * curve.raw(mid)).determinant();
        if (d == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((d < 0) == lo_negative) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      found.push_back({lo, hi});
    }
  }
  // even multiplicity: interior local minima of sigma without a sign change
  for (std::size_t i = 1; i + 1 < sw.size(); ++i) {
    if (!(sw[i].sigma < sw[i - 1].sigma && sw[i].sigma <= sw[i + 1].sigma)) continue;
    const bool sign_change = (sw[i - 1].det < 0) != (sw[i].det < 0) ||
                             (sw[i].det < 0) != (sw[i + 1].det < 0);
    if (sign_change) continue;
    double lo = sw[i - 1].s, hi = sw[i + 1].s;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = probe(curve, nt, x1).sigma, f2 = probe(curve, nt, x2).sigma;
    while (hi - lo > opts.refine_tol * std::max(1.0, std::abs(hi)) + resolved(hi)) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = probe(curve, nt, x1).sigma;
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = probe(curve, nt, x2).sigma;
      }
    }
    const double tm = 0.5 * (lo + hi);
    if (probe(curve, nt, tm).sigma > 1e3 * singular_level) continue;  // a genuine minimum only
    const RankDecision rd = [&] {
      Mat joined(2 * l0.dim(), 2 * l0.dim());
      joined << orthonormal_columns(curve.raw(tm)), orthonormal_columns(l0.matrix());
      return decide_rank(joined, opts.policy);
    }();
    if (rd.rank < 2 * l0.dim() && !rd.ambiguous) found.push_back({lo, hi});
  }

  std::sort(found.begin(), found.end(),
            [](const Bracket& x, const Bracket& y) { return x.lo < y.lo; });
  for (std::size_t i = 1; i < found.size(); ++i) {
    if (0.5 * (found[i].lo + found[i].hi) - 0.5 * (found[i - 1].lo + found[i - 1].hi) <
        opts.cluster_gap) {
      throw UnresolvedCrossingError("two crossings closer than the resolution limit");
    }
  }

  std::vector<CrossingReport> out;
  for (const auto& b : found) {
    CrossingReport rep;
    rep.t = 0.5 * (b.lo + b.hi);
    rep.bracket_lo = b.lo;
    rep.bracket_hi = b.hi;
    rep.multiplicity = intersection_dim(curve.raw(rep.t), l0.matrix(), opts.policy);
    if (rep.multiplicity < 1) {
      throw DegenerateCrossingError("bracketed crossing could not be confirmed");
    }
    const Mat q = crossing_form(curve, rep.t, l0, opts.policy);
    const double scale = std::max(q.cwiseAbs().maxCoeff(), 1e-300);
    const Inertia in = strict_inertia(q, scale);
    if (in.zero > 0 || q.rows() != rep.multiplicity) {
      throw DegenerateCrossingError("degenerate crossing form");
    }
    rep.signature = in.signature();
    out.push_back(rep);
  }
  return out;
}

int maslov_index(const JacobiCurveSamples& curve, const LagrangianFrame& l0, double r, double s,
                 const MaslovOptions& opts) {
  int mu = 0;
  for (const auto& c : find_crossings(curve, l0, r, s, opts)) mu += c.signature;
  return mu;
}

std::vector<CrossingReport> count_conjugate_on_ray(const Structure& s, const Vec& point,
                                                   const Vec& covector, double r, double s_end,
                                                   double tol, const MaslovOptions& opts) {
  if (!(r > 0.0) || !(s_end > r)) throw InvalidArgument("count_conjugate_on_ray: need 0 < r < s");
  if (hamiltonian(s, PhaseState(point, covector)) == 0.0) {
    throw InvalidArgument("count_conjugate_on_ray: zero Hamiltonian (covector in H^{-1}(0))");
  }
  const double margin = 0.01 * (s_end - r);
  const double a = std::max(0.0, r - margin), b = s_end + margin;
  auto traj = std::make_shared<const ExtremalTrajectory>(
      integrate_extremal(s, point, covector, b, tol));
  const JacobiCurveSamples curve(traj, CurveKind::Jacobi, a, b);
  const auto reports = find_crossings(curve, LagrangianFrame::vertical(s.dim()), r, s_end, opts);
  int mu = 0, total = 0;
  for (const auto& c : reports) {
    mu += c.signature;
    total += c.multiplicity;
  }
  if (-mu != total) {
    std::ostringstream os;
    os << "count_conjugate_on_ray: index " << mu << " does not match multiplicity " << total;
    throw DegenerateCrossingError(os.str());
  }
  return reports;
}

int ContinuityReport::failures() const {
  int f = 0;
  for (const auto& r : rays) {
    if (!r.certified || !r.error.empty() || r.multiplicity != expected || r.index != -expected) {
      ++f;
    }
  }
  return f;
}

ContinuityReport continuity_check(const Structure& s, const Vec& point, const Vec& covector,
                                  const ContinuityOptions& opts) {
  const int n = s.dim();
  if (hamiltonian(s, PhaseState(point, covector)) == 0.0) {
    throw InvalidArgument("continuity_check: zero Hamiltonian (covector in H^{-1}(0))");
  }
  if (!(opts.delta > 0.0 && opts.delta < 1.0) || opts.n_rays < 1) {
    throw InvalidArgument("continuity_check: need 0 < delta < 1 and n_rays >= 1");
  }
  const RankDecision rd = decide_rank(d_exp(s, point, covector, opts.tol));
  if (rd.ambiguous) {
    throw AmbiguousRankError("continuity_check: rank of d exp is ambiguous", rd.singular_values);
  }
  ContinuityReport rep;
  rep.expected = n - rd.rank;

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  const double radius = opts.ball_fraction * opts.delta * covector.norm();
  for (int i = 0; i < opts.n_rays; ++i) {
    Vec dir(n);
    for (int k = 0; k < n; ++k) dir[k] = gauss(rng);
    const double len = radius * std::pow(unif(rng), 1.0 / n);
    RayOutcome out;
    out.covector = covector + len * dir.normalized();
    try {
      for (const auto& c : count_conjugate_on_ray(s, point, out.covector, 1.0 - opts.delta,
                                                  1.0 + opts.delta, opts.tol)) {
        out.multiplicity += c.multiplicity;
        out.index += c.signature;
      }
    } catch (const ConjugateEndpointError& e) {
      out.certified = false;
      out.error = e.what();
    } catch (const Error& e) {
      out.error = e.what();
    }
    rep.rays.push_back(std::move(out));
  }
  rep.pass = rep.failures() == 0;
  return rep;
}

nlohmann::json crossings_to_json(const std::vector<CrossingReport>& reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) {
    j.push_back({{"t", r.t},
                 {"multiplicity", r.multiplicity},
                 {"signature", r.signature},
                 {"bracket", {r.bracket_lo, r.bracket_hi}}});
  }
  return j;
}

}  // namespace srgeo
