#include "srgeo/heisenberg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace srgeo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSeriesTerms = 12;

// Power series sum_k sign^k c_k th^{2k} for |th| < 1, where c_k is produced by
// `coeff(k)`; converges far below double rounding with 12 terms.
template <class F>
double even_series(double th, F coeff) {
  const double th2 = th * th;
  double acc = 0.0, pw = 1.0;
  for (int k = 0; k < kSeriesTerms; ++k) {
    acc += ((k % 2) ? -1.0 : 1.0) * coeff(k) * pw;
    pw *= th2;
  }
  return acc;
}

double inv_factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return 1.0 / f;
}

// sin(th)/th
double sinc1(double th) {
  if (std::abs(th) < 1.0) return even_series(th, [](int k) { return inv_factorial(2 * k + 1); });
  return std::sin(th) / th;
}
// (1 - cos th)/th^2
double cosc2(double th) {
  if (std::abs(th) < 1.0) return even_series(th, [](int k) { return inv_factorial(2 * k + 2); });
  return (1.0 - std::cos(th)) / (th * th);
}
// (1 - cos th)/th
double cosc1(double th) { return th * cosc2(th); }
// (th - sin th)/th^3
double sinc3(double th) {
  if (std::abs(th) < 1.0) return even_series(th, [](int k) { return inv_factorial(2 * k + 3); });
  return (th - std::sin(th)) / (th * th * th);
}
// (sin th - th cos th)/th^3
double cs3(double th) {
  if (std::abs(th) < 1.0) {
    return even_series(th, [](int k) { return 2.0 * (k + 1) * inv_factorial(2 * k + 3); });
  }
  return (std::sin(th) - th * std::cos(th)) / (th * th * th);
}
// (2 sin th - th (1 + cos th))/th^3
double k3(double th) {
  if (std::abs(th) < 1.0) {
    return even_series(th, [](int k) { return (2.0 * k + 1) * inv_factorial(2 * k + 3); });
  }
  return (2.0 * std::sin(th) - th * (1.0 + std::cos(th))) / (th * th * th);
}


void require3(const Vec& v, const char* what) {
  if (v.size() != 3) throw DimensionError(std::string(what) + ": expected a 3-vector");
}

}  // namespace

// ---------------------------------------------------------------------------

HeisCovector::HeisCovector(const Vec& point, const Vec& covector) {
  require3(point, "HeisCovector point");
  require3(covector, "HeisCovector covector");
  x0 = point[0];
  y0 = point[1];
  tau0 = point[2];
  u0 = covector[0];
  v0 = covector[1];
  alpha0 = covector[2];
}

double HeisCovector::hamiltonian() const { return 0.5 * std::norm(velocity()); }

Vec HeisCovector::point() const { return Vec{{x0, y0, tau0}}; }
Vec HeisCovector::covector() const { return Vec{{u0, v0, alpha0}}; }

Vec HeisState::q() const { return Vec{{z.real(), z.imag(), tau}}; }
Vec HeisState::p() const { return Vec{{w.real(), w.imag(), alpha}}; }

HeisState heis_exp_closed(const HeisCovector& hc, double t) {
  const double a = hc.alpha0;
  const double th = a * t;
  const Complex w0 = hc.w0(), z0 = hc.z0();
  const Complex I(0.0, 1.0);
  const Complex e = std::polar(1.0, th);
  const double s1 = sinc1(th), c1 = cosc1(th);
  const Complex zw = std::conj(z0) * w0;

  HeisState out;
  out.z = t * w0 * Complex(s1, c1) + z0 * (e + 1.0) / 2.0;
  out.tau = hc.tau0 + zw.imag() * t / 2 + zw.real() * t * c1 / 2 +
            std::norm(z0) * (th + std::sin(th)) / 8 + std::norm(w0) * t * t * th * sinc3(th) / 2;
  out.w = w0 * (e + 1.0) / 2.0 + (a / 4) * I * z0 * (e - 1.0);
  out.alpha = a;
  return out;
}

Vec heis_group_law(const Vec& g, const Vec& h) {
  require3(g, "heis_group_law");
  require3(h, "heis_group_law");
  const Complex z(g[0], g[1]), zp(h[0], h[1]);
  return Vec{{g[0] + h[0], g[1] + h[1], g[2] + h[2] - 0.5 * (z * std::conj(zp)).imag()}};
}

Vec heis_inverse(const Vec& g) {
  require3(g, "heis_inverse");
  return -g;
}

Vec heis_translate_covector(const Vec& g, const Vec& covector) {
  require3(g, "heis_translate_covector");
  require3(covector, "heis_translate_covector");
  const double a = covector[2];
  return Vec{{covector[0] + a * g[1] / 2, covector[1] - a * g[0] / 2, a}};
}

Mat heis_jacobi_matrix(const HeisCovector& hc, double t) {
  const double a = hc.alpha0;
  const double th = a * t;
  const double s = std::sin(th), c = std::cos(th);
  const double x0 = hc.x0, y0 = hc.y0, u0 = hc.u0, v0 = hc.v0;
  const double xi = hc.xi(), eta = hc.eta();
  const double s1 = sinc1(th), c1 = cosc1(th), c2 = cosc2(th), s3 = sinc3(th), q3 = cs3(th);
  const double zz = x0 * x0 + y0 * y0, ww = u0 * u0 + v0 * v0, zw = x0 * u0 + y0 * v0;
  const double t2 = t * t;

  const double f1 = -th * (x0 * c - y0 * s) / 4 - t * u0 * s / 2 - t * v0 * c / 2 - x0 * s / 4 +
                    y0 * (1 - c) / 4;
  const double f2 = -th * (x0 * s + y0 * c) / 4 + t * u0 * c / 2 - t * v0 * s / 2 -
                    x0 * (1 - c) / 4 - y0 * s / 4;
  const double f3 = v0 * t2 * (c2 - s1) - u0 * t2 * th * q3 - t * (y0 * c + x0 * s) / 2;
  const double f4 = u0 * t2 * (s1 - c2) - v0 * t2 * th * q3 + t * (x0 * c - y0 * s) / 2;
  const double f5 = u0 * t2 * th * s3 - t * y0 / 2 + x0 * t * c1 / 2;
  const double f6 = v0 * t2 * th * s3 + t * x0 / 2 + y0 * t * c1 / 2;
  const double f7 = zz * t * (1 + c) / 8 + ww * t2 * t * k3(th) / 2 + zw * t2 * (s1 - c2) / 2;
  const double f8 = t * eta / 2 + u0 * t * c1 / 2 + x0 * s / 4;
  const double f9 = -t * xi / 2 + v0 * t * c1 / 2 + y0 * s / 4;

  Mat m = Mat::Zero(6, 6);
  // delta p rows
  m(0, 0) = (1 + c) / 2;
  m(0, 1) = -s / 2;
  m(0, 2) = f1;
  m(0, 3) = -a * s / 4;
  m(0, 4) = a * (1 - c) / 4;
  m(1, 0) = s / 2;
  m(1, 1) = (1 + c) / 2;
  m(1, 2) = f2;
  m(1, 3) = -a * (1 - c) / 4;
  m(1, 4) = -a * s / 4;
  m(2, 2) = 1;
  // delta q rows
  m(3, 0) = t * s1;
  m(3, 1) = -t * c1;
  m(3, 2) = f3;
  m(3, 3) = (1 + c) / 2;
  m(3, 4) = -s / 2;
  m(4, 0) = t * c1;
  m(4, 1) = t * s1;
  m(4, 2) = f4;
  m(4, 3) = s / 2;
  m(4, 4) = (1 + c) / 2;
  m(5, 0) = f5;
  m(5, 1) = f6;
  m(5, 2) = f7;
  m(5, 3) = f8;
  m(5, 4) = f9;
  m(5, 5) = 1;
  return m;
}

double heis_conjugate_function(double alpha) {
  return alpha * std::sin(alpha) + 2 * std::cos(alpha) - 2;
}

std::vector<ConjugateRoot> heis_conjugate_roots(double limit) {
  if (!(limit > 0.0)) throw InvalidArgument("heis_conjugate_roots: limit must be positive");
  // phi = 2 sin(a/2) (a cos(a/2) - 2 sin(a/2)); each factor has simple roots
  // only, so both are bracketed by sign changes of the factor itself.
  auto g = [](double a) { return a * std::cos(a / 2) - 2 * std::sin(a / 2); };
  std::vector<ConjugateRoot> roots;
  for (int k = 1; 2 * kPi * k <= limit; ++k) roots.push_back({2 * kPi * k, true});

  constexpr double step = 1e-3;
  double a0 = step, g0 = g(a0);
  while (a0 < limit) {
    const double a1 = std::min(a0 + step, limit);
    const double g1 = g(a1);
    if (g1 == 0.0) {
      roots.push_back({a1, false});
    } else if (g0 != 0.0 && (g0 < 0) != (g1 < 0)) {
      double lo = a0, hi = a1, glo = g0;
      while (hi - lo > 1e-12 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm < 0) == (glo < 0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back({0.5 * (lo + hi), false});
    }
    a0 = a1;
    g0 = g1;
  }
  std::sort(roots.begin(), roots.end(),
            [](const ConjugateRoot& l, const ConjugateRoot& r) { return l.alpha < r.alpha; });
  return roots;
}

const char* ConjugateClass::label() const {
  switch (kind) {
    case Kind::C0:
      return "C0";
    case Kind::C1:
      return "C1";
    default:
      return "-";
  }
}

ConjugateClass classify_conjugate(const HeisCovector& hc, double tol) {
  if (hc.hamiltonian() == 0.0) {
    throw InvalidArgument("classify_conjugate: zero Hamiltonian (covector in H^{-1}(0))");
  }
  ConjugateClass out;
  const double a = hc.alpha0;
  if (a == 0.0) return out;
  if (std::abs(heis_conjugate_function(a)) > tol * std::max(1.0, std::abs(a))) return out;

  const double sin_factor = std::abs(std::sin(a / 2));
  const double tan_factor = std::abs(a * std::cos(a / 2) - 2 * std::sin(a / 2));
  if (sin_factor <= tan_factor) {
    out.kind = ConjugateClass::Kind::C1;
    out.kernel = Vec{{-hc.eta(), hc.xi(), 0.0}};
  } else {
    out.kind = ConjugateClass::Kind::C0;
    out.kernel = Vec{{(hc.eta() + hc.y0) / 2, -(hc.xi() + hc.x0) / 2, 1.0}};
  }
  return out;
}

double fold_derivative(const HeisCovector& hc) {
  const double a = hc.alpha0;
  if (a == 0.0) throw InvalidArgument("fold_derivative: alpha0 must be nonzero");
  return hc.hamiltonian() / (2 * a * a) * (2 - (2 + a * a) * std::cos(a));
}

// ---------------------------------------------------------------------------

namespace {

Vec exp1(const Vec& point, const Vec& covector) {
  return heis_exp_closed(HeisCovector(point, covector), 1.0).q();
}

Mat dexp1(const Vec& point, const Vec& covector) {
  return heis_jacobi_matrix(HeisCovector(point, covector), 1.0).block(3, 0, 3, 3);
}

CollisionResult finish(const Vec& point, Vec l1, Vec l2, int iterations,
                       ConjugateClass::Kind kind) {
  CollisionResult r;
  r.image1 = exp1(point, l1);
  r.image2 = exp1(point, l2);
  r.gap = (r.image1 - r.image2).norm();
  r.separation = (l1 - l2).norm();
  r.lambda1 = std::move(l1);
  r.lambda2 = std::move(l2);
  r.iterations = iterations;
  r.kind = kind;
  return r;
}

}  // namespace

CollisionResult find_collision(const HeisCovector& hc, double radius,
                               const CollisionOptions& opts) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("find_collision: radius must be positive");
  }
  const ConjugateClass cls = classify_conjugate(hc, opts.tol);
  if (!cls.conjugate()) throw InvalidArgument("find_collision: covector is not conjugate");
  const Vec point = hc.point();
  const Vec lam0 = hc.covector();

  if (cls.kind == ConjugateClass::Kind::C1) {
    // Rotating the horizontal velocity at fixed alpha moves along the kernel
    // integral curve, whose image is a single point.
    const Complex vel = hc.velocity();
    const double chord = radius / 2;
    const double ratio = std::min(1.0, chord / (2 * std::abs(vel)));
    const double angle = 2 * std::asin(ratio);
    const Complex rotated = vel * std::polar(1.0, angle);
    Vec lam2 = lam0;
    lam2[0] = rotated.real() + hc.alpha0 * hc.y0 / 2;
    lam2[1] = rotated.imag() - hc.alpha0 * hc.x0 / 2;
    return finish(point, lam0, lam2, 0, cls.kind);
  }

  // Fold: solve exp(lam0 + s A + c) = exp(lam0 - s A + c) for the correction c
  // by Gauss-Newton with a pseudo-inverse (the solution set is not isolated).
  const Vec dir = cls.kernel.normalized();
  const double s = radius / 2;
  Vec c = Vec::Zero(3);
  auto residual = [&](const Vec& cc) {
    return Vec(exp1(point, lam0 + s * dir + cc) - exp1(point, lam0 - s * dir + cc));
  };
  Vec f = residual(c);
  double best = f.norm();
  int it = 0;
  for (; it < opts.max_iterations && best > 1e-3 * opts.target_gap; ++it) {
    const Mat jac = dexp1(point, lam0 + s * dir + c) - dexp1(point, lam0 - s * dir + c);
    Eigen::JacobiSVD<Mat> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    Vec step = Vec::Zero(3);
    for (int i = 0; i < 3; ++i) {
      if (sv[i] > 1e-12 * sv[0]) {
        step -= svd.matrixV().col(i) * (svd.matrixU().col(i).dot(f) / sv[i]);
      }
    }
    double damping = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k) {
      const Vec trial = c + damping * step;
      const Vec ft = residual(trial);
      if (ft.norm() < best) {
        c = trial;
        f = ft;
        best = ft.norm();
        improved = true;
        break;
      }
      damping *= 0.5;
    }
    if (!improved) break;
  }
  CollisionResult r = finish(point, lam0 + s * dir + c, lam0 - s * dir + c, it, cls.kind);
  const bool inside = (r.lambda1 - lam0).norm() <= radius && (r.lambda2 - lam0).norm() <= radius;
  if (r.gap > opts.target_gap || !inside || r.separation < radius / 4) {
    throw SearchError("find_collision: no straddling pair found within the iteration budget",
                      r.gap);
  }
  return r;
}

}  // namespace srgeo
