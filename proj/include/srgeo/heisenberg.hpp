#pragma once

// Closed-form geodesics, fundamental matrix and conjugate locus of the
// Heisenberg group (x, y, tau) with X1 = d_x - (y/2) d_tau, X2 = d_y + (x/2) d_tau.

#include "srgeo/linalg.hpp"

#include <complex>
#include <vector>

namespace srgeo {

using Complex = std::complex<double>;

/// Base point (x0, y0, tau0) and covector (u0, v0, alpha0). Derived quantities
/// are computed on demand.
struct HeisCovector {
  double x0 = 0.0, y0 = 0.0, tau0 = 0.0;
  double u0 = 0.0, v0 = 0.0, alpha0 = 0.0;

  HeisCovector() = default;
  HeisCovector(const Vec& point, const Vec& covector);

  double xi() const { return u0 - alpha0 * y0 / 2; }
  double xi_tilde() const { return u0 + alpha0 * y0 / 2; }
  double eta() const { return v0 + alpha0 * x0 / 2; }
  double eta_tilde() const { return v0 - alpha0 * x0 / 2; }
  /// u0 + i v0: the horizontal part of the covector.
  Complex w0() const { return {u0, v0}; }
  /// xi0 + i eta0 = (h1, h2): the initial horizontal velocity.
  Complex velocity() const { return {xi(), eta()}; }
  Complex z0() const { return {x0, y0}; }
  double hamiltonian() const;
  Vec point() const;
  Vec covector() const;
};

struct HeisState {
  Complex z;
  double tau = 0.0;
  Complex w;  // u + i v
  double alpha = 0.0;

  Vec q() const;  // (x, y, tau)
  Vec p() const;  // (u, v, alpha)
};

HeisState heis_exp_closed(const HeisCovector& hc, double t);

Vec heis_group_law(const Vec& g, const Vec& h);
Vec heis_inverse(const Vec& g);
/// Covector at base point g corresponding to `covector` at the origin under
/// left translation by g.
Vec heis_translate_covector(const Vec& g, const Vec& covector);

/// 6 x 6 fundamental matrix of the Jacobi equation in the coordinate order
/// (u, v, alpha, x, y, tau): rows/columns 1-3 are delta p, 4-6 are delta q.
Mat heis_jacobi_matrix(const HeisCovector& hc, double t);

/// phi(alpha) = alpha sin(alpha) + 2 cos(alpha) - 2
double heis_conjugate_function(double alpha);

struct ConjugateRoot {
  double alpha = 0.0;
  bool sin_zero = false;  // alpha = 2 pi k; otherwise tan(alpha/2) = alpha/2
};
std::vector<ConjugateRoot> heis_conjugate_roots(double limit);

struct ConjugateClass {
  enum class Kind { NotConjugate, C0, C1 };
  Kind kind = Kind::NotConjugate;
  Vec kernel;  // empty when not conjugate
  bool conjugate() const { return kind != Kind::NotConjugate; }
  const char* label() const;
};

/// Conjugate iff |phi(alpha0)| <= tol * max(1, |alpha0|) and alpha0 != 0.
/// Throws InvalidArgument for a zero Hamiltonian.
ConjugateClass classify_conjugate(const HeisCovector& hc, double tol = 1e-10);

/// H / (2 alpha0^2) * (2 - (2 + alpha0^2) cos alpha0). Throws for alpha0 = 0.
double fold_derivative(const HeisCovector& hc);

class SearchError : public Error {
 public:
  SearchError(const std::string& what, double best_gap) : Error(what), best_gap_(best_gap) {}
  double best_gap() const { return best_gap_; }

 private:
  double best_gap_;
};

struct CollisionResult {
  Vec lambda1;
  Vec lambda2;
  Vec image1;
  Vec image2;
  double gap = 0.0;
  double separation = 0.0;
  int iterations = 0;
  ConjugateClass::Kind kind = ConjugateClass::Kind::NotConjugate;
};

struct CollisionOptions {
  double tol = 1e-8;        // conjugacy classification tolerance
  int max_iterations = 200;
  double target_gap = 1e-9;
};

/// Two distinct covectors within `radius` of a conjugate covector, at least
/// radius/4 apart, with equal images under exp. Throws InvalidArgument for a
/// non-conjugate input or bad radius, SearchError when the budget runs out.
CollisionResult find_collision(const HeisCovector& hc, double radius,
                               const CollisionOptions& opts = {});

}  // namespace srgeo
