#pragma once

// Sub-Riemannian structures on R^n given by a generating family of polynomial
// vector fields X_1..X_m, and the maximized Hamiltonian
//   H(q, p) = 1/2 sum_k h_k(q, p)^2,   h_k = <p, X_k(q)>.

#include "srgeo/linalg.hpp"

#include "json.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace srgeo {

using MultiIndex = std::vector<int>;

/// Sparse real polynomial in n variables. Terms are kept sorted by multi-index
/// with duplicates merged and zero coefficients dropped.
class Polynomial {
 public:
  struct Term {
    MultiIndex exponents;
    double coeff = 0.0;
  };

  explicit Polynomial(int n = 0) : n_(n) {}
  Polynomial(int n, std::vector<Term> terms);

  static Polynomial constant(int n, double c);
  static Polynomial variable(int n, int i, double coeff = 1.0);

  int dim() const { return n_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  double eval(const Vec& x) const;

  /// Value, gradient and Hessian at x (exact differentiation of each monomial).
  void jet(const Vec& x, double& value, Vec& grad, Mat& hess) const;

  friend bool operator==(const Polynomial& a, const Polynomial& b);

 private:
  int n_;
  std::vector<Term> terms_;
};

/// Vector field on R^n with polynomial components.
class PolyVectorField {
 public:
  explicit PolyVectorField(std::vector<Polynomial> components);

  int dim() const { return static_cast<int>(components_.size()); }
  const std::vector<Polynomial>& components() const { return components_; }

  Vec eval(const Vec& q) const;

 private:
  std::vector<Polynomial> components_;
};

class Structure {
 public:
  Structure(int n, std::vector<PolyVectorField> fields, std::string name = {});

  int dim() const { return n_; }
  int family_size() const { return static_cast<int>(fields_.size()); }
  const std::vector<PolyVectorField>& fields() const { return fields_; }
  const std::string& name() const { return name_; }

 private:
  int n_;
  std::vector<PolyVectorField> fields_;
  std::string name_;
};

/// A covector lambda = (q, p) in T*R^n, Darboux coordinates.
struct PhaseState {
  Vec q;
  Vec p;

  PhaseState() = default;
  PhaseState(Vec q_, Vec p_);

  int dim() const { return static_cast<int>(q.size()); }
  /// Packed (q, p) vector of length 2n.
  Vec packed() const;
  static PhaseState unpack(const Vec& z);
};

struct HamiltonianJet {
  double value = 0.0;
  Vec gradient;  // (dH/dq, dH/dp)
  Mat hessian;   // blocks [[H_qq, H_qp], [H_pq, H_pp]]
};

Vec momentum_functions(const Structure& s, const PhaseState& st);
double hamiltonian(const Structure& s, const PhaseState& st);
HamiltonianJet hamiltonian_jet(const Structure& s, const PhaseState& st);
Vec minimal_control(const Structure& s, const PhaseState& st);

// Built-in structures.
Structure make_heisenberg();
Structure make_euclidean(int n);
/// "heisenberg" or "euclidean:<n>".
Structure structure_from_registry(const std::string& name);

Structure structure_from_json(const nlohmann::json& j);
nlohmann::json structure_to_json(const Structure& s);
Structure load_structure_file(const std::string& path);

}  // namespace srgeo
