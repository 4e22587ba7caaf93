#include "srgeo/structure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace srgeo {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

void check_dims(const Structure& s, const PhaseState& st, const char* op) {
  if (st.q.size() != s.dim() || st.p.size() != s.dim()) {
    std::ostringstream os;
    os << op << ": structure has dimension " << s.dim() << " but state has q of size "
       << st.q.size() << " and p of size " << st.p.size();
    throw DimensionError(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(int n, std::vector<Term> terms) : n_(n) {
  if (n < 1) throw InvalidArgument("Polynomial: dimension must be positive");
  for (const auto& t : terms) {
    if (static_cast<int>(t.exponents.size()) != n) {
      throw DimensionError("Polynomial: multi-index length differs from dimension");
    }
    for (int e : t.exponents) {
      if (e < 0) throw InvalidArgument("Polynomial: negative exponent");
    }
    if (!std::isfinite(t.coeff)) throw InvalidArgument("Polynomial: non-finite coefficient");
  }
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.exponents < b.exponents; });
  for (auto& t : terms) {
    if (!terms_.empty() && terms_.back().exponents == t.exponents) {
      terms_.back().coeff += t.coeff;
    } else {
      terms_.push_back(std::move(t));
    }
  }
  std::erase_if(terms_, [](const Term& t) { return t.coeff == 0.0; });
}

Polynomial Polynomial::constant(int n, double c) {
  return Polynomial(n, {Term{MultiIndex(n, 0), c}});
}

Polynomial Polynomial::variable(int n, int i, double coeff) {
  MultiIndex e(n, 0);
  e.at(i) = 1;
  return Polynomial(n, {Term{std::move(e), coeff}});
}

double Polynomial::eval(const Vec& x) const {
  double acc = 0.0;
  for (const auto& t : terms_) {
    double m = t.coeff;
    for (int i = 0; i < n_; ++i) m *= ipow(x[i], t.exponents[i]);
    acc += m;
  }
  return acc;
}

void Polynomial::jet(const Vec& x, double& value, Vec& grad, Mat& hess) const {
  value = 0.0;
  grad = Vec::Zero(n_);
  hess = Mat::Zero(n_, n_);
  // monomial factor with exponent of variable i lowered by d_i
  auto factor = [&](const MultiIndex& e, int i, int di, int j, int dj) {
    double m = 1.0;
    for (int k = 0; k < n_; ++k) {
      int ek = e[k];
      double c = 1.0;
      int lower = (k == i ? di : 0) + (k == j ? dj : 0);
      for (int r = 0; r < lower; ++r) {
        c *= ek;
        --ek;
      }
      if (c == 0.0) return 0.0;
      m *= c * ipow(x[k], ek);
    }
    return m;
  };
  for (const auto& t : terms_) {
    const auto& e = t.exponents;
    value += t.coeff * factor(e, -1, 0, -1, 0);
    for (int i = 0; i < n_; ++i) {
      if (e[i] == 0) continue;
      grad[i] += t.coeff * factor(e, i, 1, -1, 0);
      for (int j = i; j < n_; ++j) {
        if (e[j] == 0) continue;
        hess(i, j) += t.coeff * factor(e, i, 1, j, 1);
      }
    }
  }
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < i; ++j) hess(i, j) = hess(j, i);
}

bool operator==(const Polynomial& a, const Polynomial& b) {
  if (a.n_ != b.n_ || a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i) {
    if (a.terms_[i].exponents != b.terms_[i].exponents ||
        a.terms_[i].coeff != b.terms_[i].coeff)
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Vector fields and structures

PolyVectorField::PolyVectorField(std::vector<Polynomial> components)
    : components_(std::move(components)) {
  const int n = dim();
  if (n < 1) throw InvalidArgument("PolyVectorField: needs at least one component");
  for (const auto& c : components_) {
    if (c.dim() != n) throw DimensionError("PolyVectorField: component dimension mismatch");
  }
}

Vec PolyVectorField::eval(const Vec& q) const {
  Vec out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = components_[i].eval(q);
  return out;
}

Structure::Structure(int n, std::vector<PolyVectorField> fields, std::string name)
    : n_(n), fields_(std::move(fields)), name_(std::move(name)) {
  if (n < 1) throw InvalidArgument("Structure: dimension must be positive");
  if (fields_.empty()) throw InvalidArgument("Structure: generating family is empty");
  for (const auto& f : fields_) {
    if (f.dim() != n) throw DimensionError("Structure: field dimension differs from n");
  }
}

PhaseState::PhaseState(Vec q_, Vec p_) : q(std::move(q_)), p(std::move(p_)) {
  if (q.size() != p.size()) throw DimensionError("PhaseState: q and p sizes differ");
  if (!q.allFinite() || !p.allFinite()) throw InvalidArgument("PhaseState: non-finite entry");
}

Vec PhaseState::packed() const {
  Vec z(2 * q.size());
  z << q, p;
  return z;
}

PhaseState PhaseState::unpack(const Vec& z) {
  const auto n = z.size() / 2;
  return PhaseState(z.head(n), z.tail(n));
}

// ---------------------------------------------------------------------------
// Hamiltonian

Vec momentum_functions(const Structure& s, const PhaseState& st) {
  check_dims(s, st, "momentum_functions");
  Vec h(s.family_size());
  for (int k = 0; k < s.family_size(); ++k) h[k] = st.p.dot(s.fields()[k].eval(st.q));
  return h;
}

double hamiltonian(const Structure& s, const PhaseState& st) {
  return 0.5 * momentum_functions(s, st).squaredNorm();
}

Vec minimal_control(const Structure& s, const PhaseState& st) {
  check_dims(s, st, "minimal_control");
  return momentum_functions(s, st);
}

HamiltonianJet hamiltonian_jet(const Structure& s, const PhaseState& st) {
  check_dims(s, st, "hamiltonian_jet");
  const int n = s.dim();
  HamiltonianJet out;
  out.gradient = Vec::Zero(2 * n);
  out.hessian = Mat::Zero(2 * n, 2 * n);

  Vec xk(n);
  Mat dx(n, n);           // dx(i, j) = d_j X_i
  Mat p_d2x(n, n);        // sum_i p_i Hess X_i
  Vec gh(2 * n);
  double v;
  Vec g;
  Mat hs;
  for (const auto& field : s.fields()) {
    p_d2x.setZero();
    for (int i = 0; i < n; ++i) {
      field.components()[i].jet(st.q, v, g, hs);
      xk[i] = v;
      dx.row(i) = g.transpose();
      p_d2x += st.p[i] * hs;
    }
    const double h = st.p.dot(xk);
    gh.head(n) = dx.transpose() * st.p;
    gh.tail(n) = xk;

    out.value += 0.5 * h * h;
    out.gradient += h * gh;
    out.hessian += gh * gh.transpose();
    out.hessian.topLeftCorner(n, n) += h * p_d2x;
    out.hessian.topRightCorner(n, n) += h * dx.transpose();
    out.hessian.bottomLeftCorner(n, n) += h * dx;
  }
  // exact symmetry regardless of summation order
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < i; ++j) out.hessian(i, j) = out.hessian(j, i);
  return out;
}

// ---------------------------------------------------------------------------
// Registry

Structure make_heisenberg() {
  constexpr int n = 3;
  // X1 = d_x - (y/2) d_tau,  X2 = d_y + (x/2) d_tau
  PolyVectorField x1({Polynomial::constant(n, 1.0), Polynomial(n),
                      Polynomial::variable(n, 1, -0.5)});
  PolyVectorField x2({Polynomial(n), Polynomial::constant(n, 1.0),
                      Polynomial::variable(n, 0, 0.5)});
  return Structure(n, {x1, x2}, "heisenberg");
}

Structure make_euclidean(int n) {
  if (n < 1) throw InvalidArgument("euclidean: dimension must be positive");
  std::vector<PolyVectorField> fields;
  for (int k = 0; k < n; ++k) {
    std::vector<Polynomial> comps(n, Polynomial(n));
    comps[k] = Polynomial::constant(n, 1.0);
    fields.emplace_back(std::move(comps));
  }
  return Structure(n, std::move(fields), "euclidean:" + std::to_string(n));
}

Structure structure_from_registry(const std::string& name) {
  if (name == "heisenberg") return make_heisenberg();
  const std::string prefix = "euclidean:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string rest = name.substr(prefix.size());
    std::size_t used = 0;
    int n = 0;
    try {
      n = std::stoi(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size() || n < 1) {
      throw InvalidArgument("unknown structure '" + name + "'");
    }
    return make_euclidean(n);
  }
  throw InvalidArgument("unknown structure '" + name + "'");
}

// ---------------------------------------------------------------------------
// JSON

Structure structure_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("dim").get<int>();
    if (n < 1) throw InvalidArgument("structure file: dim must be positive");
    std::vector<PolyVectorField> fields;
    for (const auto& jf : j.at("fields")) {
      const auto& jc = jf.at("components");
      if (static_cast<int>(jc.size()) != n) {
        throw DimensionError("structure file: field needs exactly dim components");
      }
      std::vector<Polynomial> comps;
      for (const auto& jp : jc) {
        std::vector<Polynomial::Term> terms;
        for (const auto& jt : jp) {
          Polynomial::Term t;
          t.exponents = jt.at(0).get<MultiIndex>();
          t.coeff = jt.at(1).get<double>();
          terms.push_back(std::move(t));
        }
        comps.emplace_back(n, std::move(terms));
      }
      fields.emplace_back(std::move(comps));
    }
    return Structure(n, std::move(fields), j.value("name", std::string{}));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("structure file: ") + e.what());
  }
}

nlohmann::json structure_to_json(const Structure& s) {
  nlohmann::json j;
  j["name"] = s.name();
  j["dim"] = s.dim();
  j["fields"] = nlohmann::json::array();
  for (const auto& f : s.fields()) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : f.components()) {
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& t : c.terms()) terms.push_back({t.exponents, t.coeff});
      comps.push_back(std::move(terms));
    }
    j["fields"].push_back({{"components", std::move(comps)}});
  }
  return j;
}

Structure load_structure_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open structure file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("structure file '" + path + "': " + e.what());
  }
  return structure_from_json(j);
}

}  // namespace srgeo
