#include "opfrelax/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace opf {

namespace {

double pow_int(double base, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

}  // namespace

Polynomial::Polynomial(double constant) {
  if (constant != 0.0) terms_.push_back({constant, {}});
}

Polynomial Polynomial::variable(int var) {
  Polynomial p;
  p.terms_.push_back({1.0, {{var, 1}}});
  return p;
}

void Polynomial::add_term(double coeff, std::vector<std::pair<int, int>> powers) {
  if (coeff == 0.0) return;
  std::sort(powers.begin(), powers.end());
  terms_.push_back({coeff, std::move(powers)});
  normalize();
}

void Polynomial::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Monomial& a, const Monomial& b) { return a.powers < b.powers; });
  std::vector<Monomial> merged;
  for (auto& t : terms_) {
    if (!merged.empty() && merged.back().powers == t.powers) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(std::move(t));
    }
  }
  std::erase_if(merged, [](const Monomial& m) { return m.coeff == 0.0; });
  terms_ = std::move(merged);
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  normalize();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  for (const auto& t : o.terms_) terms_.push_back({-t.coeff, t.powers});
  normalize();
  return *this;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial out;
  out.terms_.reserve(terms_.size() * o.terms_.size());
  for (const auto& a : terms_) {
    for (const auto& b : o.terms_) {
      Monomial m;
      m.coeff = a.coeff * b.coeff;
      // merge sorted factor lists, summing exponents
      auto ia = a.powers.begin(), ib = b.powers.begin();
      while (ia != a.powers.end() || ib != b.powers.end()) {
        if (ib == b.powers.end() || (ia != a.powers.end() && ia->first < ib->first)) {
          m.powers.push_back(*ia++);
        } else if (ia == a.powers.end() || ib->first < ia->first) {
          m.powers.push_back(*ib++);
        } else {
          m.powers.push_back({ia->first, ia->second + ib->second});
          ++ia;
          ++ib;
        }
      }
      out.terms_.push_back(std::move(m));
    }
  }
  out.normalize();
  return out;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial out = *this;
  if (s == 0.0) {
    out.terms_.clear();
    return out;
  }
  for (auto& t : out.terms_) t.coeff *= s;
  return out;
}

Polynomial Polynomial::operator-() const { return *this * -1.0; }

double Polynomial::eval(const Eigen::VectorXd& x) const {
  double v = 0.0;
  for (const auto& t : terms_) {
    double m = t.coeff;
    for (auto [var, e] : t.powers) m *= pow_int(x[var], e);
    v += m;
  }
  return v;
}

void Polynomial::add_gradient(const Eigen::VectorXd& x, double scale, Eigen::VectorXd& grad) const {
  for (const auto& t : terms_) {
    for (size_t k = 0; k < t.powers.size(); ++k) {
      auto [var, e] = t.powers[k];
      double d = t.coeff * e * pow_int(x[var], e - 1);
      for (size_t j = 0; j < t.powers.size(); ++j) {
        if (j == k) continue;
        d *= pow_int(x[t.powers[j].first], t.powers[j].second);
      }
      grad[var] += scale * d;
    }
  }
}

void Polynomial::add_hessian(const Eigen::VectorXd& x, double scale, Eigen::MatrixXd& hess) const {
  for (const auto& t : terms_) {
    const auto& f = t.powers;
    for (size_t a = 0; a < f.size(); ++a) {
      auto [va, ea] = f[a];
      // diagonal: d2/dva2
      if (ea >= 2) {
        double d = t.coeff * ea * (ea - 1) * pow_int(x[va], ea - 2);
        for (size_t j = 0; j < f.size(); ++j) {
          if (j == a) continue;
          d *= pow_int(x[f[j].first], f[j].second);
        }
        hess(va, va) += scale * d;
      }
      // off-diagonal pairs
      for (size_t b = a + 1; b < f.size(); ++b) {
        auto [vb, eb] = f[b];
        double d = t.coeff * ea * eb * pow_int(x[va], ea - 1) * pow_int(x[vb], eb - 1);
        for (size_t j = 0; j < f.size(); ++j) {
          if (j == a || j == b) continue;
          d *= pow_int(x[f[j].first], f[j].second);
        }
        hess(va, vb) += scale * d;
        hess(vb, va) += scale * d;
      }
    }
  }
}

int Polynomial::degree() const {
  int deg = 0;
  for (const auto& t : terms_) {
    int d = 0;
    for (auto [var, e] : t.powers) d += e;
    deg = std::max(deg, d);
  }
  return deg;
}

std::vector<int> Polynomial::support() const {
  std::vector<int> vars;
  for (const auto& t : terms_)
    for (auto [var, e] : t.powers) vars.push_back(var);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

bool Polynomial::proportional(const Polynomial& other, double rel_tol, double* scale_out) const {
  if (terms_.size() != other.terms_.size()) return false;
  if (terms_.empty()) {
    if (scale_out) *scale_out = 1.0;
    return true;
  }
  double s = 0.0;
  for (size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].powers != other.terms_[i].powers) return false;
    double ratio = other.terms_[i].coeff / terms_[i].coeff;
    if (i == 0) {
      s = ratio;
    } else if (std::abs(ratio - s) > rel_tol * std::max(1.0, std::abs(s))) {
      return false;
    }
  }
  if (scale_out) *scale_out = s;
  return true;
}

std::string Polynomial::to_string(const std::vector<std::string>* names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) os << (t.coeff >= 0 ? " + " : " - ");
    else if (t.coeff < 0) os << "-";
    first = false;
    os << std::abs(t.coeff);
    for (auto [var, e] : t.powers) {
      os << "*";
      if (names && var < static_cast<int>(names->size())) os << (*names)[var];
      else os << "x" << var;
      if (e > 1) os << "^" << e;
    }
  }
  return os.str();
}

}  // namespace opf
