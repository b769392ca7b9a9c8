#ifndef OPFRELAX_POLYNOMIAL_HPP
#define OPFRELAX_POLYNOMIAL_HPP

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace opf {

// One term of a sparse multivariate polynomial: coeff * prod_k x[var_k]^exp_k.
// Factors are sorted by variable id and exponents are >= 1.
struct Monomial {
  double coeff = 0.0;
  std::vector<std::pair<int, int>> powers;
};

// Sparse multivariate polynomial over a flat variable vector. Kept in a
// canonical form (terms sorted by power signature, like terms merged) so that
// coefficient-level comparisons are meaningful. Evaluation and derivatives
// are exact up to floating-point rounding; nothing is approximated.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(double constant);
  static Polynomial variable(int var);

  void add_term(double coeff, std::vector<std::pair<int, int>> powers);

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  Polynomial operator-() const;
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  double eval(const Eigen::VectorXd& x) const;
  // grad += scale * d(this)/dx, hess += scale * d2(this)/dx2
  void add_gradient(const Eigen::VectorXd& x, double scale, Eigen::VectorXd& grad) const;
  void add_hessian(const Eigen::VectorXd& x, double scale, Eigen::MatrixXd& hess) const;

  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  std::vector<int> support() const;
  const std::vector<Monomial>& terms() const { return terms_; }

  // True when other == s * this for a single scalar s (reported via scale_out).
  // Used to compare emitted constraints against reference forms.
  bool proportional(const Polynomial& other, double rel_tol, double* scale_out = nullptr) const;

  std::string to_string(const std::vector<std::string>* names = nullptr) const;

 private:
  void normalize();
  std::vector<Monomial> terms_;
};

// Complex-valued polynomial as a (re, im) pair; multiplication follows the
// usual complex product rules. Used to expand Hermitian determinants and
// voltage-product chains symbolically.
struct ComplexPolynomial {
  Polynomial re, im;

  ComplexPolynomial() = default;
  ComplexPolynomial(Polynomial r, Polynomial i) : re(std::move(r)), im(std::move(i)) {}
  static ComplexPolynomial one() { return {Polynomial(1.0), Polynomial()}; }
  static ComplexPolynomial real(Polynomial p) { return {std::move(p), Polynomial()}; }

  ComplexPolynomial conj() const { return {re, -im}; }
  ComplexPolynomial operator+(const ComplexPolynomial& o) const { return {re + o.re, im + o.im}; }
  ComplexPolynomial operator-(const ComplexPolynomial& o) const { return {re - o.re, im - o.im}; }
  ComplexPolynomial operator*(const ComplexPolynomial& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  ComplexPolynomial operator*(double s) const { return {re * s, im * s}; }
};

}  // namespace opf

#endif  // OPFRELAX_POLYNOMIAL_HPP
