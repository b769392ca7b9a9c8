#include <doctest.h>

#include <random>

#include "opfrelax/polynomial.hpp"

using opf::ComplexPolynomial;
using opf::Polynomial;

TEST_SUITE("polynomial") {
  TEST_CASE("arithmetic and canonical form") {
    Polynomial x = Polynomial::variable(0);
    Polynomial y = Polynomial::variable(1);
    Polynomial p = (x + y) * (x - y);  // x^2 - y^2
    REQUIRE(p.terms().size() == 2);
    Eigen::VectorXd at(2);
    at << 3.0, 2.0;
    CHECK(p.eval(at) == doctest::Approx(5.0));
    CHECK(p.degree() == 2);

    Polynomial q = p - p;
    CHECK(q.is_zero());

    Polynomial cubic = x * x * y * 2.0;
    cubic.add_term(-2.0, {{0, 2}, {1, 1}});
    CHECK(cubic.is_zero());
  }

  TEST_CASE("support and proportionality") {
    Polynomial p;
    p.add_term(2.0, {{3, 1}, {7, 2}});
    p.add_term(-4.0, {{1, 1}});
    CHECK(p.support() == std::vector<int>{1, 3, 7});

    Polynomial q = p * 2.5;
    double scale = 0.0;
    CHECK(p.proportional(q, 1e-12, &scale));
    CHECK(scale == doctest::Approx(2.5));
    q.add_term(1e-3, {{2, 1}});
    CHECK_FALSE(p.proportional(q, 1e-12));
  }

  TEST_CASE("gradient and hessian match finite differences") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unif(0.2, 2.0);
    Polynomial p;
    p.add_term(1.5, {{0, 2}, {1, 1}});
    p.add_term(-0.7, {{1, 3}});
    p.add_term(2.0, {{0, 1}, {2, 1}});
    p.add_term(0.3, {});

    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd x(3);
      for (int i = 0; i < 3; ++i) x[i] = unif(rng);
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(3);
      p.add_gradient(x, 1.0, grad);
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(3, 3);
      p.add_hessian(x, 1.0, hess);
      for (int v = 0; v < 3; ++v) {
        double h = 1e-6 * std::max(1.0, std::abs(x[v]));
        Eigen::VectorXd xp = x, xm = x;
        xp[v] += h;
        xm[v] -= h;
        CHECK(grad[v] == doctest::Approx((p.eval(xp) - p.eval(xm)) / (2 * h)).epsilon(1e-6));
        Eigen::VectorXd gp = Eigen::VectorXd::Zero(3), gm = Eigen::VectorXd::Zero(3);
        p.add_gradient(xp, 1.0, gp);
        p.add_gradient(xm, 1.0, gm);
        for (int u = 0; u < 3; ++u)
          CHECK(hess(u, v) == doctest::Approx((gp[u] - gm[u]) / (2 * h)).epsilon(1e-5));
      }
    }
  }

  TEST_CASE("complex product rules") {
    ComplexPolynomial a{Polynomial::variable(0), Polynomial::variable(1)};
    ComplexPolynomial b{Polynomial::variable(2), Polynomial::variable(3)};
    ComplexPolynomial ab = a * b;
    Eigen::VectorXd x(4);
    x << 1.0, 2.0, 3.0, 4.0;  // (1+2i)(3+4i) = -5 + 10i
    CHECK(ab.re.eval(x) == doctest::Approx(-5.0));
    CHECK(ab.im.eval(x) == doctest::Approx(10.0));
    ComplexPolynomial mag = a * a.conj();
    CHECK(mag.im.is_zero());
    CHECK(mag.re.eval(x) == doctest::Approx(5.0));
  }
}
