#include <doctest.h>

#include <random>

#include "opfrelax/builders.hpp"
#include "opfrelax/psd_cuts.hpp"
#include "support/helpers.hpp"

using namespace opf;
using namespace opf::test;

namespace {

Eigen::VectorXd point_from(const VariableRegistry& reg, const std::vector<int>& nodes,
                           const std::vector<double>& w, const std::vector<double>& wr,
                           const std::vector<double>& wi) {
  // off-diagonals in (node_i, node_j) lexicographic pair order
  Eigen::VectorXd x = Eigen::VectorXd::Zero(reg.size());
  for (size_t i = 0; i < nodes.size(); ++i) x[reg.w(nodes[i])] = w[i];
  size_t k = 0;
  for (size_t i = 0; i < nodes.size(); ++i)
    for (size_t j = i + 1; j < nodes.size(); ++j, ++k) {
      auto [vr, vi] = reg.pair_vars(nodes[i], nodes[j]);
      x[vr] = wr[k];
      x[vi] = wi[k];
    }
  return x;
}

}  // namespace

TEST_SUITE("psd_cuts") {
  TEST_CASE("minor enumeration counts and order") {
    Bag bag3{{1, 2, 5}, {}};
    auto m3 = enumerate_minors(bag3, 3);
    CHECK(m3.size() == 7);  // 2^3 - 1
    CHECK(m3[0].subset == std::vector<int>{1});
    CHECK(m3[3].subset == std::vector<int>{1, 2});
    CHECK(m3.back().subset == std::vector<int>{1, 2, 5});

    CHECK(enumerate_minors(bag3, 2).size() == 6);  // the cone-equivalent set
    Bag bag4{{1, 2, 3, 4}, {}};
    CHECK(enumerate_minors(bag4, 4).size() == 15);  // 2^4 - 1
    CHECK_THROWS_AS(enumerate_minors(bag3, 4), std::invalid_argument);
  }

  TEST_CASE("determinant values") {
    std::vector<int> nodes{1, 2, 3};
    VariableRegistry reg = dense_registry(nodes);

    // 1x1 minor is the diagonal entry
    Eigen::VectorXd x = point_from(reg, nodes, {1.21, 1.0, 1.0}, {0, 0, 0}, {0, 0, 0});
    CHECK(det_value({nodes, {1}}, reg, x) == doctest::Approx(1.21));

    // 2x2 boundary: w_i = w_j = 1, |W_ij|^2 = 0.36 + 0.64
    x = point_from(reg, nodes, {1, 1, 1}, {0.6, 0, 0}, {0.8, 0, 0});
    CHECK(det_value({nodes, {1, 2}}, reg, x) == doctest::Approx(0.0));

    // worked 3x3 example: w = 1, wR = 0.9 on all pairs, wI = 0
    x = point_from(reg, nodes, {1, 1, 1}, {0.9, 0.9, 0.9}, {0, 0, 0});
    CHECK(det_value({nodes, {1, 2, 3}}, reg, x) == doctest::Approx(0.028));

    // rank-1 points annihilate all 2x2 and 3x3 minors
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> mag(0.9, 1.1), ang(-0.3, 0.3);
    for (int trial = 0; trial < 100; ++trial) {
      double v1 = mag(rng), v2 = mag(rng), v3 = mag(rng);
      double t1 = ang(rng), t2 = ang(rng), t3 = ang(rng);
      auto wrv = [&](double va, double vb, double ta, double tb) { return va * vb * std::cos(ta - tb); };
      auto wiv = [&](double va, double vb, double ta, double tb) { return va * vb * std::sin(ta - tb); };
      x = point_from(reg, nodes, {v1 * v1, v2 * v2, v3 * v3},
                     {wrv(v1, v2, t1, t2), wrv(v1, v3, t1, t3), wrv(v2, v3, t2, t3)},
                     {wiv(v1, v2, t1, t2), wiv(v1, v3, t1, t3), wiv(v2, v3, t2, t3)});
      CHECK(std::abs(det_value({nodes, {1, 2, 3}}, reg, x)) < 1e-10);
      CHECK(std::abs(det_value({nodes, {1, 2}}, reg, x)) < 1e-10);
    }
  }

  TEST_CASE("symbolic expansion equals the numeric determinant") {
    std::mt19937 rng(41);
    for (int k = 2; k <= 5; ++k) {
      std::vector<int> nodes;
      for (int i = 1; i <= k; ++i) nodes.push_back(i);
      VariableRegistry reg = dense_registry(nodes);
      Polynomial dp = det_polynomial(nodes, reg);
      for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd x = random_hermitian_point(nodes, reg, rng, trial % 2 == 0);
        CHECK(dp.eval(x) == doctest::Approx(det_value({nodes, nodes}, reg, x)).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("determinant gradients") {
    std::vector<int> nodes{1, 2};
    VariableRegistry reg = dense_registry(nodes);
    // 1x1: d det / d w = 1
    Eigen::VectorXd x = point_from(reg, nodes, {1.0, 1.0}, {0.0}, {0.0});
    auto g1 = det_gradient({nodes, {1}}, reg, x);
    REQUIRE(g1.size() == 1);
    CHECK(g1[0].second == doctest::Approx(1.0));

    // 2x2 at (1, 1, 0, 0): det = w1 w2 - wR^2 - wI^2, gradient (1, 1, 0, 0)
    auto g2 = det_gradient({nodes, {1, 2}}, reg, x);
    std::map<int, double> gm(g2.begin(), g2.end());
    CHECK(gm[reg.w(1)] == doctest::Approx(1.0));
    CHECK(gm[reg.w(2)] == doctest::Approx(1.0));
    auto [wr, wi] = reg.pair_vars(1, 2);
    CHECK(gm[wr] == doctest::Approx(0.0));
    CHECK(gm[wi] == doctest::Approx(0.0));
  }

  TEST_CASE("adjugate gradient matches finite differences and the polynomial") {
    std::mt19937 rng(53);
    for (int k = 2; k <= 4; ++k) {
      std::vector<int> nodes;
      for (int i = 1; i <= k; ++i) nodes.push_back(i);
      VariableRegistry reg = dense_registry(nodes);
      auto cut = make_determinant_constraint(nodes, reg);
      for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x = random_hermitian_point(nodes, reg, rng, true);
        auto grad = det_gradient({nodes, nodes}, reg, x);
        Eigen::VectorXd dense = Eigen::VectorXd::Zero(reg.size());
        for (auto [v, d] : grad) dense[v] += d;
        Eigen::VectorXd fd = fd_gradient(*cut, x);
        Eigen::VectorXd analytic = Eigen::VectorXd::Zero(reg.size());
        cut->add_gradient(x, 1.0, analytic);
        double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
        CHECK((dense - fd).cwiseAbs().maxCoeff() / scale < 1e-5);
        CHECK((analytic - dense).cwiseAbs().maxCoeff() / scale < 1e-9);
      }
    }
  }

  TEST_CASE("separation") {
    std::vector<int> nodes{1, 2, 3};
    VariableRegistry reg = dense_registry(nodes);
    std::vector<Bag> bags{{nodes, {}}};

    // rank-1 point: nothing to separate
    Eigen::VectorXd x =
        point_from(reg, nodes, {1, 1, 1}, {1, 1, 1}, {0, 0, 0});
    CHECK(separate(bags, reg, x, 1e-6, 3).empty());

    // all 2x2 minors hold but the full determinant is negative:
    // det = 1 + 2*(0.6*0.6*(-0.4)) - (0.36 + 0.36 + 0.16) = -0.168
    x = point_from(reg, nodes, {1, 1, 1}, {0.6, 0.6, -0.4}, {0, 0, 0});
    CHECK(det_value({nodes, {1, 2}}, reg, x) > 0.0);
    CHECK(det_value({nodes, {1, 3}}, reg, x) > 0.0);
    CHECK(det_value({nodes, {2, 3}}, reg, x) > 0.0);
    auto cuts = separate(bags, reg, x, 1e-6, 3);
    REQUIRE(cuts.size() == 4);  // the 3x3 cut plus its three pair prerequisites
    CHECK(cuts[0].minor.subset == nodes);
    CHECK(cuts[0].violation == doctest::Approx(-0.168));
    CHECK_FALSE(cuts[0].prerequisite);
    for (size_t i = 1; i < cuts.size(); ++i) CHECK(cuts[i].prerequisite);

    // with the pair cuts already active only the parent is returned
    std::set<std::vector<int>> active{{1, 2}, {1, 3}, {2, 3}};
    cuts = separate(bags, reg, x, 1e-6, 3, active);
    REQUIRE(cuts.size() == 1);

    // the spec'd illustration point sits exactly on the boundary
    x = point_from(reg, nodes, {1, 1, 1}, {0.6, 0.6, -0.28}, {0, 0, 0});
    CHECK(det_value({nodes, {1, 2, 3}}, reg, x) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(separate(bags, reg, x, 1e-6, 3, active).empty());
  }

  TEST_CASE("separation order is by violation magnitude") {
    std::vector<int> nodes{1, 2, 3, 4};
    VariableRegistry reg = dense_registry(nodes);
    std::vector<Bag> bags{{{1, 2, 3}, {}}, {{2, 3, 4}, {}}};
    // bag {2,3,4} determinant -0.532, bag {1,2,3} determinant -0.168
    Eigen::VectorXd x = point_from(reg, nodes, {1, 1, 1, 1},
                                   {0.6, 0.6, 0.0, -0.4, 0.7, 0.7},  // pairs: 12 13 14 23 24 34
                                   {0, 0, 0, 0, 0, 0});
    std::set<std::vector<int>> active{{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 4}, {3, 4}};
    auto cuts = separate(bags, reg, x, 1e-6, 3, active);
    REQUIRE(cuts.size() == 2);
    CHECK(cuts[0].minor.subset == std::vector<int>{2, 3, 4});
    CHECK(cuts[0].violation < cuts[1].violation + 1e-12);
  }

  TEST_CASE("eigenvalue oracle") {
    std::vector<int> nodes{1, 2};
    VariableRegistry reg = dense_registry(nodes);
    Bag bag{nodes, {}};
    Eigen::VectorXd x = point_from(reg, nodes, {1, 1}, {0.0}, {0.0});
    CHECK(psd_check_oracle(bag, reg, x, 1e-8));
    x = point_from(reg, nodes, {1, 1}, {1.1}, {0.0});  // eigenvalues 1 +- 1.1
    CHECK_FALSE(psd_check_oracle(bag, reg, x, 1e-8));
  }

  TEST_CASE("minor test agrees with the eigenvalue oracle") {
    std::mt19937 rng(59);
    for (int k : {3, 4}) {
      std::vector<int> nodes;
      for (int i = 1; i <= k; ++i) nodes.push_back(i);
      VariableRegistry reg = dense_registry(nodes);
      Bag bag{nodes, {}};
      for (int trial = 0; trial < 10000; ++trial) {
        Eigen::VectorXd x = random_hermitian_point(nodes, reg, rng, trial % 2 == 0);
        bool minors_ok = true;
        for (const MinorIndex& minor : enumerate_minors(bag, k))
          if (det_value(minor, reg, x) < -1e-8) {
            minors_ok = false;
            break;
          }
        CHECK(minors_ok == psd_check_oracle(bag, reg, x, 1e-8));
      }
    }
  }

  TEST_CASE("nondegeneracy: active cut gradients stay nonzero when w > 0") {
    std::mt19937 rng(61);
    std::vector<int> nodes{1, 2, 3};
    VariableRegistry reg = dense_registry(nodes);
    for (int trial = 0; trial < 500; ++trial) {
      Eigen::VectorXd x = random_hermitian_point(nodes, reg, rng, true);
      for (int i = 1; i <= 3; ++i) x[reg.w(i)] = std::max(x[reg.w(i)], 0.81);
      auto grad = det_gradient({nodes, nodes}, reg, x);
      double norm = 0;
      for (auto [v, d] : grad) norm += d * d;
      CHECK(std::sqrt(norm) > 1e-10);
    }
  }
}
