#include <doctest.h>

#include <numbers>
#include <random>

#include "opfrelax/builders.hpp"
#include "opfrelax/psd_cuts.hpp"
#include "opfrelax/solver.hpp"
#include "support/helpers.hpp"

using namespace opf;
using namespace opf::test;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// minimize x^2 subject to x >= 1
ModelInstance toy_quadratic() {
  ModelInstance m;
  int x = m.registry.add(VarRole::GenP, 0, 0, -kInf, kInf, "x");
  m.objective.quadratic.push_back({x, 1.0});
  m.add_constraint(std::make_unique<LinearConstraint>(
      Relation::Ge, "x>=1", std::vector<std::pair<int, double>>{{x, 1.0}}, -1.0,
      ConstraintKind::LinearInequality));
  m.interior = Eigen::VectorXd::Constant(1, 2.0);
  return m;
}

// brute-force oracle for the two-bus cone relaxation: nodal balance at the
// load bus pins (wR, wI) for each w2, leaving a refined 2-d scan over
// (w1, w2)
double two_bus_grid_oracle(const Network& net) {
  const Branch& br = net.branches[0];
  const Bus& load = net.bus(2);
  const Generator& gen = net.generators[0];
  double g = br.g, b = br.b;
  double best = kInf;
  double lo1 = net.bus(1).vmin * net.bus(1).vmin, hi1 = net.bus(1).vmax * net.bus(1).vmax;
  double lo2 = load.vmin * load.vmin, hi2 = load.vmax * load.vmax;
  double r1 = hi1 - lo1, r2 = hi2 - lo2;
  double cx1 = 0.5 * (lo1 + hi1), cx2 = 0.5 * (lo2 + hi2);
  for (int round = 0; round < 40; ++round) {
    double best_w1 = cx1, best_w2 = cx2;
    for (int i = 0; i <= 24; ++i) {
      for (int j = 0; j <= 24; ++j) {
        double w1 = std::clamp(cx1 + r1 * (i / 24.0 - 0.5), lo1, hi1);
        double w2 = std::clamp(cx2 + r2 * (j / 24.0 - 0.5), lo2, hi2);
        // p_21 = -pd, q_21 = -qd  =>  g wR - b wI = g w2 + pd ; b wR + g wI = b w2 - qd
        double det = g * g + b * b;
        double rhs1 = g * w2 + load.pd, rhs2 = b * w2 - load.qd;
        double wr = (g * rhs1 + b * rhs2) / det;
        double wi = (g * rhs2 - b * rhs1) / det;
        if (wr < 0.0 || w1 * w2 - wr * wr - wi * wi < 0.0) continue;
        if (wi < std::tan(br.angmin) * wr || wi > std::tan(br.angmax) * wr) continue;
        double p12 = g * w1 - g * wr - b * wi, q12 = -b * w1 + b * wr - g * wi;
        if (br.rate_a > 0.0) {
          if (p12 * p12 + q12 * q12 > br.rate_a * br.rate_a) continue;
          double p21 = -load.pd, q21 = -load.qd;
          if (p21 * p21 + q21 * q21 > br.rate_a * br.rate_a) continue;
        }
        double pg = p12, qg = q12;  // no load at bus 1
        if (pg < gen.pmin || pg > gen.pmax || qg < gen.qmin || qg > gen.qmax) continue;
        double cost = gen.c0 + gen.c1 * pg + gen.c2 * pg * pg;
        if (cost < best) {
          best = cost;
          best_w1 = w1;
          best_w2 = w2;
        }
      }
    }
    cx1 = best_w1;
    cx2 = best_w2;
    r1 *= 0.55;
    r2 *= 0.55;
  }
  return best;
}

}  // namespace

TEST_SUITE("barrier_solver") {
  TEST_CASE("analytic one-variable optimum") {
    ModelInstance m = toy_quadratic();
    SolveResult res = solve(m);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(res.point[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.objective == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(res.duals.inequality[0] == doctest::Approx(2.0).epsilon(1e-3));
  }

  TEST_CASE("kkt residuals at the analytic optimum") {
    ModelInstance m = toy_quadratic();
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 1.0);
    DualVariables duals;
    duals.equality = Eigen::VectorXd::Zero(0);
    duals.inequality = Eigen::VectorXd::Constant(1, 2.0);
    duals.bound_lower = Eigen::VectorXd::Zero(1);
    duals.bound_upper = Eigen::VectorXd::Zero(1);
    KktResiduals res = kkt_residuals(m, x, duals);
    CHECK(res.stationarity <= 1e-8);
    CHECK(res.primal <= 1e-8);
    CHECK(res.complementarity <= 1e-8);

    // feasible but non-optimal: stationarity strictly positive
    Eigen::VectorXd x2 = Eigen::VectorXd::Constant(1, 2.0);
    DualVariables zero = duals;
    zero.inequality[0] = 0.0;
    CHECK(kkt_residuals(m, x2, zero).stationarity > 1.0);

    // infeasible point: primal residual equals the violation
    Eigen::VectorXd x3 = Eigen::VectorXd::Constant(1, 0.25);
    CHECK(kkt_residuals(m, x3, zero).primal == doctest::Approx(0.75));
  }

  TEST_CASE("two-bus cone relaxation matches the grid oracle") {
    Network net = load_case("case2.m");
    ModelInstance socp = build_socp(net);
    SolveOptions opts;
    opts.tol_kkt = 1e-8;
    SolveResult res = solve(socp, opts);
    REQUIRE(res.status == SolveStatus::Optimal);
    double oracle = two_bus_grid_oracle(net);
    CHECK(std::abs(res.objective - oracle) / std::abs(oracle) < 1e-4);
  }

  TEST_CASE("ac heuristic on a lossless two-bus net") {
    Network net = make_net(2, {{1, 2}});
    net.branches[0].r = 0.0;
    net.branches[0].x = 0.5;
    net.branches[0].g = 0.0;
    net.branches[0].b = -2.0;
    net.buses[0].pd = 0.0;
    net.buses[0].qd = 0.0;
    net.buses[1].pd = 1.0;
    net.buses[1].qd = 0.0;
    net.generators.resize(1);  // single generator at bus 1
    net.generators[0].c1 = 1.0;
    ModelInstance ac = build_ac(net);
    SolveResult res = solve_ac_heuristic(ac);
    REQUIRE(res.status == SolveStatus::Optimal);
    // lossless line: dispatch equals demand
    CHECK(res.point[ac.registry.gen_p(0)] == doctest::Approx(1.0).epsilon(1e-4));

    // re-solving from the solution reproduces the same objective
    SolveResult res2 = solve(ac, {}, &res.point);
    CHECK(res2.objective == doctest::Approx(res.objective).epsilon(1e-8));
  }

  TEST_CASE("ac solution lifts into every relaxation constraint") {
    Network net = load_case("case3_cycle.m");
    ModelInstance ac = build_ac(net);
    SolveResult res = solve_ac_heuristic(ac);
    REQUIRE(res.status == SolveStatus::Optimal);

    std::map<int, double> vm, th;
    for (const Bus& b : net.buses) {
      vm[b.id] = res.point[ac.registry.vm(b.id)];
      th[b.id] = res.point[ac.registry.theta(b.id)];
    }
    TreeDecomposition td = tree_decomposition(net);
    ModelInstance psdp = build_wspace(net, {}, true, &td.bags);
    for (const Bag& bag : td.bags)
      for (const MinorIndex& minor : enumerate_minors(bag, static_cast<int>(bag.nodes.size())))
        if (minor.subset.size() >= 2)
          psdp.add_constraint(make_determinant_constraint(minor.subset, psdp.registry));

    Eigen::VectorXd lifted = lift_voltages(net, psdp.registry, vm, th);
    for (size_t idx : psdp.inequality_indices) {
      const Constraint& c = *psdp.constraints[idx];
      CHECK(c.value(lifted) >= -1e-8);
    }
    // objective transfers unchanged (it only reads generation)
    CHECK(psdp.objective.value(lifted) == doctest::Approx(res.objective).epsilon(1e-9));
  }

  TEST_CASE("gradient and hessian consistency per constraint kind") {
    std::mt19937 rng(71);
    Network net = load_case("case3_cycle.m");
    ModelInstance socp = build_socp(net);
    ModelInstance ac = build_ac(net);
    auto cycles = cycle_basis(net);
    REQUIRE(!cycles.empty());
    PathTable table = path_table(net, cycles[0], 1);
    auto [cyc_re, cyc_im] = build_cycle_constraint(socp.registry, cycles[0], 1, table);

    auto check_constraint = [&rng](const Constraint& c, const Eigen::VectorXd& base, double spread) {
      std::uniform_real_distribution<double> jitter(-spread, spread);
      for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x = base;
        for (int v : c.support()) x[v] += jitter(rng);
        Eigen::VectorXd analytic = Eigen::VectorXd::Zero(x.size());
        c.add_gradient(x, 1.0, analytic);
        Eigen::VectorXd fd = fd_gradient(c, x);
        double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
        CHECK((analytic - fd).cwiseAbs().maxCoeff() / scale < 1e-5);
        // Hessian against differentiated gradients
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(x.size(), x.size());
        c.add_hessian(x, 1.0, hess);
        for (int v : c.support()) {
          double h = 1e-5 * std::max(1.0, std::abs(x[v]));
          Eigen::VectorXd gp = Eigen::VectorXd::Zero(x.size()), gm = Eigen::VectorXd::Zero(x.size());
          Eigen::VectorXd xp = x, xm = x;
          xp[v] += h;
          xm[v] -= h;
          c.add_gradient(xp, 1.0, gp);
          c.add_gradient(xm, 1.0, gm);
          for (int u : c.support())
            CHECK(std::abs(hess(u, v) - (gp[u] - gm[u]) / (2 * h)) /
                      std::max(1.0, std::abs(hess(u, v))) <
                  1e-4);
        }
      }
    };

    const Constraint* soc = nullptr;
    const Constraint* thermal = nullptr;
    for (const auto& c : socp.constraints) {
      if (!soc && c->kind() == ConstraintKind::SecondOrderCone) soc = c.get();
      if (!thermal && c->kind() == ConstraintKind::ConvexQuadratic) thermal = c.get();
    }
    REQUIRE(soc);
    REQUIRE(thermal);
    check_constraint(*soc, socp.interior, 0.05);
    check_constraint(*thermal, socp.interior, 0.2);
    check_constraint(*cyc_re, socp.interior, 0.05);
    check_constraint(*cyc_im, socp.interior, 0.05);

    const Constraint* acflow = nullptr;
    for (const auto& c : ac.constraints)
      if (c->kind() == ConstraintKind::AcTrigonometric) {
        acflow = c.get();
        break;
      }
    REQUIRE(acflow);
    check_constraint(*acflow, ac.interior, 0.1);

    std::vector<int> nodes{1, 2, 3};
    auto det3 = make_determinant_constraint(nodes, socp.registry);
    check_constraint(*det3, socp.interior, 0.05);
  }

  TEST_CASE("fixed variables are pinned") {
    Network net = load_case("case3_cycle.m");
    // generator 3 has pmax = pmin = 0: a fixed active dispatch
    ModelInstance socp = build_socp(net);
    SolveResult res = solve(socp);
    REQUIRE(res.status == SolveStatus::Optimal);
    CHECK(std::abs(res.point[socp.registry.gen_p(2)]) <= 1e-10);
  }

  TEST_CASE("infeasible start is reported") {
    ModelInstance bad;
    int v = bad.registry.add(VarRole::GenP, 0, 0, 0.0, 1.0, "x");
    bad.objective.linear.push_back({v, 1.0});
    // contradictory inequality: x - 2 >= 0 cannot meet the bound x <= 1
    bad.add_constraint(std::make_unique<LinearConstraint>(
        Relation::Ge, "x>=2", std::vector<std::pair<int, double>>{{v, 1.0}}, -2.0,
        ConstraintKind::LinearInequality));
    bad.interior = Eigen::VectorXd::Constant(1, 0.5);
    SolveResult res = solve(bad);
    CHECK(res.status == SolveStatus::InfeasibleDetected);
  }
}
