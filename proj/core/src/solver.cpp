#include "opfrelax/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace opf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFixedTol = 1e-12;

struct Problem {
  const ModelInstance& model;
  int n = 0;
  std::vector<const Constraint*> eqs, ineqs;
  std::vector<std::vector<int>> ineq_support;
  Eigen::VectorXd lb, ub;
  std::vector<char> fixed;
  std::vector<int> lo_vars, hi_vars;  // non-fixed finite bounds
  double obj_scale = 1.0;

  explicit Problem(const ModelInstance& m) : model(m), n(m.registry.size()) {
    for (size_t i : m.equality_indices) eqs.push_back(m.constraints[i].get());
    for (size_t i : m.inequality_indices) ineqs.push_back(m.constraints[i].get());
    for (const Constraint* c : ineqs) ineq_support.push_back(c->support());
    lb = m.registry.lower();
    ub = m.registry.upper();
    fixed.resize(n, 0);
    for (int v = 0; v < n; ++v) {
      if (ub[v] - lb[v] <= kFixedTol) {
        fixed[v] = 1;
      } else {
        if (lb[v] != -kInf) lo_vars.push_back(v);
        if (ub[v] != kInf) hi_vars.push_back(v);
      }
    }
  }

  int eq_rows() const {
    int nf = static_cast<int>(std::count(fixed.begin(), fixed.end(), char(1)));
    return static_cast<int>(eqs.size()) + nf;
  }

  Eigen::VectorXd ineq_values(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g(ineqs.size());
    for (size_t i = 0; i < ineqs.size(); ++i) g[i] = ineqs[i]->value(x);
    return g;
  }

  bool strictly_feasible(const Eigen::VectorXd& x, double margin = 0.0) const {
    for (const Constraint* c : ineqs)
      if (!(c->value(x) > margin)) return false;
    for (int v : lo_vars)
      if (!(x[v] - lb[v] > margin)) return false;
    for (int v : hi_vars)
      if (!(ub[v] - x[v] > margin)) return false;
    return true;
  }

  // equality residual vector including the pinned-variable rows
  Eigen::VectorXd eq_residuals(const Eigen::VectorXd& x) const {
    Eigen::VectorXd h(eq_rows());
    int r = 0;
    for (const Constraint* c : eqs) h[r++] = c->value(x);
    for (int v = 0; v < n; ++v)
      if (fixed[v]) h[r++] = x[v] - lb[v];
    return h;
  }

  Eigen::MatrixXd eq_jacobian(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(eq_rows(), n);
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
    int r = 0;
    for (const Constraint* c : eqs) {
      row.setZero();
      c->add_gradient(x, 1.0, row);
      A.row(r++) = row;
    }
    for (int v = 0; v < n; ++v)
      if (fixed[v]) A(r++, v) = 1.0;
    return A;
  }

  // barrier value; +inf outside the interior
  double barrier_value(const Eigen::VectorXd& x, double mu) const {
    double val = obj_scale * model.objective.value(x);
    for (const Constraint* c : ineqs) {
      double g = c->value(x);
      if (!(g > 0.0)) return kInf;
      val -= mu * std::log(g);
    }
    for (int v : lo_vars) {
      double s = x[v] - lb[v];
      if (!(s > 0.0)) return kInf;
      val -= mu * std::log(s);
    }
    for (int v : hi_vars) {
      double s = ub[v] - x[v];
      if (!(s > 0.0)) return kInf;
      val -= mu * std::log(s);
    }
    return val;
  }
};

struct Assembled {
  Eigen::VectorXd grad;  // barrier gradient
  Eigen::MatrixXd hess;  // barrier Hessian (before regularization)
};

Assembled assemble(const Problem& prob, const Eigen::VectorXd& x, double mu) {
  Assembled out;
  out.grad = Eigen::VectorXd::Zero(prob.n);
  out.hess = Eigen::MatrixXd::Zero(prob.n, prob.n);
  prob.model.objective.add_gradient(x, prob.obj_scale, out.grad);
  prob.model.objective.add_hessian(prob.obj_scale, out.hess);

  Eigen::VectorXd scratch = Eigen::VectorXd::Zero(prob.n);
  for (size_t i = 0; i < prob.ineqs.size(); ++i) {
    const Constraint* c = prob.ineqs[i];
    double g = c->value(x);
    const auto& sup = prob.ineq_support[i];
    for (int v : sup) scratch[v] = 0.0;
    c->add_gradient(x, 1.0, scratch);
    // -mu*log(g): gradient -mu/g * dg, Hessian mu/g^2 dg dg' - mu/g d2g
    for (int v : sup) out.grad[v] -= mu / g * scratch[v];
    for (int a : sup)
      for (int b : sup) out.hess(a, b) += mu / (g * g) * scratch[a] * scratch[b];
    c->add_hessian(x, -mu / g, out.hess);
    for (int v : sup) scratch[v] = 0.0;
  }
  for (int v : prob.lo_vars) {
    double s = x[v] - prob.lb[v];
    out.grad[v] -= mu / s;
    out.hess(v, v) += mu / (s * s);
  }
  for (int v : prob.hi_vars) {
    double s = prob.ub[v] - x[v];
    out.grad[v] += mu / s;
    out.hess(v, v) += mu / (s * s);
  }
  return out;
}

// Pull a warm start into the strict interior of the inequalities by blending
// toward the model's reference interior point.
Eigen::VectorXd restore_interior(const Problem& prob, Eigen::VectorXd x) {
  for (int v = 0; v < prob.n; ++v) {
    if (prob.fixed[v]) {
      x[v] = prob.lb[v];
      continue;
    }
    if (prob.lb[v] != -kInf && prob.ub[v] != kInf) {
      double span = prob.ub[v] - prob.lb[v];
      x[v] = std::clamp(x[v], prob.lb[v] + 1e-8 * span, prob.ub[v] - 1e-8 * span);
    } else if (prob.lb[v] != -kInf) {
      x[v] = std::max(x[v], prob.lb[v] + 1e-8 * (1.0 + std::abs(prob.lb[v])));
    } else if (prob.ub[v] != kInf) {
      x[v] = std::min(x[v], prob.ub[v] - 1e-8 * (1.0 + std::abs(prob.ub[v])));
    }
  }
  if (prob.strictly_feasible(x, 1e-12)) return x;
  const Eigen::VectorXd& ref = prob.model.interior;
  double lambda = 1.0;
  for (int k = 0; k < 200; ++k) {
    lambda *= 0.85;
    Eigen::VectorXd cand = ref + lambda * (x - ref);
    for (int v = 0; v < prob.n; ++v)
      if (prob.fixed[v]) cand[v] = prob.lb[v];
    if (prob.strictly_feasible(cand, 1e-12)) return cand;
  }
  return prob.model.interior;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIter: return "max-iter";
    case SolveStatus::InfeasibleDetected: return "infeasible-detected";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

KktResiduals kkt_residuals(const ModelInstance& model, const Eigen::VectorXd& point,
                           const DualVariables& duals) {
  Problem prob(model);
  KktResiduals res;

  // stationarity and complementarity are reported relative to the objective
  // gradient magnitude so that tolerances mean the same thing across cost
  // scales; primal infeasibility stays in constraint units
  Eigen::VectorXd g0 = Eigen::VectorXd::Zero(prob.n);
  model.objective.add_gradient(point, 1.0, g0);
  const double scale = 1.0 / std::max(1.0, g0.size() ? g0.cwiseAbs().maxCoeff() : 0.0);

  Eigen::VectorXd lagr = g0;
  for (size_t e = 0; e < prob.eqs.size(); ++e)
    prob.eqs[e]->add_gradient(point, duals.equality.size() > static_cast<long>(e) ? duals.equality[e] : 0.0,
                              lagr);
  for (size_t i = 0; i < prob.ineqs.size(); ++i)
    prob.ineqs[i]->add_gradient(point, -duals.inequality[i], lagr);
  if (duals.bound_lower.size() == prob.n) lagr -= duals.bound_lower;
  if (duals.bound_upper.size() == prob.n) lagr += duals.bound_upper;
  res.stationarity = scale * (lagr.size() ? lagr.cwiseAbs().maxCoeff() : 0.0);

  double primal = 0.0;
  for (const Constraint* c : prob.eqs) primal = std::max(primal, std::abs(c->value(point)));
  for (const Constraint* c : prob.ineqs) primal = std::max(primal, -c->value(point));
  for (int v = 0; v < prob.n; ++v) {
    if (prob.lb[v] != -kInf) primal = std::max(primal, prob.lb[v] - point[v]);
    if (prob.ub[v] != kInf) primal = std::max(primal, point[v] - prob.ub[v]);
  }
  res.primal = primal;

  double comp = 0.0;
  for (size_t i = 0; i < prob.ineqs.size(); ++i)
    comp = std::max(comp, std::abs(duals.inequality[i] * prob.ineqs[i]->value(point)));
  if (duals.bound_lower.size() == prob.n) {
    for (int v = 0; v < prob.n; ++v) {
      if (prob.lb[v] != -kInf && !prob.fixed[v])
        comp = std::max(comp, std::abs(duals.bound_lower[v] * (point[v] - prob.lb[v])));
      if (prob.ub[v] != kInf && !prob.fixed[v])
        comp = std::max(comp, std::abs(duals.bound_upper[v] * (prob.ub[v] - point[v])));
    }
  }
  res.complementarity = scale * comp;
  return res;
}

SolveResult solve(const ModelInstance& model, const SolveOptions& opts,
                  const Eigen::VectorXd* warm_start) {
  auto t0 = std::chrono::steady_clock::now();
  Problem prob(model);
  SolveResult result;
  result.point = Eigen::VectorXd::Zero(prob.n);

  Eigen::VectorXd x = warm_start ? restore_interior(prob, *warm_start)
                                 : restore_interior(prob, model.interior);
  if (!prob.strictly_feasible(x)) {
    result.status = SolveStatus::InfeasibleDetected;
    result.message = "no strictly feasible starting point for the inequality constraints";
    result.point = x;
    return result;
  }

  // scale the objective so stationarity tolerances are meaningful across
  // cost magnitudes; all reported quantities are unscaled
  {
    Eigen::VectorXd g0 = Eigen::VectorXd::Zero(prob.n);
    model.objective.add_gradient(x, 1.0, g0);
    double mag = g0.size() ? g0.cwiseAbs().maxCoeff() : 0.0;
    prob.obj_scale = 1.0 / std::max(1.0, mag);
  }
  // In the scaled problem (objective times obj_scale) the barrier residual
  // thresholds correspond one-to-one with the relative residuals reported by
  // kkt_residuals.
  const double tol = opts.tol_kkt;
  const double mu_floor = 0.1 * tol;

  double mu = opts.mu0;
  double nu_pen = 1.0;  // merit penalty on equality violation
  int total_iters = 0;
  const int m_eq = prob.eq_rows();
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(m_eq);
  bool warned = false;

  for (int outer = 0; outer < opts.max_outer; ++outer) {
    double mu_target = std::max(mu_floor, mu);
    bool inner_converged = false;

    for (int inner = 0; inner < opts.max_inner; ++inner) {
      ++total_iters;
      Assembled a = assemble(prob, x, mu);
      Eigen::VectorXd h = prob.eq_residuals(x);
      Eigen::MatrixXd A = prob.eq_jacobian(x);

      // Newton direction through the Schur complement of the regularized
      // Hessian. A direction that immediately crushes an inequality slack
      // signals curvature the factorization missed (the Cholesky can pass on
      // nearly singular matrices); those directions are rejected and the
      // regularization raised until the step survives the boundary rule.
      Eigen::VectorXd dx;
      Eigen::VectorXd g_now = prob.ineq_values(x);
      double delta = 0.0;
      double alpha = 0.0;
      bool solved = false;
      for (int tries = 0; tries < 30; ++tries) {
        Eigen::MatrixXd hreg = a.hess;
        hreg.diagonal().array() += opts.reg + delta;
        Eigen::LLT<Eigen::MatrixXd> llt(hreg);
        bool factor_ok = llt.info() == Eigen::Success;
        if (factor_ok) {
          if (m_eq == 0) {
            dx = -llt.solve(a.grad);
            solved = dx.allFinite();
          } else {
            Eigen::MatrixXd w1 = llt.solve(A.transpose());
            Eigen::VectorXd w2 = llt.solve(a.grad);
            Eigen::MatrixXd schur = A * w1;
            schur.diagonal().array() += 1e-12;
            Eigen::LLT<Eigen::MatrixXd> slt(schur);
            if (slt.info() == Eigen::Success) {
              nu = slt.solve(h - A * w2);
              dx = -w2 - w1 * nu;
              solved = dx.allFinite() && nu.allFinite();
            } else {
              solved = false;
            }
          }
        }
        if (solved) {
          // fraction-to-boundary on variable bounds
          alpha = 1.0;
          for (int v : prob.lo_vars)
            if (dx[v] < 0.0) alpha = std::min(alpha, opts.ftb * (x[v] - prob.lb[v]) / (-dx[v]));
          for (int v : prob.hi_vars)
            if (dx[v] > 0.0) alpha = std::min(alpha, opts.ftb * (prob.ub[v] - x[v]) / dx[v]);
          // keep nonlinear inequalities strictly positive
          for (int k = 0; k < 80; ++k) {
            Eigen::VectorXd g_trial = prob.ineq_values(x + alpha * dx);
            bool ok = true;
            for (long i = 0; i < g_trial.size(); ++i)
              if (!(g_trial[i] >= (1.0 - opts.ftb) * g_now[i])) {
                ok = false;
                break;
              }
            if (ok) break;
            alpha *= 0.6;
          }
          double step_size = alpha * dx.cwiseAbs().maxCoeff();
          if (alpha >= 1e-4 || step_size <= 1e-12 * (1.0 + x.cwiseAbs().maxCoeff())) break;
          solved = false;  // unusable direction, regularize harder
        }
        delta = (delta == 0.0 ? std::max(opts.reg, 1e-6) : delta * 10.0);
        if (delta > 1e10) break;
      }
      if (!solved) {
        result.status = SolveStatus::NumericalFailure;
        result.message = "KKT system unusable under regularization";
        result.point = x;
        result.iterations = total_iters;
        return result;
      }

      // residuals of the barrier KKT conditions at the current point
      Eigen::VectorXd stat = a.grad;
      if (m_eq > 0) stat += A.transpose() * nu;
      double r_stat = stat.cwiseAbs().maxCoeff();
      double r_pri = h.size() ? h.cwiseAbs().maxCoeff() : 0.0;
      if (r_stat <= std::max(mu_target, 0.3 * tol) && r_pri <= std::max(0.1 * mu_target, 0.3 * tol)) {
        inner_converged = true;
        break;
      }
      if (alpha * dx.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + x.cwiseAbs().maxCoeff())) {
        break;  // no representable progress at this barrier stage
      }

      // merit line search (barrier value + l1 equality penalty)
      if (m_eq > 0) nu_pen = std::max(nu_pen, 2.0 * nu.cwiseAbs().maxCoeff() + 1.0);
      double merit0 = prob.barrier_value(x, mu) + nu_pen * h.cwiseAbs().sum();
      double descent = a.grad.dot(dx) - nu_pen * h.cwiseAbs().sum();
      if (descent > -1e-16) descent = -1e-16;
      bool stepped = false;
      for (int k = 0; k < 60; ++k) {
        Eigen::VectorXd xt = x + alpha * dx;
        double merit_t = prob.barrier_value(xt, mu) + nu_pen * prob.eq_residuals(xt).cwiseAbs().sum();
        if (merit_t <= merit0 + 1e-4 * alpha * descent) {
          x = xt;
          stepped = true;
          break;
        }
        alpha *= 0.6;
      }
      if (!stepped || alpha < 1e-16) {
        // direction unusable at this barrier stage; accept the stage and let
        // the outer loop decide (re-centering usually recovers)
        warned = true;
        break;
      }
      if (!prob.strictly_feasible(x))
        throw std::logic_error("interior-point invariant violated: iterate left the interior");
      if (opts.verbose) {
        std::fprintf(stderr, "[barrier] outer=%d inner=%d mu=%.2e stat=%.2e pri=%.2e alpha=%.2e delta=%.2e dxmax=%.2e\n",
                     outer, inner, mu, r_stat, r_pri, alpha, delta, dx.cwiseAbs().maxCoeff());
      }
    }

    // convergence: scaled stationarity and primal feasibility at tolerance
    // with the barrier weight (the scaled complementarity) small enough
    {
      Eigen::VectorXd h = prob.eq_residuals(x);
      Assembled a = assemble(prob, x, mu);
      Eigen::VectorXd stat = a.grad;
      if (m_eq > 0) stat += prob.eq_jacobian(x).transpose() * nu;
      double r_stat = stat.cwiseAbs().maxCoeff();
      double r_pri = h.size() ? h.cwiseAbs().maxCoeff() : 0.0;
      if (inner_converged && mu <= tol && r_stat <= tol && r_pri <= tol) {
        result.status = SolveStatus::Optimal;
        break;
      }
    }
    if (outer == opts.max_outer - 1) {
      result.status = SolveStatus::MaxIter;
      break;
    }
    mu = std::max(mu * opts.mu_shrink, mu_floor);
  }

  // unscaled duals from the barrier multiplier estimates
  Eigen::VectorXd g = prob.ineq_values(x);
  result.duals.equality = Eigen::VectorXd::Zero(prob.eqs.size());
  for (size_t e = 0; e < prob.eqs.size(); ++e) result.duals.equality[e] = nu[e] / prob.obj_scale;
  result.duals.inequality = Eigen::VectorXd::Zero(prob.ineqs.size());
  for (long i = 0; i < g.size(); ++i) result.duals.inequality[i] = mu / g[i] / prob.obj_scale;
  result.duals.bound_lower = Eigen::VectorXd::Zero(prob.n);
  result.duals.bound_upper = Eigen::VectorXd::Zero(prob.n);
  for (int v : prob.lo_vars) result.duals.bound_lower[v] = mu / (x[v] - prob.lb[v]) / prob.obj_scale;
  for (int v : prob.hi_vars) result.duals.bound_upper[v] = mu / (prob.ub[v] - x[v]) / prob.obj_scale;

  result.point = x;
  result.objective = model.objective.value(x);
  result.kkt = kkt_residuals(model, x, result.duals);
  result.iterations = total_iters;
  result.numerical_warning = warned;
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

SolveResult solve_ac_heuristic(const ModelInstance& model, const SolveOptions& opts) {
  if (model.tier != RelaxationTier::Ac)
    throw std::invalid_argument("solve_ac_heuristic expects the AC model");
  return solve(model, opts, nullptr);
}

}  // namespace opf
