#ifndef OPFRELAX_SOLVER_HPP
#define OPFRELAX_SOLVER_HPP

#include <string>

#include <Eigen/Core>

#include "opfrelax/model.hpp"

namespace opf {

struct SolveOptions {
  double tol_kkt = 1e-6;   // stationarity / feasibility / complementarity target
  double mu0 = 1.0;        // initial barrier weight
  double mu_shrink = 0.2;  // barrier reduction per outer iteration, in (0,1)
  int max_outer = 80;
  int max_inner = 60;
  double ftb = 0.995;      // fraction-to-boundary, in (0,1)
  double reg = 1e-8;       // Hessian regularization floor, x10 escalation
  bool verbose = false;    // convergence trace on stderr
};

enum class SolveStatus { Optimal, MaxIter, InfeasibleDetected, NumericalFailure };
const char* to_string(SolveStatus s);

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
};

// Multipliers in the convention
//   grad f + Jh' * equality - Jg' * inequality - bound_lower + bound_upper = 0
// with inequality/bound entries >= 0.
struct DualVariables {
  Eigen::VectorXd equality;     // per equality constraint, model order
  Eigen::VectorXd inequality;   // per inequality constraint, model order
  Eigen::VectorXd bound_lower;  // per variable
  Eigen::VectorXd bound_upper;  // per variable
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  Eigen::VectorXd point;
  KktResiduals kkt;
  int iterations = 0;
  double wall_time_s = 0.0;
  DualVariables duals;
  bool numerical_warning = false;
  std::string message;
};

// Logarithmic-barrier interior-point solve. Inequalities stay strictly
// feasible along the whole trajectory; equalities are driven to zero by the
// Newton iteration and need not hold at the start. For the convex relaxation
// tiers the result is a global optimum up to tolerances (the feasible region
// is convex even where its polynomial description is not); for models with
// non-convex equalities convergence is to a KKT point.
SolveResult solve(const ModelInstance& model, const SolveOptions& opts = {},
                  const Eigen::VectorXd* warm_start = nullptr);

// AC model solved from its flat start; a local heuristic whose objective
// upper-bounds the optimum.
SolveResult solve_ac_heuristic(const ModelInstance& model, const SolveOptions& opts = {});

// Residuals at an arbitrary primal/dual pair: stationarity (inf-norm of the
// Lagrangian gradient), primal infeasibility (worst violation), and
// complementarity (max |dual * slack|).
KktResiduals kkt_residuals(const ModelInstance& model, const Eigen::VectorXd& point,
                           const DualVariables& duals);

}  // namespace opf

#endif  // OPFRELAX_SOLVER_HPP
