#ifndef OPFRELAX_MODEL_HPP
#define OPFRELAX_MODEL_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "opfrelax/polynomial.hpp"

namespace opf {

enum class VarRole {
  BusW,      // squared voltage magnitude
  PairWR,    // real part of the lifted pair product, keyed (a < b), oriented a -> b
  PairWI,    // imaginary part of the lifted pair product
  FlowP,     // active flow on a directed edge
  FlowQ,     // reactive flow on a directed edge
  GenP,      // active generation
  GenQ,      // reactive generation
  BusVm,     // voltage magnitude (AC model)
  BusTheta,  // phase angle (AC model)
};

struct VariableInfo {
  VarRole role;
  int a = -1, b = -1;  // bus id(s) / generator index, meaning depends on role
  double lb, ub;       // +-infinity when absent
  std::string name;
};

// One variable per role per element, with bounds. Pair variables are keyed by
// the unordered bus pair (a < b) and store the product oriented a -> b; the
// value for the reverse orientation is the conjugate.
class VariableRegistry {
 public:
  int add(VarRole role, int a, int b, double lb, double ub, std::string name);

  int size() const { return static_cast<int>(vars_.size()); }
  const VariableInfo& info(int v) const { return vars_[v]; }
  const std::vector<VariableInfo>& all() const { return vars_; }

  int w(int bus) const;                             // -1 when absent
  bool has_pair(int a, int b) const;
  std::pair<int, int> pair_vars(int a, int b) const;  // (wR, wI) ids, throws when absent
  // +1 when the requested orientation (from, to) matches storage, else -1
  static int orientation(int from, int to) { return from < to ? +1 : -1; }
  int flow_p(int from, int to) const;
  int flow_q(int from, int to) const;
  int gen_p(int gen_index) const;
  int gen_q(int gen_index) const;
  int vm(int bus) const;
  int theta(int bus) const;

  Eigen::VectorXd lower() const;
  Eigen::VectorXd upper() const;

  std::vector<std::string> names() const;

 private:
  std::vector<VariableInfo> vars_;
  std::map<int, int> w_, vm_, theta_;
  std::map<std::pair<int, int>, std::pair<int, int>> pairs_;
  std::map<std::pair<int, int>, std::pair<int, int>> flows_;  // directed edge -> (p, q)
  std::map<int, std::pair<int, int>> gens_;                   // generator index -> (pg, qg)
};

enum class ConstraintKind {
  LinearEquality,
  LinearInequality,
  ConvexQuadratic,
  SecondOrderCone,
  DeterminantPolynomial,
  CyclePolynomial,
  AcTrigonometric,
};

enum class Relation { Eq, Ge };  // g(x) = 0 or g(x) >= 0

const char* to_string(ConstraintKind kind);

class Constraint {
 public:
  Constraint(ConstraintKind kind, Relation rel, std::string tag)
      : kind_(kind), rel_(rel), tag_(std::move(tag)) {}
  virtual ~Constraint() = default;

  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual void add_gradient(const Eigen::VectorXd& x, double scale, Eigen::VectorXd& grad) const = 0;
  virtual void add_hessian(const Eigen::VectorXd& x, double scale, Eigen::MatrixXd& hess) const = 0;
  virtual std::vector<int> support() const = 0;

  ConstraintKind kind() const { return kind_; }
  Relation relation() const { return rel_; }
  const std::string& tag() const { return tag_; }

 private:
  ConstraintKind kind_;
  Relation rel_;
  std::string tag_;
};

// constant + sum coeff_i * x_i
class LinearConstraint : public Constraint {
 public:
  LinearConstraint(Relation rel, std::string tag, std::vector<std::pair<int, double>> terms,
                   double constant, ConstraintKind kind = ConstraintKind::LinearEquality);

  double value(const Eigen::VectorXd& x) const override;
  void add_gradient(const Eigen::VectorXd& x, double scale, Eigen::VectorXd& grad) const override;
  void add_hessian(const Eigen::VectorXd&, double, Eigen::MatrixXd&) const override {}
  std::vector<int> support() const override;

  const std::vector<std::pair<int, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_;
};

// Exact polynomial constraint; covers quadratic limits, cone products,
// determinant cuts and cycle closures.
class PolynomialConstraint : public Constraint {
 public:
  PolynomialConstraint(ConstraintKind kind, Relation rel, std::string tag, Polynomial p);

  double value(const Eigen::VectorXd& x) const override;
  void add_gradient(const Eigen::VectorXd& x, double scale, Eigen::VectorXd& grad) const override;
  void add_hessian(const Eigen::VectorXd& x, double scale, Eigen::MatrixXd& hess) const override;
  std::vector<int> support() const override;

  const Polynomial& polynomial() const { return poly_; }

 private:
  Polynomial poly_;
  std::vector<int> support_;
};

// Residual of one directed AC flow equation:
//   flow - quad_coef*vi^2 - vi*vj*(alpha*cos(ti - tj) + beta*sin(ti - tj)) = 0
class AcFlowConstraint : public Constraint {
 public:
  AcFlowConstraint(std::string tag, int flow_var, int vi, int vj, int ti, int tj, double quad_coef,
                   double alpha, double beta);

  double value(const Eigen::VectorXd& x) const override;
  void add_gradient(const Eigen::VectorXd& x, double scale, Eigen::VectorXd& grad) const override;
  void add_hessian(const Eigen::VectorXd& x, double scale, Eigen::MatrixXd& hess) const override;
  std::vector<int> support() const override;

 private:
  int flow_, vi_, vj_, ti_, tj_;
  double quad_coef_, alpha_, beta_;
};

// Convex quadratic generation cost: constant + sum c1_g*pg + c2_g*pg^2.
struct Objective {
  double constant = 0.0;
  std::vector<std::pair<int, double>> linear;
  std::vector<std::pair<int, double>> quadratic;  // diagonal, coefficients >= 0

  double value(const Eigen::VectorXd& x) const;
  void add_gradient(const Eigen::VectorXd& x, double scale, Eigen::VectorXd& grad) const;
  void add_hessian(double scale, Eigen::MatrixXd& hess) const;
};

enum class RelaxationTier { Ac, Socp, Psdp, Cycle, SocpCycle };

const char* to_string(RelaxationTier tier);
std::optional<RelaxationTier> tier_from_string(std::string_view s);

struct ModelInstance {
  VariableRegistry registry;
  Objective objective;
  std::vector<std::unique_ptr<Constraint>> constraints;
  RelaxationTier tier = RelaxationTier::Socp;
  // Strictly feasible for inequality constraints and bounds; equalities may
  // be violated here, the solver restores them.
  Eigen::VectorXd interior;

  std::vector<size_t> equality_indices, inequality_indices;

  void add_constraint(std::unique_ptr<Constraint> c);
  std::string to_json() const;
};

}  // namespace opf

#endif  // OPFRELAX_MODEL_HPP
