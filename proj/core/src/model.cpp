#include "opfrelax/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace opf {

int VariableRegistry::add(VarRole role, int a, int b, double lb, double ub, std::string name) {
  int id = static_cast<int>(vars_.size());
  vars_.push_back({role, a, b, lb, ub, std::move(name)});
  switch (role) {
    case VarRole::BusW:
      if (!w_.emplace(a, id).second) throw std::logic_error("duplicate w variable");
      break;
    case VarRole::BusVm:
      if (!vm_.emplace(a, id).second) throw std::logic_error("duplicate vm variable");
      break;
    case VarRole::BusTheta:
      if (!theta_.emplace(a, id).second) throw std::logic_error("duplicate theta variable");
      break;
    case VarRole::PairWR: {
      auto [it, fresh] = pairs_.emplace(std::pair{a, b}, std::pair{id, -1});
      if (!fresh) throw std::logic_error("duplicate wR variable");
      (void)it;
      break;
    }
    case VarRole::PairWI: {
      auto it = pairs_.find({a, b});
      if (it == pairs_.end() || it->second.second != -1) throw std::logic_error("wI without wR");
      it->second.second = id;
      break;
    }
    case VarRole::FlowP: {
      auto [it, fresh] = flows_.emplace(std::pair{a, b}, std::pair{id, -1});
      if (!fresh) throw std::logic_error("duplicate p variable");
      (void)it;
      break;
    }
    case VarRole::FlowQ: {
      auto it = flows_.find({a, b});
      if (it == flows_.end() || it->second.second != -1) throw std::logic_error("q without p");
      it->second.second = id;
      break;
    }
    case VarRole::GenP: {
      auto [it, fresh] = gens_.emplace(a, std::pair{id, -1});
      if (!fresh) throw std::logic_error("duplicate pg variable");
      (void)it;
      break;
    }
    case VarRole::GenQ: {
      auto it = gens_.find(a);
      if (it == gens_.end() || it->second.second != -1) throw std::logic_error("qg without pg");
      it->second.second = id;
      break;
    }
  }
  return id;
}

int VariableRegistry::w(int bus) const {
  auto it = w_.find(bus);
  return it == w_.end() ? -1 : it->second;
}

bool VariableRegistry::has_pair(int a, int b) const {
  if (a > b) std::swap(a, b);
  return pairs_.count({a, b}) > 0;
}

std::pair<int, int> VariableRegistry::pair_vars(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = pairs_.find({a, b});
  if (it == pairs_.end())
    throw std::out_of_range("pair variables not registered for buses " + std::to_string(a) + "," +
                            std::to_string(b));
  return it->second;
}

int VariableRegistry::flow_p(int from, int to) const {
  auto it = flows_.find({from, to});
  return it == flows_.end() ? -1 : it->second.first;
}

int VariableRegistry::flow_q(int from, int to) const {
  auto it = flows_.find({from, to});
  return it == flows_.end() ? -1 : it->second.second;
}

int VariableRegistry::gen_p(int gen_index) const {
  auto it = gens_.find(gen_index);
  return it == gens_.end() ? -1 : it->second.first;
}

int VariableRegistry::gen_q(int gen_index) const {
  auto it = gens_.find(gen_index);
  return it == gens_.end() ? -1 : it->second.second;
}

int VariableRegistry::vm(int bus) const {
  auto it = vm_.find(bus);
  return it == vm_.end() ? -1 : it->second;
}

int VariableRegistry::theta(int bus) const {
  auto it = theta_.find(bus);
  return it == theta_.end() ? -1 : it->second;
}

Eigen::VectorXd VariableRegistry::lower() const {
  Eigen::VectorXd lb(size());
  for (int i = 0; i < size(); ++i) lb[i] = vars_[i].lb;
  return lb;
}

Eigen::VectorXd VariableRegistry::upper() const {
  Eigen::VectorXd ub(size());
  for (int i = 0; i < size(); ++i) ub[i] = vars_[i].ub;
  return ub;
}

std::vector<std::string> VariableRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(vars_.size());
  for (const auto& v : vars_) out.push_back(v.name);
  return out;
}

const char* to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::LinearEquality: return "linear-equality";
    case ConstraintKind::LinearInequality: return "linear-inequality";
    case ConstraintKind::ConvexQuadratic: return "convex-quadratic";
    case ConstraintKind::SecondOrderCone: return "second-order-cone";
    case ConstraintKind::DeterminantPolynomial: return "determinant-polynomial";
    case ConstraintKind::CyclePolynomial: return "cycle-polynomial";
    case ConstraintKind::AcTrigonometric: return "ac-trigonometric";
  }
  return "?";
}

const char* to_string(RelaxationTier tier) {
  switch (tier) {
    case RelaxationTier::Ac: return "ac";
    case RelaxationTier::Socp: return "socp";
    case RelaxationTier::Psdp: return "psdp";
    case RelaxationTier::Cycle: return "cycle";
    case RelaxationTier::SocpCycle: return "socp+cycle";
  }
  return "?";
}

std::optional<RelaxationTier> tier_from_string(std::string_view s) {
  if (s == "ac") return RelaxationTier::Ac;
  if (s == "socp") return RelaxationTier::Socp;
  if (s == "psdp") return RelaxationTier::Psdp;
  if (s == "cycle") return RelaxationTier::Cycle;
  if (s == "socp+cycle") return RelaxationTier::SocpCycle;
  return std::nullopt;
}

LinearConstraint::LinearConstraint(Relation rel, std::string tag,
                                   std::vector<std::pair<int, double>> terms, double constant,
                                   ConstraintKind kind)
    : Constraint(kind, rel, std::move(tag)), terms_(std::move(terms)), constant_(constant) {}

double LinearConstraint::value(const Eigen::VectorXd& x) const {
  double v = constant_;
  for (auto [var, c] : terms_) v += c * x[var];
  return v;
}

void LinearConstraint::add_gradient(const Eigen::VectorXd&, double scale, Eigen::VectorXd& grad) const {
  for (auto [var, c] : terms_) grad[var] += scale * c;
}

std::vector<int> LinearConstraint::support() const {
  std::vector<int> out;
  for (auto [var, c] : terms_) out.push_back(var);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PolynomialConstraint::PolynomialConstraint(ConstraintKind kind, Relation rel, std::string tag,
                                           Polynomial p)
    : Constraint(kind, rel, std::move(tag)), poly_(std::move(p)), support_(poly_.support()) {}

double PolynomialConstraint::value(const Eigen::VectorXd& x) const { return poly_.eval(x); }

void PolynomialConstraint::add_gradient(const Eigen::VectorXd& x, double scale,
                                        Eigen::VectorXd& grad) const {
  poly_.add_gradient(x, scale, grad);
}

void PolynomialConstraint::add_hessian(const Eigen::VectorXd& x, double scale,
                                       Eigen::MatrixXd& hess) const {
  poly_.add_hessian(x, scale, hess);
}

std::vector<int> PolynomialConstraint::support() const { return support_; }

AcFlowConstraint::AcFlowConstraint(std::string tag, int flow_var, int vi, int vj, int ti, int tj,
                                   double quad_coef, double alpha, double beta)
    : Constraint(ConstraintKind::AcTrigonometric, Relation::Eq, std::move(tag)),
      flow_(flow_var),
      vi_(vi),
      vj_(vj),
      ti_(ti),
      tj_(tj),
      quad_coef_(quad_coef),
      alpha_(alpha),
      beta_(beta) {}

double AcFlowConstraint::value(const Eigen::VectorXd& x) const {
  double th = x[ti_] - x[tj_];
  double trig = alpha_ * std::cos(th) + beta_ * std::sin(th);
  return x[flow_] - quad_coef_ * x[vi_] * x[vi_] - x[vi_] * x[vj_] * trig;
}

void AcFlowConstraint::add_gradient(const Eigen::VectorXd& x, double scale, Eigen::VectorXd& grad) const {
  double th = x[ti_] - x[tj_];
  double trig = alpha_ * std::cos(th) + beta_ * std::sin(th);
  double dtrig = -alpha_ * std::sin(th) + beta_ * std::cos(th);
  grad[flow_] += scale;
  grad[vi_] += scale * (-2.0 * quad_coef_ * x[vi_] - x[vj_] * trig);
  grad[vj_] += scale * (-x[vi_] * trig);
  grad[ti_] += scale * (-x[vi_] * x[vj_] * dtrig);
  grad[tj_] += scale * (x[vi_] * x[vj_] * dtrig);
}

void AcFlowConstraint::add_hessian(const Eigen::VectorXd& x, double scale, Eigen::MatrixXd& hess) const {
  double th = x[ti_] - x[tj_];
  double trig = alpha_ * std::cos(th) + beta_ * std::sin(th);
  double dtrig = -alpha_ * std::sin(th) + beta_ * std::cos(th);
  auto sym = [&hess, scale](int a, int b, double v) {
    hess(a, b) += scale * v;
    if (a != b) hess(b, a) += scale * v;
  };
  sym(vi_, vi_, -2.0 * quad_coef_);
  sym(vi_, vj_, -trig);
  sym(vi_, ti_, -x[vj_] * dtrig);
  sym(vi_, tj_, x[vj_] * dtrig);
  sym(vj_, ti_, -x[vi_] * dtrig);
  sym(vj_, tj_, x[vi_] * dtrig);
  // second derivative of the trig factor is -trig
  sym(ti_, ti_, x[vi_] * x[vj_] * trig);
  sym(tj_, tj_, x[vi_] * x[vj_] * trig);
  sym(ti_, tj_, -x[vi_] * x[vj_] * trig);
}

std::vector<int> AcFlowConstraint::support() const {
  std::vector<int> out{flow_, vi_, vj_, ti_, tj_};
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double Objective::value(const Eigen::VectorXd& x) const {
  double v = constant;
  for (auto [var, c] : linear) v += c * x[var];
  for (auto [var, c] : quadratic) v += c * x[var] * x[var];
  return v;
}

void Objective::add_gradient(const Eigen::VectorXd& x, double scale, Eigen::VectorXd& grad) const {
  for (auto [var, c] : linear) grad[var] += scale * c;
  for (auto [var, c] : quadratic) grad[var] += scale * 2.0 * c * x[var];
}

void Objective::add_hessian(double scale, Eigen::MatrixXd& hess) const {
  for (auto [var, c] : quadratic) hess(var, var) += scale * 2.0 * c;
}

void ModelInstance::add_constraint(std::unique_ptr<Constraint> c) {
  for (int v : c->support()) {
    if (v < 0 || v >= registry.size()) throw std::logic_error("constraint references unknown variable");
  }
  if (c->relation() == Relation::Eq)
    equality_indices.push_back(constraints.size());
  else
    inequality_indices.push_back(constraints.size());
  constraints.push_back(std::move(c));
}

std::string ModelInstance::to_json() const {
  nlohmann::ordered_json j;
  j["tier"] = to_string(tier);
  j["variables"] = nlohmann::ordered_json::array();
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (const VariableInfo& v : registry.all()) {
    nlohmann::ordered_json jv;
    jv["name"] = v.name;
    if (v.lb != -inf) jv["lb"] = v.lb;
    if (v.ub != inf) jv["ub"] = v.ub;
    j["variables"].push_back(std::move(jv));
  }
  j["constraints"] = nlohmann::ordered_json::array();
  for (const auto& c : constraints) {
    j["constraints"].push_back({{"kind", to_string(c->kind())},
                                {"relation", c->relation() == Relation::Eq ? "=0" : ">=0"},
                                {"tag", c->tag()}});
  }
  nlohmann::ordered_json obj;
  obj["constant"] = objective.constant;
  obj["linear"] = nlohmann::ordered_json::array();
  for (auto [var, c] : objective.linear)
    obj["linear"].push_back({{"var", registry.info(var).name}, {"coef", c}});
  obj["quadratic"] = nlohmann::ordered_json::array();
  for (auto [var, c] : objective.quadratic)
    obj["quadratic"].push_back({{"var", registry.info(var).name}, {"coef", c}});
  j["objective"] = std::move(obj);
  return j.dump(2);
}

}  // namespace opf
