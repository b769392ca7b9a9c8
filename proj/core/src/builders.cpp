#include "opfrelax/builders.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <stdexcept>

namespace opf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string bus_pair_name(const char* prefix, int a, int b) {
  return std::string(prefix) + "[" + std::to_string(a) + "," + std::to_string(b) + "]";
}

std::string edge_name(const char* prefix, int f, int t) {
  return std::string(prefix) + "[" + std::to_string(f) + "->" + std::to_string(t) + "]";
}

// Generators grouped by bus id, indices into net.generators.
std::map<int, std::vector<int>> gens_by_bus(const Network& net) {
  std::map<int, std::vector<int>> out;
  for (size_t g = 0; g < net.generators.size(); ++g) out[net.generators[g].bus].push_back(static_cast<int>(g));
  return out;
}

// Interior-point branch angles: all zero when every branch straddles zero,
// otherwise spanning-tree propagation of per-branch midpoints.
std::map<int, double> interior_angles(const Network& net) {
  std::map<int, double> theta;
  bool straddle = true;
  for (const Branch& br : net.branches)
    if (!(br.angmin < 0.0 && br.angmax > 0.0)) straddle = false;
  for (const Bus& b : net.buses) theta[b.id] = 0.0;
  if (straddle || net.buses.empty()) return theta;

  std::map<int, std::vector<const Branch*>> incident;
  for (const Branch& br : net.branches) {
    incident[br.from].push_back(&br);
    incident[br.to].push_back(&br);
  }
  std::set<int> placed{net.buses.front().id};
  std::deque<int> queue{net.buses.front().id};
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (const Branch* br : incident[u]) {
      int v = br->from == u ? br->to : br->from;
      if (placed.count(v)) continue;
      double mid = 0.5 * (br->angmin + br->angmax);  // angle of (from - to)
      theta[v] = br->from == u ? theta[u] - mid : theta[u] + mid;
      placed.insert(v);
      queue.push_back(v);
    }
  }
  return theta;
}

void check_validated(const Network& net) {
  auto diags = validate_network(net);
  if (!diags.empty()) throw std::invalid_argument("network invalid: " + diags.front());
}

double clamp_strict(double v, double lo, double hi, double margin_frac) {
  double span = hi - lo;
  double m = margin_frac * span;
  return std::clamp(v, lo + m, hi - m);
}

}  // namespace

BranchAdmittance branch_admittance(const Branch& br, bool extended) {
  std::complex<double> y{br.g, br.b};
  if (!extended) return {y, -y, -y, y};
  std::complex<double> half_charge{0.0, br.charge / 2.0};
  std::complex<double> ratio = std::polar(br.tap, br.shift);
  BranchAdmittance adm;
  adm.ff = (y + half_charge) / (br.tap * br.tap);
  adm.ft = -y / std::conj(ratio);
  adm.tf = -y / ratio;
  adm.tt = y + half_charge;
  return adm;
}

// ---------------------------------------------------------------------------
// W-space models

namespace {

// Linear flow definition p/q rows for one direction of a branch.
// p_ft = Re(self)*w_f + Re(mut)*wR + Im(mut)*sigma*wI
// q_ft = -Im(self)*w_f + Re(mut)*sigma*wI - Im(mut)*wR
void add_flow_rows(ModelInstance& m, const Branch& br, int f, int t, std::complex<double> self,
                   std::complex<double> mut) {
  auto& reg = m.registry;
  auto [wr, wi] = reg.pair_vars(f, t);
  double sigma = VariableRegistry::orientation(f, t);
  int wf = reg.w(f);
  int p = reg.flow_p(f, t), q = reg.flow_q(f, t);
  (void)br;
  m.add_constraint(std::make_unique<LinearConstraint>(
      Relation::Eq, edge_name("flow_p", f, t),
      std::vector<std::pair<int, double>>{
          {p, 1.0}, {wf, -self.real()}, {wr, -mut.real()}, {wi, -mut.imag() * sigma}},
      0.0));
  m.add_constraint(std::make_unique<LinearConstraint>(
      Relation::Eq, edge_name("flow_q", f, t),
      std::vector<std::pair<int, double>>{
          {q, 1.0}, {wf, self.imag()}, {wi, -mut.real() * sigma}, {wr, mut.imag()}},
      0.0));
}

void add_thermal_limit(ModelInstance& m, int f, int t, double rate) {
  if (rate <= 0.0) return;  // unlimited
  auto& reg = m.registry;
  int p = reg.flow_p(f, t), q = reg.flow_q(f, t);
  Polynomial g(rate * rate);
  g.add_term(-1.0, {{p, 2}});
  g.add_term(-1.0, {{q, 2}});
  m.add_constraint(std::make_unique<PolynomialConstraint>(ConstraintKind::ConvexQuadratic, Relation::Ge,
                                                          edge_name("thermal", f, t), std::move(g)));
}

void build_wspace_interior(ModelInstance& m, const Network& net, const BuildOptions& opts);

}  // namespace

ModelInstance build_wspace(const Network& net, const BuildOptions& opts, bool with_soc,
                           const std::vector<Bag>* bags) {
  check_validated(net);
  ModelInstance m;
  m.tier = with_soc ? RelaxationTier::Socp : RelaxationTier::Cycle;
  auto& reg = m.registry;

  for (const Bus& b : net.buses)
    reg.add(VarRole::BusW, b.id, -1, b.vmin * b.vmin, b.vmax * b.vmax,
            "w[" + std::to_string(b.id) + "]");

  // lifted pairs: branches plus decomposition fill-ins
  std::set<std::pair<int, int>> branch_pairs;
  for (const Branch& br : net.branches) branch_pairs.insert(std::minmax(br.from, br.to));
  std::set<std::pair<int, int>> fill_pairs;
  if (bags) {
    for (const Bag& bag : *bags)
      for (auto pr : bag.fillins) fill_pairs.insert(pr);
  }
  std::set<std::pair<int, int>> all_pairs = branch_pairs;
  all_pairs.insert(fill_pairs.begin(), fill_pairs.end());
  for (auto [a, b] : all_pairs) {
    double vv = net.bus(a).vmax * net.bus(b).vmax;
    // wR >= 0 is valid for branches because angle bounds live inside
    // (-90, 90) degrees; fill-in pairs carry no angle bound.
    double wr_lb = branch_pairs.count({a, b}) ? 0.0 : -vv;
    reg.add(VarRole::PairWR, a, b, wr_lb, vv, bus_pair_name("wR", a, b));
    reg.add(VarRole::PairWI, a, b, -vv, vv, bus_pair_name("wI", a, b));
  }

  for (const Branch& br : net.branches) {
    reg.add(VarRole::FlowP, br.from, br.to, -kInf, kInf, edge_name("p", br.from, br.to));
    reg.add(VarRole::FlowQ, br.from, br.to, -kInf, kInf, edge_name("q", br.from, br.to));
    reg.add(VarRole::FlowP, br.to, br.from, -kInf, kInf, edge_name("p", br.to, br.from));
    reg.add(VarRole::FlowQ, br.to, br.from, -kInf, kInf, edge_name("q", br.to, br.from));
  }
  for (size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    std::string suffix = "[g" + std::to_string(g) + "@" + std::to_string(gen.bus) + "]";
    reg.add(VarRole::GenP, static_cast<int>(g), gen.bus, gen.pmin, gen.pmax, "pg" + suffix);
    reg.add(VarRole::GenQ, static_cast<int>(g), gen.bus, gen.qmin, gen.qmax, "qg" + suffix);
  }

  for (const Branch& br : net.branches) {
    BranchAdmittance adm = branch_admittance(br, opts.extended_branch);
    add_flow_rows(m, br, br.from, br.to, adm.ff, adm.ft);
    add_flow_rows(m, br, br.to, br.from, adm.tt, adm.tf);
  }

  // nodal balance
  auto by_bus = gens_by_bus(net);
  for (const Bus& b : net.buses) {
    std::vector<std::pair<int, double>> pterms, qterms;
    for (int g : by_bus.count(b.id) ? by_bus[b.id] : std::vector<int>{}) {
      pterms.push_back({reg.gen_p(g), 1.0});
      qterms.push_back({reg.gen_q(g), 1.0});
    }
    for (const Branch& br : net.branches) {
      if (br.from == b.id) {
        pterms.push_back({reg.flow_p(br.from, br.to), -1.0});
        qterms.push_back({reg.flow_q(br.from, br.to), -1.0});
      }
      if (br.to == b.id) {
        pterms.push_back({reg.flow_p(br.to, br.from), -1.0});
        qterms.push_back({reg.flow_q(br.to, br.from), -1.0});
      }
    }
    if (opts.extended_branch && (b.gs != 0.0 || b.bs != 0.0)) {
      pterms.push_back({reg.w(b.id), -b.gs});
      qterms.push_back({reg.w(b.id), b.bs});
    }
    m.add_constraint(std::make_unique<LinearConstraint>(
        Relation::Eq, "kcl_p[" + std::to_string(b.id) + "]", std::move(pterms), -b.pd));
    m.add_constraint(std::make_unique<LinearConstraint>(
        Relation::Eq, "kcl_q[" + std::to_string(b.id) + "]", std::move(qterms), -b.qd));
  }

  // angle envelope and cone products per branch
  for (const Branch& br : net.branches) {
    auto [wr, wi] = reg.pair_vars(br.from, br.to);
    double sigma = VariableRegistry::orientation(br.from, br.to);
    m.add_constraint(std::make_unique<LinearConstraint>(
        Relation::Ge, edge_name("angle_lo", br.from, br.to),
        std::vector<std::pair<int, double>>{{wi, sigma}, {wr, -std::tan(br.angmin)}}, 0.0,
        ConstraintKind::LinearInequality));
    m.add_constraint(std::make_unique<LinearConstraint>(
        Relation::Ge, edge_name("angle_hi", br.from, br.to),
        std::vector<std::pair<int, double>>{{wr, std::tan(br.angmax)}, {wi, -sigma}}, 0.0,
        ConstraintKind::LinearInequality));
    if (with_soc) {
      int a = std::min(br.from, br.to), bb = std::max(br.from, br.to);
      Polynomial soc;
      soc.add_term(1.0, {{reg.w(a), 1}, {reg.w(bb), 1}});
      soc.add_term(-1.0, {{wr, 2}});
      soc.add_term(-1.0, {{wi, 2}});
      m.add_constraint(std::make_unique<PolynomialConstraint>(
          ConstraintKind::SecondOrderCone, Relation::Ge, bus_pair_name("soc", a, bb), std::move(soc)));
    }
  }

  for (const Branch& br : net.branches) {
    add_thermal_limit(m, br.from, br.to, br.rate_a);
    add_thermal_limit(m, br.to, br.from, br.rate_a);
  }

  add_objective(m, net);
  build_wspace_interior(m, net, opts);
  return m;
}

ModelInstance build_socp(const Network& net, const BuildOptions& opts) {
  ModelInstance m = build_wspace(net, opts, true, nullptr);
  m.tier = RelaxationTier::Socp;
  return m;
}

namespace {

void build_wspace_interior(ModelInstance& m, const Network& net, const BuildOptions& opts) {
  auto& reg = m.registry;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(reg.size());
  Eigen::VectorXd lb = reg.lower(), ub = reg.upper();

  for (const Bus& b : net.buses)
    x[reg.w(b.id)] = 0.5 * (b.vmin * b.vmin + b.vmax * b.vmax);
  auto theta = interior_angles(net);
  auto by_bus = gens_by_bus(net);

  double rho = 0.35;
  for (int attempt = 0; attempt < 60; ++attempt) {
    // lifted pairs at a damped rank-1 profile
    for (int v = 0; v < reg.size(); ++v) {
      const VariableInfo& info = reg.info(v);
      if (info.role != VarRole::PairWR) continue;
      int a = info.a, b = info.b;
      double phi = theta[a] - theta[b];
      double mag = rho * std::sqrt(x[reg.w(a)] * x[reg.w(b)]);
      auto [wr, wi] = reg.pair_vars(a, b);
      x[wr] = mag * std::cos(phi);
      x[wi] = mag * std::sin(phi);
    }
    // keep branch pairs strictly inside their angle envelope
    for (const Branch& br : net.branches) {
      double phi = theta[br.from] - theta[br.to];
      phi = clamp_strict(phi, br.angmin, br.angmax, 0.05);
      auto [wr, wi] = reg.pair_vars(br.from, br.to);
      double sigma = VariableRegistry::orientation(br.from, br.to);
      double mag = rho * std::sqrt(x[reg.w(br.from)] * x[reg.w(br.to)]);
      x[wr] = mag * std::cos(phi);
      x[wi] = sigma * mag * std::sin(phi);
    }
    // flows from the linear equations, pulled inside thermal limits
    for (const Branch& br : net.branches) {
      BranchAdmittance adm = branch_admittance(br, opts.extended_branch);
      auto assign = [&](int f, int t, std::complex<double> self, std::complex<double> mut) {
        auto [wr, wi] = reg.pair_vars(f, t);
        double sigma = VariableRegistry::orientation(f, t);
        double p = self.real() * x[reg.w(f)] + mut.real() * x[wr] + mut.imag() * sigma * x[wi];
        double q = -self.imag() * x[reg.w(f)] + mut.real() * sigma * x[wi] - mut.imag() * x[wr];
        if (br.rate_a > 0.0) {
          double norm = std::hypot(p, q);
          double cap = 0.9 * br.rate_a;
          if (norm > cap) {
            p *= cap / norm;
            q *= cap / norm;
          }
        }
        x[reg.flow_p(f, t)] = p;
        x[reg.flow_q(f, t)] = q;
      };
      assign(br.from, br.to, adm.ff, adm.ft);
      assign(br.to, br.from, adm.tt, adm.tf);
    }
    // generation from nodal surplus, clipped strictly inside bounds
    for (const Bus& b : net.buses) {
      auto it = by_bus.find(b.id);
      if (it == by_bus.end()) continue;
      double psum = 0, qsum = 0;
      for (const Branch& br : net.branches) {
        if (br.from == b.id) {
          psum += x[reg.flow_p(br.from, br.to)];
          qsum += x[reg.flow_q(br.from, br.to)];
        }
        if (br.to == b.id) {
          psum += x[reg.flow_p(br.to, br.from)];
          qsum += x[reg.flow_q(br.to, br.from)];
        }
      }
      double pg = b.pd + psum;
      double qg = b.qd + qsum;
      if (opts.extended_branch) {
        pg += b.gs * x[reg.w(b.id)];
        qg -= b.bs * x[reg.w(b.id)];
      }
      double share = 1.0 / static_cast<double>(it->second.size());
      for (int g : it->second) {
        int pv = reg.gen_p(g), qv = reg.gen_q(g);
        auto place = [&](int v, double want) {
          if (ub[v] - lb[v] <= 1e-12) {
            x[v] = lb[v];
          } else {
            x[v] = clamp_strict(want, lb[v], ub[v], 1e-3);
          }
        };
        place(pv, pg * share);
        place(qv, qg * share);
      }
    }

    double worst = kInf;
    for (size_t idx : m.inequality_indices)
      worst = std::min(worst, m.constraints[idx]->value(x));
    if (worst > 1e-9 || m.inequality_indices.empty()) break;
    rho *= 0.7;
  }
  m.interior = x;
}

}  // namespace

// ---------------------------------------------------------------------------
// AC model

ModelInstance build_ac(const Network& net, const BuildOptions& opts) {
  check_validated(net);
  ModelInstance m;
  m.tier = RelaxationTier::Ac;
  auto& reg = m.registry;

  for (const Bus& b : net.buses) {
    reg.add(VarRole::BusVm, b.id, -1, b.vmin, b.vmax, "v[" + std::to_string(b.id) + "]");
    reg.add(VarRole::BusTheta, b.id, -1, -kInf, kInf, "theta[" + std::to_string(b.id) + "]");
  }
  for (const Branch& br : net.branches) {
    reg.add(VarRole::FlowP, br.from, br.to, -kInf, kInf, edge_name("p", br.from, br.to));
    reg.add(VarRole::FlowQ, br.from, br.to, -kInf, kInf, edge_name("q", br.from, br.to));
    reg.add(VarRole::FlowP, br.to, br.from, -kInf, kInf, edge_name("p", br.to, br.from));
    reg.add(VarRole::FlowQ, br.to, br.from, -kInf, kInf, edge_name("q", br.to, br.from));
  }
  for (size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    std::string suffix = "[g" + std::to_string(g) + "@" + std::to_string(gen.bus) + "]";
    reg.add(VarRole::GenP, static_cast<int>(g), gen.bus, gen.pmin, gen.pmax, "pg" + suffix);
    reg.add(VarRole::GenQ, static_cast<int>(g), gen.bus, gen.qmin, gen.qmax, "qg" + suffix);
  }

  // angle reference at the lowest bus id
  m.add_constraint(std::make_unique<LinearConstraint>(
      Relation::Eq, "ref_angle[" + std::to_string(net.buses.front().id) + "]",
      std::vector<std::pair<int, double>>{{reg.theta(net.buses.front().id), 1.0}}, 0.0));

  for (const Branch& br : net.branches) {
    BranchAdmittance adm = branch_admittance(br, opts.extended_branch);
    auto add_pair = [&](int f, int t, std::complex<double> self, std::complex<double> mut) {
      // p = Re(self) v_f^2 + v_f v_t (Re(mut) cos(th) + Im(mut) sin(th))
      // q = -Im(self) v_f^2 + v_f v_t (Re(mut) sin(th) - Im(mut) cos(th))
      m.add_constraint(std::make_unique<AcFlowConstraint>(
          edge_name("acflow_p", f, t), reg.flow_p(f, t), reg.vm(f), reg.vm(t), reg.theta(f),
          reg.theta(t), self.real(), mut.real(), mut.imag()));
      m.add_constraint(std::make_unique<AcFlowConstraint>(
          edge_name("acflow_q", f, t), reg.flow_q(f, t), reg.vm(f), reg.vm(t), reg.theta(f),
          reg.theta(t), -self.imag(), -mut.imag(), mut.real()));
    };
    add_pair(br.from, br.to, adm.ff, adm.ft);
    add_pair(br.to, br.from, adm.tt, adm.tf);
  }

  auto by_bus = gens_by_bus(net);
  for (const Bus& b : net.buses) {
    bool shunt = opts.extended_branch && (b.gs != 0.0 || b.bs != 0.0);
    Polynomial pbal(-b.pd), qbal(-b.qd);
    if (auto it = by_bus.find(b.id); it != by_bus.end()) {
      for (int g : it->second) {
        pbal += Polynomial::variable(reg.gen_p(g));
        qbal += Polynomial::variable(reg.gen_q(g));
      }
    }
    for (const Branch& br : net.branches) {
      if (br.from == b.id) {
        pbal -= Polynomial::variable(reg.flow_p(br.from, br.to));
        qbal -= Polynomial::variable(reg.flow_q(br.from, br.to));
      }
      if (br.to == b.id) {
        pbal -= Polynomial::variable(reg.flow_p(br.to, br.from));
        qbal -= Polynomial::variable(reg.flow_q(br.to, br.from));
      }
    }
    if (shunt) {
      pbal.add_term(-b.gs, {{reg.vm(b.id), 2}});
      qbal.add_term(b.bs, {{reg.vm(b.id), 2}});
    }
    ConstraintKind kind = shunt ? ConstraintKind::AcTrigonometric : ConstraintKind::LinearEquality;
    m.add_constraint(std::make_unique<PolynomialConstraint>(
        kind, Relation::Eq, "kcl_p[" + std::to_string(b.id) + "]", std::move(pbal)));
    m.add_constraint(std::make_unique<PolynomialConstraint>(
        kind, Relation::Eq, "kcl_q[" + std::to_string(b.id) + "]", std::move(qbal)));
  }

  for (const Branch& br : net.branches) {
    int tf = reg.theta(br.from), tt = reg.theta(br.to);
    m.add_constraint(std::make_unique<LinearConstraint>(
        Relation::Ge, edge_name("angle_lo", br.from, br.to),
        std::vector<std::pair<int, double>>{{tf, 1.0}, {tt, -1.0}}, -br.angmin,
        ConstraintKind::LinearInequality));
    m.add_constraint(std::make_unique<LinearConstraint>(
        Relation::Ge, edge_name("angle_hi", br.from, br.to),
        std::vector<std::pair<int, double>>{{tf, -1.0}, {tt, 1.0}}, br.angmax,
        ConstraintKind::LinearInequality));
    add_thermal_limit(m, br.from, br.to, br.rate_a);
    add_thermal_limit(m, br.to, br.from, br.rate_a);
  }

  add_objective(m, net);

  // flat start: midpoint magnitudes, propagated midpoint angles (zero in the
  // common case), flows consistent with them, generation clipped into bounds
  Eigen::VectorXd x = Eigen::VectorXd::Zero(reg.size());
  Eigen::VectorXd lb = reg.lower(), ub = reg.upper();
  auto theta = interior_angles(net);
  for (const Bus& b : net.buses) {
    x[reg.vm(b.id)] = 0.5 * (b.vmin + b.vmax);
    x[reg.theta(b.id)] = theta[b.id];
  }
  for (const Branch& br : net.branches) {
    BranchAdmittance adm = branch_admittance(br, opts.extended_branch);
    auto assign = [&](int f, int t, std::complex<double> self, std::complex<double> mut) {
      double vf = x[reg.vm(f)], vt = x[reg.vm(t)];
      double th = x[reg.theta(f)] - x[reg.theta(t)];
      double p = self.real() * vf * vf + vf * vt * (mut.real() * std::cos(th) + mut.imag() * std::sin(th));
      double q = -self.imag() * vf * vf + vf * vt * (mut.real() * std::sin(th) - mut.imag() * std::cos(th));
      if (br.rate_a > 0.0) {
        double norm = std::hypot(p, q);
        double cap = 0.9 * br.rate_a;
        if (norm > cap) {
          p *= cap / norm;
          q *= cap / norm;
        }
      }
      x[reg.flow_p(f, t)] = p;
      x[reg.flow_q(f, t)] = q;
    };
    assign(br.from, br.to, adm.ff, adm.ft);
    assign(br.to, br.from, adm.tt, adm.tf);
  }
  for (const Bus& b : net.buses) {
    auto it = by_bus.find(b.id);
    if (it == by_bus.end()) continue;
    double psum = 0, qsum = 0;
    for (const Branch& br : net.branches) {
      if (br.from == b.id) {
        psum += x[reg.flow_p(br.from, br.to)];
        qsum += x[reg.flow_q(br.from, br.to)];
      }
      if (br.to == b.id) {
        psum += x[reg.flow_p(br.to, br.from)];
        qsum += x[reg.flow_q(br.to, br.from)];
      }
    }
    double pg = b.pd + psum, qg = b.qd + qsum;
    if (opts.extended_branch) {
      pg += b.gs * x[reg.vm(b.id)] * x[reg.vm(b.id)];
      qg -= b.bs * x[reg.vm(b.id)] * x[reg.vm(b.id)];
    }
    double share = 1.0 / static_cast<double>(it->second.size());
    for (int g : it->second) {
      auto place = [&](int v, double want) {
        x[v] = (ub[v] - lb[v] <= 1e-12) ? lb[v] : clamp_strict(want, lb[v], ub[v], 1e-3);
      };
      place(reg.gen_p(g), pg * share);
      place(reg.gen_q(g), qg * share);
    }
  }
  m.interior = x;
  return m;
}

void add_objective(ModelInstance& model, const Network& net) {
  Objective obj;
  for (size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    if (gen.c2 < 0.0)
      throw std::invalid_argument("generator at bus " + std::to_string(gen.bus) +
                                  ": negative quadratic cost breaks convexity");
    int pv = model.registry.gen_p(static_cast<int>(g));
    if (pv < 0) throw std::logic_error("generation variable missing for objective");
    obj.constant += gen.c0;
    if (gen.c1 != 0.0) obj.linear.push_back({pv, gen.c1});
    if (gen.c2 != 0.0) obj.quadratic.push_back({pv, gen.c2});
  }
  model.objective = std::move(obj);
}

// ---------------------------------------------------------------------------
// Cycle constraints

namespace {

ComplexPolynomial pair_poly(const VariableRegistry& reg, int f, int t) {
  auto [wr, wi] = reg.pair_vars(f, t);
  double sigma = VariableRegistry::orientation(f, t);
  return {Polynomial::variable(wr), Polynomial::variable(wi) * sigma};
}

}  // namespace

std::pair<std::unique_ptr<Constraint>, std::unique_ptr<Constraint>> build_cycle_constraint(
    const VariableRegistry& registry, const Cycle& cycle, int ref, const PathTable& table) {
  if (!cycle.contains(ref)) throw std::invalid_argument("reference node is not on the cycle");
  if (table.source != ref) throw std::invalid_argument("path table was built for a different source");

  struct Term {
    ComplexPolynomial num;
    int denom_bus = -1;
  };
  std::vector<Term> terms;

  for (auto [i, j] : cycle.edges) {
    const auto& path = table.paths.at(j);
    // Magnitude factors that keep every term on the same rank-1 prefactor:
    // the full separator union minus the path's interior nodes, minus the
    // reference unless this is the reference's own term. Removing the head j
    // as well (as if it were a path node) breaks the telescoping whenever a
    // cycle node sits in another path's separator set.
    std::set<int> wset = table.union_separator;
    for (int n : table.separators.at(j)) wset.erase(n);
    if (j != ref) wset.erase(ref);

    // The path ends at j; when its final hop is the cycle edge itself the
    // conjugate pair product collapses the |W_ij|^2 factor to w_i*w_j on the
    // rank-1 surface, cancelling the denominator.
    bool fold = !path.empty() && std::minmax(path.back().first, path.back().second) ==
                                     std::minmax(i, j);
    ComplexPolynomial acc = ComplexPolynomial::one();
    size_t limit = fold ? path.size() - 1 : path.size();
    for (size_t k = 0; k < limit; ++k)
      acc = acc * pair_poly(registry, path[k].first, path[k].second).conj();

    int denom = -1;
    ComplexPolynomial core;
    if (fold) {
      int wi_var = registry.w(i);
      core = ComplexPolynomial::real(Polynomial::variable(wi_var)) - pair_poly(registry, i, j).conj();
    } else {
      core = pair_poly(registry, i, j) - ComplexPolynomial::real(Polynomial::variable(registry.w(j)));
      denom = j;
      if (wset.count(j)) {
        // the term's own magnitude factor cancels against the denominator
        wset.erase(j);
        denom = -1;
      }
    }
    for (int s : wset) acc = acc * ComplexPolynomial::real(Polynomial::variable(registry.w(s)));
    terms.push_back({acc * core, denom});
  }

  std::set<int> denominators;
  for (const Term& t : terms)
    if (t.denom_bus >= 0) denominators.insert(t.denom_bus);

  ComplexPolynomial total;
  for (const Term& t : terms) {
    ComplexPolynomial c = t.num;
    for (int d : denominators)
      if (d != t.denom_bus) c = c * ComplexPolynomial::real(Polynomial::variable(registry.w(d)));
    total = total + c;
  }

  std::string tag = "cycle[";
  auto nodes = cycle.nodes();
  for (size_t k = 0; k < nodes.size(); ++k) tag += (k ? "," : "") + std::to_string(nodes[k]);
  tag += "]ref" + std::to_string(ref);
  auto re = std::make_unique<PolynomialConstraint>(ConstraintKind::CyclePolynomial, Relation::Eq,
                                                   tag + ":re", std::move(total.re));
  auto im = std::make_unique<PolynomialConstraint>(ConstraintKind::CyclePolynomial, Relation::Eq,
                                                   tag + ":im", std::move(total.im));
  return {std::move(re), std::move(im)};
}

// ---------------------------------------------------------------------------
// Lifting and interior maintenance

Eigen::VectorXd lift_voltages(const Network& net, const VariableRegistry& registry,
                              const std::map<int, double>& vm, const std::map<int, double>& theta,
                              const BuildOptions& opts) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(registry.size());
  for (const Bus& b : net.buses) {
    double v = vm.at(b.id);
    if (int w = registry.w(b.id); w >= 0) x[w] = v * v;
    if (int vv = registry.vm(b.id); vv >= 0) x[vv] = v;
    if (int tv = registry.theta(b.id); tv >= 0) x[tv] = theta.at(b.id);
  }
  for (int v = 0; v < registry.size(); ++v) {
    const VariableInfo& info = registry.info(v);
    if (info.role != VarRole::PairWR) continue;
    double mag = vm.at(info.a) * vm.at(info.b);
    double phi = theta.at(info.a) - theta.at(info.b);
    auto [wr, wi] = registry.pair_vars(info.a, info.b);
    x[wr] = mag * std::cos(phi);
    x[wi] = mag * std::sin(phi);
  }
  for (const Branch& br : net.branches) {
    BranchAdmittance adm = branch_admittance(br, opts.extended_branch);
    auto assign = [&](int f, int t, std::complex<double> self, std::complex<double> mut) {
      double vf = vm.at(f), vt = vm.at(t);
      double th = theta.at(f) - theta.at(t);
      int p = registry.flow_p(f, t), q = registry.flow_q(f, t);
      if (p < 0) return;
      x[p] = self.real() * vf * vf + vf * vt * (mut.real() * std::cos(th) + mut.imag() * std::sin(th));
      x[q] = -self.imag() * vf * vf + vf * vt * (mut.real() * std::sin(th) - mut.imag() * std::cos(th));
    };
    assign(br.from, br.to, adm.ff, adm.ft);
    assign(br.to, br.from, adm.tt, adm.tf);
  }
  auto by_bus = gens_by_bus(net);
  for (const Bus& b : net.buses) {
    auto it = by_bus.find(b.id);
    if (it == by_bus.end()) continue;
    double psum = 0, qsum = 0;
    for (const Branch& br : net.branches) {
      if (br.from == b.id) {
        psum += x[registry.flow_p(br.from, br.to)];
        qsum += x[registry.flow_q(br.from, br.to)];
      }
      if (br.to == b.id) {
        psum += x[registry.flow_p(br.to, br.from)];
        qsum += x[registry.flow_q(br.to, br.from)];
      }
    }
    double v2 = vm.at(b.id) * vm.at(b.id);
    double pg = b.pd + psum, qg = b.qd + qsum;
    if (opts.extended_branch) {
      pg += b.gs * v2;
      qg -= b.bs * v2;
    }
    double share = 1.0 / static_cast<double>(it->second.size());
    for (int g : it->second) {
      x[registry.gen_p(g)] = pg * share;
      x[registry.gen_q(g)] = qg * share;
    }
  }
  return x;
}

void shrink_interior(ModelInstance& model) {
  auto violated = [&model](const Eigen::VectorXd& x) {
    for (size_t idx : model.inequality_indices)
      if (model.constraints[idx]->value(x) <= 1e-10) return true;
    return false;
  };
  if (!violated(model.interior)) return;
  Eigen::VectorXd x = model.interior;
  for (int round = 0; round < 200 && violated(x); ++round) {
    for (int v = 0; v < model.registry.size(); ++v) {
      VarRole role = model.registry.info(v).role;
      if (role == VarRole::PairWR || role == VarRole::PairWI) x[v] *= 0.8;
    }
  }
  model.interior = x;
}

}  // namespace opf
