#ifndef OPFRELAX_BUILDERS_HPP
#define OPFRELAX_BUILDERS_HPP

#include <complex>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "opfrelax/graph.hpp"
#include "opfrelax/model.hpp"
#include "opfrelax/network.hpp"

namespace opf {

struct BuildOptions {
  // When set, line charging, off-nominal taps, phase shifts and bus shunts
  // are honored in the flow equations; by default the plain series line model
  // is used and those parameters are ignored.
  bool extended_branch = false;
};

// Two-port admittance of a branch as seen from each end.
struct BranchAdmittance {
  std::complex<double> ff, ft, tf, tt;
};
BranchAdmittance branch_admittance(const Branch& br, bool extended);

// Non-convex polar AC model: voltage magnitudes/angles, directed flows,
// generation; trigonometric flow equations, balance, limits.
ModelInstance build_ac(const Network& net, const BuildOptions& opts = {});

// Second-order-cone relaxation in the lifted W space: linear flow equations,
// bounds, tangent angle envelope, one rotated-cone product per branch.
ModelInstance build_socp(const Network& net, const BuildOptions& opts = {});

// Shared W-space builder. `with_soc` controls the per-branch cone products;
// `bags` (when given) registers lifted pair variables for decomposition
// fill-in pairs so determinant cuts can be attached later.
ModelInstance build_wspace(const Network& net, const BuildOptions& opts, bool with_soc,
                           const std::vector<Bag>* bags);

// Voltage-law closure for one cycle, projected to the lifted space with
// denominators cleared; returns the real and imaginary polynomial equalities.
// Throws std::out_of_range if a needed pair variable is not registered.
std::pair<std::unique_ptr<Constraint>, std::unique_ptr<Constraint>> build_cycle_constraint(
    const VariableRegistry& registry, const Cycle& cycle, int ref, const PathTable& table);

// Attach the quadratic generation-cost objective. Throws
// std::invalid_argument on a negative quadratic coefficient.
void add_objective(ModelInstance& model, const Network& net);

// Map a voltage assignment (magnitude and angle per bus id) onto a W-space
// registry: squared magnitudes, pair products (branches and fill-ins), flows
// from the linear equations, generation from nodal balance (split equally
// among a bus's generators). Entries without a natural value (none here)
// default to zero.
Eigen::VectorXd lift_voltages(const Network& net, const VariableRegistry& registry,
                              const std::map<int, double>& vm, const std::map<int, double>& theta,
                              const BuildOptions& opts = {});

// Pull the interior point's lifted pair entries toward zero until `model`'s
// inequality constraints all hold strictly; used after adding cuts.
void shrink_interior(ModelInstance& model);

}  // namespace opf

#endif  // OPFRELAX_BUILDERS_HPP
