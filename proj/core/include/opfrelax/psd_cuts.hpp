#ifndef OPFRELAX_PSD_CUTS_HPP
#define OPFRELAX_PSD_CUTS_HPP

#include <memory>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "opfrelax/graph.hpp"
#include "opfrelax/model.hpp"

namespace opf {

// One principal submatrix of a bag's Hermitian lifted matrix, identified by
// the sorted bus subset.
struct MinorIndex {
  std::vector<int> bag;     // owning bag's nodes, sorted
  std::vector<int> subset;  // sorted, non-empty, subset of bag
};

struct DeterminantCut {
  MinorIndex minor;
  double violation = 0.0;  // determinant value at the separation point
  bool prerequisite = false;
};

// All node subsets of size 1..max_dim, ordered by (size, lexicographic).
std::vector<MinorIndex> enumerate_minors(const Bag& bag, int max_dim);

// Hermitian submatrix of the lifted variables at `point`. Diagonal entries
// are the squared-magnitude variables; off-diagonal pairs come from the
// registered pair variables and are zero when a pair is not registered.
Eigen::MatrixXcd hermitian_submatrix(const std::vector<int>& nodes, const VariableRegistry& registry,
                                     const Eigen::VectorXd& point);

// Determinant of the minor's submatrix: hardcoded expansions for dimensions
// 1-3, complex LU above. The result of a Hermitian determinant is real; the
// imaginary part is checked to vanish.
double det_value(const MinorIndex& minor, const VariableRegistry& registry,
                 const Eigen::VectorXd& point);

// Exact determinant gradient via the adjugate, mapped to the real variables
// (w_i, wR_ab, wI_ab) of the minor; pairs fixed at structural zero do not
// appear.
std::vector<std::pair<int, double>> det_gradient(const MinorIndex& minor,
                                                 const VariableRegistry& registry,
                                                 const Eigen::VectorXd& point);

// Symbolic expansion of det(W_subset) over the registered real variables.
// The imaginary part cancels identically for Hermitian structure.
Polynomial det_polynomial(const std::vector<int>& nodes, const VariableRegistry& registry);

// det(W_subset) >= 0 as a model constraint.
std::unique_ptr<Constraint> make_determinant_constraint(const std::vector<int>& nodes,
                                                        const VariableRegistry& registry);

// Lazy separation: scan minors of dimension 3..max_dim over all bags at
// `point`, most violated first (ties by subset), one entry per subset. Each
// violated cut is followed by its missing lower-dimensional prerequisites
// (subsets of size >= 2 not in `active`); dimension-1 minors are covered by
// the variable bounds. `active` holds node subsets whose cuts are already in
// the model; branch pairs belong there from the start.
std::vector<DeterminantCut> separate(const std::vector<Bag>& bags, const VariableRegistry& registry,
                                     const Eigen::VectorXd& point, double tol, int max_dim,
                                     const std::set<std::vector<int>>& active = {});

// Ground-truth PSD test through a dense Hermitian eigensolver; test oracle,
// not used on the solve path.
bool psd_check_oracle(const Bag& bag, const VariableRegistry& registry, const Eigen::VectorXd& point,
                      double tol);

}  // namespace opf

#endif  // OPFRELAX_PSD_CUTS_HPP
