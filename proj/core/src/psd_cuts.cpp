#include "opfrelax/psd_cuts.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace opf {

namespace {

void subsets_of_size(const std::vector<int>& nodes, int k, std::vector<std::vector<int>>& out) {
  std::vector<int> pick(k);
  // lexicographic combinations
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  const int n = static_cast<int>(nodes.size());
  while (true) {
    for (int i = 0; i < k; ++i) pick[i] = nodes[idx[i]];
    out.push_back(pick);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::complex<double> pair_value(const VariableRegistry& reg, const Eigen::VectorXd& x, int from,
                                int to) {
  auto [wr, wi] = reg.pair_vars(from, to);
  double sigma = VariableRegistry::orientation(from, to);
  return {x[wr], sigma * x[wi]};
}

// Entry (r,c) of the symbolic Hermitian matrix over `nodes`.
ComplexPolynomial entry_poly(const std::vector<int>& nodes, const VariableRegistry& reg, int r, int c) {
  if (r == c) {
    int w = reg.w(nodes[r]);
    if (w < 0) throw std::out_of_range("w variable not registered for bus " + std::to_string(nodes[r]));
    return ComplexPolynomial::real(Polynomial::variable(w));
  }
  if (!reg.has_pair(nodes[r], nodes[c])) return {};  // structural zero off the graph
  auto [wr, wi] = reg.pair_vars(nodes[r], nodes[c]);
  double sigma = VariableRegistry::orientation(nodes[r], nodes[c]);
  return {Polynomial::variable(wr), Polynomial::variable(wi) * sigma};
}

// Laplace expansion over explicit row/column index lists.
ComplexPolynomial det_poly_general(const std::vector<int>& nodes, const VariableRegistry& reg,
                                   const std::vector<int>& rows, const std::vector<int>& cols) {
  if (rows.size() == 1) return entry_poly(nodes, reg, rows[0], cols[0]);
  ComplexPolynomial det;
  double sign = 1.0;
  for (size_t c = 0; c < cols.size(); ++c) {
    ComplexPolynomial a = entry_poly(nodes, reg, rows[0], cols[c]);
    if (!(a.re.is_zero() && a.im.is_zero())) {
      std::vector<int> sub_rows(rows.begin() + 1, rows.end());
      std::vector<int> sub_cols;
      for (size_t k = 0; k < cols.size(); ++k)
        if (k != c) sub_cols.push_back(cols[k]);
      det = det + a * det_poly_general(nodes, reg, sub_rows, sub_cols) * sign;
    }
    sign = -sign;
  }
  return det;
}

}  // namespace

std::vector<MinorIndex> enumerate_minors(const Bag& bag, int max_dim) {
  if (max_dim > static_cast<int>(bag.nodes.size()))
    throw std::invalid_argument("max_dim exceeds bag size");
  std::vector<MinorIndex> out;
  for (int k = 1; k <= max_dim; ++k) {
    std::vector<std::vector<int>> subsets;
    subsets_of_size(bag.nodes, k, subsets);
    for (auto& s : subsets) out.push_back({bag.nodes, std::move(s)});
  }
  return out;
}

Eigen::MatrixXcd hermitian_submatrix(const std::vector<int>& nodes, const VariableRegistry& registry,
                                     const Eigen::VectorXd& point) {
  const int k = static_cast<int>(nodes.size());
  Eigen::MatrixXcd m(k, k);
  for (int r = 0; r < k; ++r) {
    int w = registry.w(nodes[r]);
    if (w < 0) throw std::out_of_range("w variable not registered for bus " + std::to_string(nodes[r]));
    m(r, r) = point[w];
    for (int c = r + 1; c < k; ++c) {
      std::complex<double> v = registry.has_pair(nodes[r], nodes[c])
                                   ? pair_value(registry, point, nodes[r], nodes[c])
                                   : std::complex<double>(0.0, 0.0);
      m(r, c) = v;
      m(c, r) = std::conj(v);
    }
  }
  return m;
}

double det_value(const MinorIndex& minor, const VariableRegistry& registry,
                 const Eigen::VectorXd& point) {
  Eigen::MatrixXcd m = hermitian_submatrix(minor.subset, registry, point);
  const int k = static_cast<int>(m.rows());
  std::complex<double> det;
  switch (k) {
    case 1:
      det = m(0, 0);
      break;
    case 2:
      det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
      break;
    case 3:
      det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
            m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
            m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
      break;
    default:
      det = Eigen::PartialPivLU<Eigen::MatrixXcd>(m).determinant();
  }
  if (std::abs(det.imag()) > 1e-12 * std::max(1.0, std::abs(det.real())))
    throw std::logic_error("Hermitian determinant has a non-real value");
  return det.real();
}

std::vector<std::pair<int, double>> det_gradient(const MinorIndex& minor,
                                                 const VariableRegistry& registry,
                                                 const Eigen::VectorXd& point) {
  const auto& nodes = minor.subset;
  const int k = static_cast<int>(nodes.size());
  Eigen::MatrixXcd m = hermitian_submatrix(nodes, registry, point);

  // adjugate via cofactors: adj(m)(i,j) = (-1)^(i+j) * det(m without row j, col i)
  Eigen::MatrixXcd adj(k, k);
  if (k == 1) {
    adj(0, 0) = 1.0;
  } else {
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) {
        Eigen::MatrixXcd sub(k - 1, k - 1);
        for (int i = 0, si = 0; i < k; ++i) {
          if (i == c) continue;  // drop row c
          for (int j = 0, sj = 0; j < k; ++j) {
            if (j == r) continue;  // drop col r
            sub(si, sj++) = m(i, j);
          }
          ++si;
        }
        adj(r, c) = (((r + c) % 2) ? -1.0 : 1.0) * sub.determinant();
      }
    }
  }

  std::vector<std::pair<int, double>> grad;
  for (int r = 0; r < k; ++r) {
    grad.push_back({registry.w(nodes[r]), adj(r, r).real()});
  }
  for (int r = 0; r < k; ++r) {
    for (int c = r + 1; c < k; ++c) {
      if (!registry.has_pair(nodes[r], nodes[c])) continue;
      auto [wr, wi] = registry.pair_vars(nodes[r], nodes[c]);
      double sigma = VariableRegistry::orientation(nodes[r], nodes[c]);
      grad.push_back({wr, 2.0 * adj(r, c).real()});
      grad.push_back({wi, 2.0 * sigma * adj(r, c).imag()});
    }
  }
  std::sort(grad.begin(), grad.end());
  return grad;
}

Polynomial det_polynomial(const std::vector<int>& nodes, const VariableRegistry& registry) {
  std::vector<int> idx(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) idx[i] = static_cast<int>(i);
  ComplexPolynomial det = det_poly_general(nodes, registry, idx, idx);
  if (!det.im.is_zero()) throw std::logic_error("Hermitian determinant expansion has imaginary part");
  return det.re;
}

std::unique_ptr<Constraint> make_determinant_constraint(const std::vector<int>& nodes,
                                                        const VariableRegistry& registry) {
  std::string tag = "det" + std::to_string(nodes.size()) + "[";
  for (size_t i = 0; i < nodes.size(); ++i) tag += (i ? "," : "") + std::to_string(nodes[i]);
  tag += "]";
  return std::make_unique<PolynomialConstraint>(ConstraintKind::DeterminantPolynomial, Relation::Ge,
                                                tag, det_polynomial(nodes, registry));
}

std::vector<DeterminantCut> separate(const std::vector<Bag>& bags, const VariableRegistry& registry,
                                     const Eigen::VectorXd& point, double tol, int max_dim,
                                     const std::set<std::vector<int>>& active) {
  // one candidate per node subset, regardless of how many bags share it
  std::map<std::vector<int>, DeterminantCut> violated;
  for (const Bag& bag : bags) {
    int top = std::min<int>(max_dim, static_cast<int>(bag.nodes.size()));
    for (int k = 3; k <= top; ++k) {
      std::vector<std::vector<int>> subsets;
      subsets_of_size(bag.nodes, k, subsets);
      for (auto& s : subsets) {
        if (active.count(s) || violated.count(s)) continue;
        double det = det_value({bag.nodes, s}, registry, point);
        if (det < -tol) violated.emplace(s, DeterminantCut{{bag.nodes, s}, det, false});
      }
    }
  }

  std::vector<DeterminantCut> order;
  for (auto& [s, cut] : violated) order.push_back(cut);
  std::sort(order.begin(), order.end(), [](const DeterminantCut& a, const DeterminantCut& b) {
    if (a.violation != b.violation) return a.violation < b.violation;  // most violated first
    return a.minor.subset < b.minor.subset;
  });

  // bundle missing prerequisites (all strictly smaller subsets of size >= 2)
  std::vector<DeterminantCut> out;
  std::set<std::vector<int>> emitted;
  for (const DeterminantCut& cut : order) {
    out.push_back(cut);
    emitted.insert(cut.minor.subset);
    const auto& s = cut.minor.subset;
    for (int k = 2; k < static_cast<int>(s.size()); ++k) {
      std::vector<std::vector<int>> subs;
      subsets_of_size(s, k, subs);
      for (auto& sub : subs) {
        if (active.count(sub) || emitted.count(sub)) continue;
        double det = det_value({cut.minor.bag, sub}, registry, point);
        out.push_back({{cut.minor.bag, sub}, det, true});
        emitted.insert(sub);
      }
    }
  }
  return out;
}

bool psd_check_oracle(const Bag& bag, const VariableRegistry& registry, const Eigen::VectorXd& point,
                      double tol) {
  Eigen::MatrixXcd m = hermitian_submatrix(bag.nodes, registry, point);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace opf
