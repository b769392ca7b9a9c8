#ifndef OPFRELAX_ORCHESTRATOR_HPP
#define OPFRELAX_ORCHESTRATOR_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opfrelax/model.hpp"
#include "opfrelax/network.hpp"
#include "opfrelax/solver.hpp"

namespace opf {

struct RunConfig {
  std::string case_path;
  RelaxationTier tier = RelaxationTier::Socp;
  bool lazy = false;          // generate determinant cuts by separation
  int max_minor_dim = 3;      // largest determinant cut dimension
  double cut_tol = 1e-6;      // separation violation threshold
  int cuts_per_round = 10;
  int max_rounds = 20;
  bool extended_branch = false;
  bool all_ref_nodes = false;  // cycle equalities from every reference node
  SolveOptions solver;
  enum class Format { Table, Json };
  Format format = Format::Table;
  unsigned seed = 0;  // reserved for randomized test tooling; the pipeline is deterministic
};

struct CutRecord {
  std::vector<int> nodes;
  std::vector<int> bag;
  int dim = 0;
  int round = 0;          // 0 = added eagerly at build time
  double violation = 0.0;  // determinant value at the separation point
  bool prerequisite = false;

  bool operator==(const CutRecord&) const = default;
};

struct GapReport {
  std::string case_name;
  std::string tier;
  bool lazy = false;
  std::string heuristic_status;
  std::string relaxation_status;  // empty for the plain AC tier
  double heuristic_objective = 0.0;
  std::optional<double> relaxation_objective;
  std::optional<double> gap_percent;  // 100 * (heuristic - relaxation) / heuristic
  std::map<int, int> cut_counts;      // dimension -> active cuts
  int separation_rounds = 0;
  std::map<std::string, double> runtime_s;  // per phase plus "total"
  bool numerical_warning = false;
  std::vector<CutRecord> cuts;

  bool operator==(const GapReport&) const = default;

  std::string to_json() const;
  static GapReport from_json(std::string_view text);
};

// Full pipeline: parse -> analyze -> build -> solve (lazily separating cuts
// when configured) -> gap. Errors carry the failing phase in their message.
GapReport run(const RunConfig& config);
// Same, for an already parsed network (case_path used as the report label).
GapReport run(const RunConfig& config, const Network& net);

std::string report(const GapReport& gap, RunConfig::Format format);

}  // namespace opf

#endif  // OPFRELAX_ORCHESTRATOR_HPP
