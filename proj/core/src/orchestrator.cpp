#include "opfrelax/orchestrator.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "opfrelax/builders.hpp"
#include "opfrelax/graph.hpp"
#include "opfrelax/psd_cuts.hpp"

namespace opf {

namespace {

using Clock = std::chrono::steady_clock;

struct PhaseTimer {
  std::map<std::string, double>& times;
  std::string name;
  Clock::time_point start = Clock::now();
  PhaseTimer(std::map<std::string, double>& t, std::string n) : times(t), name(std::move(n)) {}
  ~PhaseTimer() { times[name] += std::chrono::duration<double>(Clock::now() - start).count(); }
};

[[noreturn]] void fail_phase(const char* phase, const std::exception& e) {
  throw std::runtime_error(std::string(phase) + " phase: " + e.what());
}

}  // namespace

GapReport run(const RunConfig& config) {
  std::map<std::string, double> times;
  Network net;
  try {
    PhaseTimer timer(times, "parse");
    std::ifstream in(config.case_path);
    if (!in) throw std::runtime_error("cannot open " + config.case_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    net = parse_case(buffer.str());
    auto diags = validate_network(net);
    if (!diags.empty()) throw std::runtime_error("invalid network: " + diags.front());
  } catch (const std::exception& e) {
    fail_phase("parse", e);
  }
  GapReport gap = run(config, net);
  for (auto& [k, v] : times) gap.runtime_s[k] += v;
  gap.runtime_s["total"] += times["parse"];
  return gap;
}

GapReport run(const RunConfig& config, const Network& net) {
  auto t_begin = Clock::now();
  GapReport out;
  out.case_name = config.case_path;
  out.tier = to_string(config.tier);
  out.lazy = config.lazy;

  BuildOptions bopts;
  bopts.extended_branch = config.extended_branch;

  // graph analysis
  TreeDecomposition td;
  std::vector<Cycle> cycles;
  try {
    PhaseTimer timer(out.runtime_s, "graph");
    if (config.tier == RelaxationTier::Psdp) td = tree_decomposition(net);
    if (config.tier == RelaxationTier::Cycle || config.tier == RelaxationTier::SocpCycle)
      cycles = cycle_basis(net);
  } catch (const std::exception& e) {
    fail_phase("graph", e);
  }

  // models
  ModelInstance ac;
  ModelInstance relax;
  bool has_relaxation = config.tier != RelaxationTier::Ac;
  try {
    PhaseTimer timer(out.runtime_s, "build");
    ac = build_ac(net, bopts);
    switch (config.tier) {
      case RelaxationTier::Ac:
        break;
      case RelaxationTier::Socp:
        relax = build_socp(net, bopts);
        break;
      case RelaxationTier::Psdp:
        relax = build_wspace(net, bopts, true, &td.bags);
        relax.tier = RelaxationTier::Psdp;
        break;
      case RelaxationTier::Cycle:
      case RelaxationTier::SocpCycle: {
        relax = build_wspace(net, bopts, config.tier == RelaxationTier::SocpCycle, nullptr);
        relax.tier = config.tier;
        for (const Cycle& cycle : cycles) {
          auto nodes = cycle.nodes();
          std::vector<int> refs;
          if (config.all_ref_nodes)
            refs = nodes;
          else
            refs.push_back(nodes.front());
          for (int r : refs) {
            PathTable table = path_table(net, cycle, r);
            auto [re, im] = build_cycle_constraint(relax.registry, cycle, r, table);
            relax.add_constraint(std::move(re));
            relax.add_constraint(std::move(im));
          }
        }
        break;
      }
    }
  } catch (const std::exception& e) {
    fail_phase("build", e);
  }

  // heuristic upper bound
  SolveResult heur;
  try {
    PhaseTimer timer(out.runtime_s, "solve");
    heur = solve_ac_heuristic(ac, config.solver);
  } catch (const std::exception& e) {
    fail_phase("solve", e);
  }
  out.heuristic_status = to_string(heur.status);
  out.heuristic_objective = heur.objective;
  out.numerical_warning |= heur.numerical_warning || heur.status != SolveStatus::Optimal;

  if (has_relaxation) {
    SolveResult res;
    std::set<std::vector<int>> active;
    for (const Branch& br : net.branches) {
      auto pr = std::minmax(br.from, br.to);
      active.insert({pr.first, pr.second});
    }

    try {
      if (config.tier == RelaxationTier::Psdp && !config.lazy) {
        // eager: every minor of every bag up to the dimension cap
        PhaseTimer timer(out.runtime_s, "build");
        for (const Bag& bag : td.bags) {
          int top = std::min<int>(config.max_minor_dim, static_cast<int>(bag.nodes.size()));
          for (const MinorIndex& minor : enumerate_minors(bag, top)) {
            if (minor.subset.size() < 2 || active.count(minor.subset)) continue;
            relax.add_constraint(make_determinant_constraint(minor.subset, relax.registry));
            active.insert(minor.subset);
            int dim = static_cast<int>(minor.subset.size());
            out.cut_counts[dim] += 1;
            out.cuts.push_back({minor.subset, minor.bag, dim, 0, 0.0, dim == 2});
          }
        }
      }
    } catch (const std::exception& e) {
      fail_phase("build", e);
    }

    try {
      {
        PhaseTimer timer(out.runtime_s, "solve");
        res = solve(relax, config.solver);
      }
      if (config.tier == RelaxationTier::Psdp && config.lazy) {
        for (int round = 1; round <= config.max_rounds; ++round) {
          std::vector<DeterminantCut> found;
          {
            PhaseTimer timer(out.runtime_s, "separate");
            found = separate(td.bags, relax.registry, res.point, config.cut_tol,
                             config.max_minor_dim, active);
          }
          if (found.empty()) break;
          out.separation_rounds = round;

          int added_parents = 0;
          for (const DeterminantCut& cut : found) {
            if (!cut.prerequisite) {
              if (added_parents == config.cuts_per_round) break;
              ++added_parents;
            }
            relax.add_constraint(make_determinant_constraint(cut.minor.subset, relax.registry));
            active.insert(cut.minor.subset);
            int dim = static_cast<int>(cut.minor.subset.size());
            out.cut_counts[dim] += 1;
            out.cuts.push_back(
                {cut.minor.subset, cut.minor.bag, dim, round, cut.violation, cut.prerequisite});
          }
          shrink_interior(relax);
          {
            PhaseTimer timer(out.runtime_s, "solve");
            SolveOptions warm_opts = config.solver;
            warm_opts.mu0 = 1e-2;  // re-center after changing the feasible set
            res = solve(relax, warm_opts, &res.point);
          }
          if (round == config.max_rounds) {
            PhaseTimer timer(out.runtime_s, "separate");
            if (!separate(td.bags, relax.registry, res.point, config.cut_tol, config.max_minor_dim,
                          active)
                     .empty())
              out.numerical_warning = true;  // round cap hit with violations left
          }
        }
      }
    } catch (const std::exception& e) {
      fail_phase("solve", e);
    }

    out.relaxation_status = to_string(res.status);
    out.relaxation_objective = res.objective;
    out.numerical_warning |= res.numerical_warning || res.status != SolveStatus::Optimal;
    if (heur.objective > 0.0) {
      double gap = 100.0 * (heur.objective - res.objective) / heur.objective;
      out.gap_percent = gap;
      if (gap < -1e-4) out.numerical_warning = true;
    }
  }

  out.runtime_s["total"] += std::chrono::duration<double>(Clock::now() - t_begin).count();
  return out;
}

std::string GapReport::to_json() const {
  nlohmann::ordered_json j;
  j["case"] = case_name;
  j["tier"] = tier;
  j["lazy"] = lazy;
  j["heuristic_status"] = heuristic_status;
  j["heuristic_objective"] = heuristic_objective;
  if (relaxation_objective) {
    j["relaxation_status"] = relaxation_status;
    j["relaxation_objective"] = *relaxation_objective;
  }
  if (gap_percent) j["gap_percent"] = *gap_percent;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (auto [dim, count] : cut_counts) counts[std::to_string(dim)] = count;
  j["cut_counts"] = std::move(counts);
  j["separation_rounds"] = separation_rounds;
  nlohmann::ordered_json rt = nlohmann::ordered_json::object();
  for (const auto& [phase, seconds] : runtime_s) rt[phase] = seconds;
  j["runtime_seconds"] = std::move(rt);
  j["numerical_warning"] = numerical_warning;
  j["cuts"] = nlohmann::ordered_json::array();
  for (const CutRecord& c : cuts) {
    j["cuts"].push_back({{"nodes", c.nodes},
                         {"bag", c.bag},
                         {"dim", c.dim},
                         {"round", c.round},
                         {"violation", c.violation},
                         {"prerequisite", c.prerequisite}});
  }
  return j.dump(2);
}

GapReport GapReport::from_json(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text);
  GapReport out;
  out.case_name = j.at("case").get<std::string>();
  out.tier = j.at("tier").get<std::string>();
  out.lazy = j.at("lazy").get<bool>();
  out.heuristic_status = j.at("heuristic_status").get<std::string>();
  out.heuristic_objective = j.at("heuristic_objective").get<double>();
  if (j.contains("relaxation_objective")) {
    out.relaxation_status = j.at("relaxation_status").get<std::string>();
    out.relaxation_objective = j.at("relaxation_objective").get<double>();
  }
  if (j.contains("gap_percent")) out.gap_percent = j.at("gap_percent").get<double>();
  for (auto& [key, val] : j.at("cut_counts").items()) out.cut_counts[std::stoi(key)] = val.get<int>();
  out.separation_rounds = j.at("separation_rounds").get<int>();
  for (auto& [key, val] : j.at("runtime_seconds").items()) out.runtime_s[key] = val.get<double>();
  out.numerical_warning = j.at("numerical_warning").get<bool>();
  for (const auto& jc : j.at("cuts")) {
    CutRecord c;
    c.nodes = jc.at("nodes").get<std::vector<int>>();
    c.bag = jc.at("bag").get<std::vector<int>>();
    c.dim = jc.at("dim").get<int>();
    c.round = jc.at("round").get<int>();
    c.violation = jc.at("violation").get<double>();
    c.prerequisite = jc.at("prerequisite").get<bool>();
    out.cuts.push_back(std::move(c));
  }
  return out;
}

std::string report(const GapReport& gap, RunConfig::Format format) {
  if (format == RunConfig::Format::Json) return gap.to_json();
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os << "case:        " << gap.case_name << "\n";
  os << "tier:        " << gap.tier << (gap.lazy ? " (lazy cuts)" : "") << "\n";
  os.precision(6);
  os << "heuristic:   " << gap.heuristic_objective << "  [" << gap.heuristic_status << "]\n";
  if (gap.relaxation_objective) {
    os << "relaxation:  " << *gap.relaxation_objective << "  [" << gap.relaxation_status << "]\n";
  }
  if (gap.gap_percent) {
    os.precision(2);
    os << "gap:         " << *gap.gap_percent << " %\n";
  }
  if (!gap.cut_counts.empty()) {
    os << "cuts:       ";
    for (auto [dim, count] : gap.cut_counts) os << " dim" << dim << "=" << count;
    os << "  (rounds=" << gap.separation_rounds << ")\n";
  }
  os.precision(3);
  os << "runtime:    ";
  for (const auto& [phase, seconds] : gap.runtime_s)
    if (phase != "total") os << " " << phase << "=" << seconds << "s";
  auto it = gap.runtime_s.find("total");
  if (it != gap.runtime_s.end()) os << " total=" << it->second << "s";
  os << "\n";
  if (gap.numerical_warning) os << "warning:     numerical accuracy flag set\n";
  return os.str();
}

}  // namespace opf
