// Command line front end: parse a case, analyze it, build the requested
// relaxation tier, solve (optionally with lazy determinant-cut separation)
// and report the optimality gap, or dump intermediate artifacts as JSON.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "opfrelax/builders.hpp"
#include "opfrelax/graph.hpp"
#include "opfrelax/network.hpp"
#include "opfrelax/orchestrator.hpp"
#include "opfrelax/psd_cuts.hpp"

namespace {

opf::Network load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return opf::parse_case(buffer.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex relaxations of AC optimal power flow with polynomial determinant cuts"};

  opf::RunConfig config;
  std::string tier_name = "socp";
  std::string format_name = "table";
  bool dump_network = false, dump_bags = false, dump_cycles = false, dump_model = false,
       dump_cuts = false;

  app.add_option("case", config.case_path, "case file (MATPOWER-style tables)")->required();
  app.add_option("--relaxation", tier_name, "ac|socp|psdp|cycle|socp+cycle")
      ->check(CLI::IsMember({"ac", "socp", "psdp", "cycle", "socp+cycle"}))
      ->capture_default_str();
  app.add_flag("--lazy", config.lazy, "generate determinant cuts by lazy separation");
  app.add_option("--max-minor-dim", config.max_minor_dim, "largest determinant cut dimension")
      ->capture_default_str();
  app.add_option("--cut-tol", config.cut_tol, "separation violation threshold")->capture_default_str();
  app.add_option("--cuts-per-round", config.cuts_per_round, "violated cuts added per round")
      ->capture_default_str();
  app.add_option("--rounds", config.max_rounds, "separation round cap")->capture_default_str();
  app.add_option("--tol", config.solver.tol_kkt, "solver KKT tolerance")->capture_default_str();
  app.add_option("--max-iter", config.solver.max_inner, "solver inner iteration cap")
      ->capture_default_str();
  app.add_option("--mu0", config.solver.mu0, "initial barrier weight")->capture_default_str();
  app.add_option("--seed", config.seed, "seed for randomized test tooling (pipeline is deterministic)");
  app.add_option("--format", format_name, "table|json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();
  app.add_flag("--extended-branch", config.extended_branch,
               "honor line charging, taps, shifts and bus shunts");
  app.add_flag("--all-ref-nodes", config.all_ref_nodes,
               "emit cycle equalities for every reference node of each cycle");
  app.add_flag("--verbose", config.solver.verbose, "convergence trace on stderr");
  app.add_flag("--dump-network", dump_network, "print the parsed network as JSON and exit");
  app.add_flag("--dump-bags", dump_bags, "print tree-decomposition bags as JSON and exit");
  app.add_flag("--dump-cycles", dump_cycles, "print the cycle basis as JSON and exit");
  app.add_flag("--dump-model", dump_model, "print the relaxation model as JSON and exit");
  app.add_flag("--dump-cuts", dump_cuts, "run, then print the active cuts as JSON");

  CLI11_PARSE(app, argc, argv);
  config.tier = *opf::tier_from_string(tier_name);
  config.format = format_name == "json" ? opf::RunConfig::Format::Json : opf::RunConfig::Format::Table;

  try {
    if (dump_network || dump_bags || dump_cycles || dump_model) {
      opf::Network net = load(config.case_path);
      for (const std::string& d : opf::validate_network(net)) std::cerr << "invalid: " << d << "\n";
      if (!config.extended_branch)
        for (const std::string& d : opf::model_mismatch_diagnostics(net))
          std::cerr << "model mismatch: " << d << "\n";

      if (dump_network) std::cout << opf::network_to_json(net) << "\n";
      if (dump_bags) {
        opf::TreeDecomposition td = opf::tree_decomposition(net);
        nlohmann::ordered_json j;
        j["width"] = td.width;
        j["bags"] = nlohmann::ordered_json::array();
        for (const opf::Bag& bag : td.bags) {
          nlohmann::ordered_json jb;
          jb["nodes"] = bag.nodes;
          jb["fillins"] = nlohmann::ordered_json::array();
          for (auto [a, b] : bag.fillins) jb["fillins"].push_back({a, b});
          j["bags"].push_back(std::move(jb));
        }
        std::cout << j.dump(2) << "\n";
      }
      if (dump_cycles) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const opf::Cycle& c : opf::cycle_basis(net)) {
          nlohmann::ordered_json jc = nlohmann::ordered_json::array();
          for (auto [a, b] : c.edges) jc.push_back({a, b});
          j.push_back(std::move(jc));
        }
        std::cout << j.dump(2) << "\n";
      }
      if (dump_model) {
        auto diags = opf::validate_network(net);
        if (!diags.empty()) throw std::runtime_error("invalid network: " + diags.front());
        opf::BuildOptions bopts;
        bopts.extended_branch = config.extended_branch;
        opf::ModelInstance m;
        switch (config.tier) {
          case opf::RelaxationTier::Ac:
            m = opf::build_ac(net, bopts);
            break;
          case opf::RelaxationTier::Psdp: {
            auto td = opf::tree_decomposition(net);
            m = opf::build_wspace(net, bopts, true, &td.bags);
            m.tier = opf::RelaxationTier::Psdp;
            for (const opf::Bag& bag : td.bags) {
              int top = std::min<int>(config.max_minor_dim, static_cast<int>(bag.nodes.size()));
              for (const opf::MinorIndex& minor : opf::enumerate_minors(bag, top)) {
                if (minor.subset.size() < 3) continue;
                m.add_constraint(opf::make_determinant_constraint(minor.subset, m.registry));
              }
            }
            break;
          }
          default:
            m = opf::build_socp(net, bopts);
        }
        std::cout << m.to_json() << "\n";
      }
      return 0;
    }

    opf::GapReport gap = opf::run(config);
    if (dump_cuts) {
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const opf::CutRecord& c : gap.cuts) {
        j.push_back({{"nodes", c.nodes},
                     {"bag", c.bag},
                     {"dim", c.dim},
                     {"round", c.round},
                     {"violation", c.violation},
                     {"prerequisite", c.prerequisite}});
      }
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << opf::report(gap, config.format);
    }

    bool ok = gap.heuristic_status == "optimal" &&
              (gap.relaxation_status.empty() || gap.relaxation_status == "optimal");
    return ok ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
