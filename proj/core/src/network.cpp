#include "opfrelax/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

namespace opf {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2.0;
}

int Network::bus_index(int id) const {
  auto it = std::lower_bound(buses.begin(), buses.end(), id,
                             [](const Bus& b, int v) { return b.id < v; });
  if (it == buses.end() || it->id != id) return -1;
  return static_cast<int>(it - buses.begin());
}

const Bus& Network::bus(int id) const {
  int idx = bus_index(id);
  if (idx < 0) throw std::out_of_range("unknown bus id " + std::to_string(id));
  return buses[idx];
}

std::vector<std::string> validate_network(const Network& net) {
  std::vector<std::string> out;
  auto add = [&out](std::string msg) { out.push_back(std::move(msg)); };

  for (size_t i = 1; i < net.buses.size(); ++i) {
    if (net.buses[i].id == net.buses[i - 1].id)
      add("bus " + std::to_string(net.buses[i].id) + ": duplicate id");
  }
  for (const Bus& b : net.buses) {
    if (!(b.vmin > 0.0))
      add("bus " + std::to_string(b.id) + ": voltage lower bound must be strictly positive");
    if (!(b.vmin <= b.vmax))
      add("bus " + std::to_string(b.id) + ": voltage bounds cross (vmin > vmax)");
  }
  for (const Generator& g : net.generators) {
    if (net.bus_index(g.bus) < 0)
      add("generator at bus " + std::to_string(g.bus) + ": unknown bus");
    if (!(g.pmin <= g.pmax))
      add("generator at bus " + std::to_string(g.bus) + ": active bounds cross");
    if (!(g.qmin <= g.qmax))
      add("generator at bus " + std::to_string(g.bus) + ": reactive bounds cross");
  }
  std::vector<std::pair<int, int>> pairs;
  for (const Branch& br : net.branches) {
    std::string name = "branch " + std::to_string(br.from) + "-" + std::to_string(br.to);
    if (net.bus_index(br.from) < 0 || net.bus_index(br.to) < 0) add(name + ": unknown endpoint bus");
    if (br.r * br.r + br.x * br.x <= 0.0) add(name + ": zero series impedance");
    if (!(br.angmin <= br.angmax)) add(name + ": angle bounds cross");
    if (!(br.angmin > -kHalfPi) || !(br.angmax < kHalfPi))
      add(name + ": angle bounds must lie strictly inside (-pi/2, pi/2) for the tangent envelope");
    pairs.emplace_back(std::min(br.from, br.to), std::max(br.from, br.to));
  }
  std::sort(pairs.begin(), pairs.end());
  for (size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i] == pairs[i - 1])
      add("branch " + std::to_string(pairs[i].first) + "-" + std::to_string(pairs[i].second) +
          ": duplicate unordered bus pair");
  }

  // connectivity (only meaningful when endpoints resolve)
  if (!net.buses.empty() && out.empty()) {
    std::vector<std::vector<int>> adj(net.buses.size());
    for (const Branch& br : net.branches) {
      int a = net.bus_index(br.from), b = net.bus_index(br.to);
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    std::vector<char> seen(net.buses.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    size_t count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
    }
    if (count != net.buses.size()) add("network graph is disconnected");
  }
  return out;
}

std::vector<std::string> model_mismatch_diagnostics(const Network& net) {
  std::vector<std::string> out;
  for (const Branch& br : net.branches) {
    std::string name = "branch " + std::to_string(br.from) + "-" + std::to_string(br.to);
    if (br.charge != 0.0) out.push_back(name + ": line charging ignored by the default line model");
    if (br.tap != 1.0) out.push_back(name + ": off-nominal tap ignored by the default line model");
    if (br.shift != 0.0) out.push_back(name + ": phase shift ignored by the default line model");
  }
  for (const Bus& b : net.buses) {
    if (b.gs != 0.0 || b.bs != 0.0)
      out.push_back("bus " + std::to_string(b.id) + ": shunt ignored by the default line model");
  }
  return out;
}

std::string network_to_json(const Network& net) {
  nlohmann::ordered_json j;
  j["baseMVA"] = net.base_mva;
  j["buses"] = nlohmann::ordered_json::array();
  for (const Bus& b : net.buses) {
    j["buses"].push_back({{"id", b.id},
                          {"vmin", b.vmin},
                          {"vmax", b.vmax},
                          {"pd", b.pd},
                          {"qd", b.qd},
                          {"gs", b.gs},
                          {"bs", b.bs}});
  }
  j["generators"] = nlohmann::ordered_json::array();
  for (const Generator& g : net.generators) {
    j["generators"].push_back({{"bus", g.bus},
                               {"pmin", g.pmin},
                               {"pmax", g.pmax},
                               {"qmin", g.qmin},
                               {"qmax", g.qmax},
                               {"c0", g.c0},
                               {"c1", g.c1},
                               {"c2", g.c2}});
  }
  j["branches"] = nlohmann::ordered_json::array();
  for (const Branch& br : net.branches) {
    j["branches"].push_back({{"from", br.from},
                             {"to", br.to},
                             {"r", br.r},
                             {"x", br.x},
                             {"g", br.g},
                             {"b", br.b},
                             {"charge", br.charge},
                             {"tap", br.tap},
                             {"shift", br.shift},
                             {"rateA", br.rate_a},
                             {"angmin", br.angmin},
                             {"angmax", br.angmax}});
  }
  return j.dump(2);
}

Network network_from_json(std::string_view json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  Network net;
  net.base_mva = j.at("baseMVA").get<double>();
  for (const auto& jb : j.at("buses")) {
    Bus b;
    b.id = jb.at("id").get<int>();
    b.vmin = jb.at("vmin").get<double>();
    b.vmax = jb.at("vmax").get<double>();
    b.pd = jb.at("pd").get<double>();
    b.qd = jb.at("qd").get<double>();
    b.gs = jb.value("gs", 0.0);
    b.bs = jb.value("bs", 0.0);
    net.buses.push_back(b);
  }
  for (const auto& jg : j.at("generators")) {
    Generator g;
    g.bus = jg.at("bus").get<int>();
    g.pmin = jg.at("pmin").get<double>();
    g.pmax = jg.at("pmax").get<double>();
    g.qmin = jg.at("qmin").get<double>();
    g.qmax = jg.at("qmax").get<double>();
    g.c0 = jg.at("c0").get<double>();
    g.c1 = jg.at("c1").get<double>();
    g.c2 = jg.at("c2").get<double>();
    net.generators.push_back(g);
  }
  for (const auto& jb : j.at("branches")) {
    Branch br;
    br.from = jb.at("from").get<int>();
    br.to = jb.at("to").get<int>();
    br.r = jb.at("r").get<double>();
    br.x = jb.at("x").get<double>();
    br.g = jb.at("g").get<double>();
    br.b = jb.at("b").get<double>();
    br.charge = jb.value("charge", 0.0);
    br.tap = jb.value("tap", 1.0);
    br.shift = jb.value("shift", 0.0);
    br.rate_a = jb.at("rateA").get<double>();
    br.angmin = jb.at("angmin").get<double>();
    br.angmax = jb.at("angmax").get<double>();
    net.branches.push_back(br);
  }
  std::sort(net.buses.begin(), net.buses.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
  return net;
}

}  // namespace opf
