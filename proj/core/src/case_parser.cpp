#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "opfrelax/network.hpp"

namespace opf {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
// Substitute for the "0,0 = unconstrained" angle-bound convention; the W-space
// tangent envelope needs bounds strictly inside (-90, 90) degrees.
constexpr double kDefaultAngleBound = 85.0 * kDegToRad;

struct Row {
  int line = -1;
  std::vector<double> values;
};

struct RawCase {
  std::optional<double> base_mva;
  std::map<std::string, std::vector<Row>> tables;
};

std::string strip_comment(std::string_view line) {
  auto pos = line.find('%');
  return std::string(line.substr(0, pos));
}

bool parse_numbers(const std::string& text, std::vector<double>& out) {
  const char* p = text.c_str();
  while (*p) {
    while (*p == ' ' || *p == '\t' || *p == ',' || *p == '\r') ++p;
    if (!*p) break;
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p) return false;
    out.push_back(v);
    p = end;
  }
  return true;
}

RawCase scan_case(std::string_view text) {
  RawCase raw;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  std::string current_table;  // empty when not inside a matrix block

  while (std::getline(in, line)) {
    ++lineno;
    std::string body = strip_comment(line);

    if (current_table.empty()) {
      auto mpc = body.find("mpc.");
      if (mpc == std::string::npos) continue;
      auto eq = body.find('=', mpc);
      if (eq == std::string::npos) continue;
      std::string key = body.substr(mpc + 4, eq - mpc - 4);
      key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
      std::string rhs = body.substr(eq + 1);
      if (key == "baseMVA") {
        std::vector<double> vals;
        std::string num = rhs;
        std::erase(num, ';');
        if (!parse_numbers(num, vals) || vals.size() != 1)
          throw ParseError("malformed baseMVA assignment", lineno);
        raw.base_mva = vals[0];
        continue;
      }
      auto open = rhs.find('[');
      if (open == std::string::npos) continue;  // scalar/string field we do not consume
      current_table = key;
      raw.tables[key];  // ensure presence even if empty
      body = rhs.substr(open + 1);
    }

    // inside a matrix block
    bool closes = false;
    auto close = body.find(']');
    if (close != std::string::npos) {
      closes = true;
      body = body.substr(0, close);
    }
    std::istringstream rows{body};
    std::string segment;
    while (std::getline(rows, segment, ';')) {
      std::vector<double> vals;
      if (!parse_numbers(segment, vals))
        throw ParseError("unparsable entry in mpc." + current_table, lineno);
      if (!vals.empty()) raw.tables[current_table].push_back({lineno, std::move(vals)});
    }
    if (closes) current_table.clear();
  }
  if (!current_table.empty())
    throw ParseError("unterminated matrix mpc." + current_table, lineno);
  return raw;
}

double field(const Row& row, size_t idx, const char* table, size_t row_idx, size_t required) {
  if (row.values.size() < required) {
    throw ParseError(std::string(table) + " row " + std::to_string(row_idx + 1) + ": expected at least " +
                         std::to_string(required) + " fields, got " + std::to_string(row.values.size()),
                     row.line);
  }
  return row.values[idx];
}

}  // namespace

Network parse_case(std::string_view text) {
  RawCase raw = scan_case(text);
  Network net;
  net.base_mva = raw.base_mva.value_or(100.0);
  if (net.base_mva <= 0.0) throw ParseError("baseMVA must be positive");
  const double base = net.base_mva;

  auto bus_table = raw.tables.find("bus");
  if (bus_table == raw.tables.end() || bus_table->second.empty())
    throw ParseError("missing bus table");
  size_t idx = 0;
  for (const Row& row : bus_table->second) {
    Bus b;
    b.id = static_cast<int>(field(row, 0, "bus", idx, 13));
    b.pd = row.values[2] / base;
    b.qd = row.values[3] / base;
    b.gs = row.values[4] / base;
    b.bs = row.values[5] / base;
    b.vmax = row.values[11];
    b.vmin = row.values[12];
    net.buses.push_back(b);
    ++idx;
  }
  std::sort(net.buses.begin(), net.buses.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
  for (size_t i = 1; i < net.buses.size(); ++i)
    if (net.buses[i].id == net.buses[i - 1].id)
      throw ParseError("duplicate bus id " + std::to_string(net.buses[i].id));

  std::vector<Generator> gens;
  if (auto it = raw.tables.find("gen"); it != raw.tables.end()) {
    idx = 0;
    for (const Row& row : it->second) {
      Generator g;
      g.bus = static_cast<int>(field(row, 0, "gen", idx, 10));
      double status = row.values[7];
      g.qmax = row.values[3] / base;
      g.qmin = row.values[4] / base;
      g.pmax = row.values[8] / base;
      g.pmin = row.values[9] / base;
      if (net.bus_index(g.bus) < 0)
        throw ParseError("gen row " + std::to_string(idx + 1) + ": unknown bus " + std::to_string(g.bus),
                         row.line);
      if (status > 0) gens.push_back(g);
      ++idx;
    }
  }

  if (auto it = raw.tables.find("gencost"); it != raw.tables.end()) {
    const auto& rows = it->second;
    // A table twice the generator count carries reactive-power costs in its
    // second half; only the active-power half is consumed.
    size_t gen_rows = raw.tables.count("gen") ? raw.tables["gen"].size() : 0;
    if (rows.size() != gen_rows && rows.size() != 2 * gen_rows)
      throw ParseError("gencost has " + std::to_string(rows.size()) + " rows for " +
                       std::to_string(gen_rows) + " generators");
    size_t active_idx = 0;  // index into the kept (in-service) generators
    for (size_t r = 0; r < gen_rows; ++r) {
      const Row& row = rows[r];
      double status = raw.tables["gen"][r].values.size() > 7 ? raw.tables["gen"][r].values[7] : 1.0;
      int model = static_cast<int>(field(row, 0, "gencost", r, 4));
      int ncost = static_cast<int>(row.values[3]);
      if (model != 2)
        throw ParseError("gencost row " + std::to_string(r + 1) + ": only polynomial cost model supported",
                         row.line);
      if (ncost < 1 || ncost > 3)
        throw ParseError("gencost row " + std::to_string(r + 1) + ": polynomial degree above quadratic",
                         row.line);
      if (row.values.size() < static_cast<size_t>(4 + ncost))
        throw ParseError("gencost row " + std::to_string(r + 1) + ": missing coefficients", row.line);
      if (status <= 0) continue;
      Generator& g = gens[active_idx++];
      double c2 = 0, c1 = 0, c0 = 0;
      if (ncost == 3) {
        c2 = row.values[4];
        c1 = row.values[5];
        c0 = row.values[6];
      } else if (ncost == 2) {
        c1 = row.values[4];
        c0 = row.values[5];
      } else {
        c0 = row.values[4];
      }
      g.c2 = c2 * base * base;
      g.c1 = c1 * base;
      g.c0 = c0;
    }
  }
  net.generators = std::move(gens);

  auto branch_table = raw.tables.find("branch");
  if (branch_table == raw.tables.end() || branch_table->second.empty())
    throw ParseError("missing branch table");
  std::map<std::pair<int, int>, Branch> merged;
  idx = 0;
  for (const Row& row : branch_table->second) {
    Branch br;
    br.from = static_cast<int>(field(row, 0, "branch", idx, 11));
    br.to = static_cast<int>(row.values[1]);
    br.r = row.values[2];
    br.x = row.values[3];
    br.charge = row.values[4];
    br.rate_a = row.values[5] / base;
    br.tap = row.values[8] != 0.0 ? row.values[8] : 1.0;
    br.shift = row.values[9] * kDegToRad;
    double status = row.values[10];
    if (row.values.size() >= 13) {
      br.angmin = row.values[11] * kDegToRad;
      br.angmax = row.values[12] * kDegToRad;
    }
    if (br.angmin == 0.0 && br.angmax == 0.0) {
      br.angmin = -kDefaultAngleBound;
      br.angmax = kDefaultAngleBound;
    }
    ++idx;
    if (status == 0.0) continue;
    if (net.bus_index(br.from) < 0 || net.bus_index(br.to) < 0)
      throw ParseError("branch row " + std::to_string(idx) + ": unknown bus", row.line);
    if (br.from == br.to)
      throw ParseError("branch row " + std::to_string(idx) + ": self loop", row.line);
    double z2 = br.r * br.r + br.x * br.x;
    if (z2 <= 0.0)
      throw ParseError("branch row " + std::to_string(idx) + ": zero series impedance", row.line);
    br.g = br.r / z2;
    br.b = -br.x / z2;

    auto key = std::minmax(br.from, br.to);
    auto [it, inserted] = merged.try_emplace({key.first, key.second}, br);
    if (!inserted) {
      // Parallel circuits collapse into one equivalent admittance with the
      // tighter operating limits; the lifted pair variables are keyed by the
      // unordered bus pair, so two parallel branches cannot coexist.
      Branch& acc = it->second;
      bool plain = acc.tap == 1.0 && acc.shift == 0.0 && br.tap == 1.0 && br.shift == 0.0;
      bool same_orientation = acc.from == br.from && acc.to == br.to;
      if (!plain && !(same_orientation && acc.tap == br.tap && acc.shift == br.shift))
        throw ParseError("branch row " + std::to_string(idx) +
                             ": cannot merge parallel branches with differing tap or shift",
                         row.line);
      std::complex<double> y = std::complex<double>(acc.g, acc.b) + std::complex<double>(br.g, br.b);
      acc.g = y.real();
      acc.b = y.imag();
      std::complex<double> z = 1.0 / y;
      acc.r = z.real();
      acc.x = z.imag();
      acc.charge += br.charge;
      if (br.rate_a > 0.0) acc.rate_a = acc.rate_a > 0.0 ? std::min(acc.rate_a, br.rate_a) : br.rate_a;
      acc.angmin = std::max(acc.angmin, same_orientation ? br.angmin : -br.angmax);
      acc.angmax = std::min(acc.angmax, same_orientation ? br.angmax : -br.angmin);
    }
  }
  net.branches.clear();
  for (auto& [key, br] : merged) net.branches.push_back(br);

  // structural sanity that parse promises: connectivity over in-service branches
  {
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
    if (count != net.buses.size()) throw ParseError("network graph is disconnected");
  }
  return net;
}

}  // namespace opf
