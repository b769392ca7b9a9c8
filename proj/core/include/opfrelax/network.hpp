#ifndef OPFRELAX_NETWORK_HPP
#define OPFRELAX_NETWORK_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace opf {

struct Bus {
  int id = 0;
  double vmin = 0.0, vmax = 0.0;  // voltage magnitude bounds (per-unit)
  double pd = 0.0, qd = 0.0;      // demand (per-unit)
  double gs = 0.0, bs = 0.0;      // shunt admittance (per-unit, extended model only)

  bool operator==(const Bus&) const = default;
};

struct Generator {
  int bus = 0;
  double pmin = 0.0, pmax = 0.0;
  double qmin = 0.0, qmax = 0.0;
  // Cost c0 + c1*pg + c2*pg^2 with pg in per-unit (file coefficients are
  // converted by baseMVA at parse time).
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;

  bool operator==(const Generator&) const = default;
};

struct Branch {
  int from = 0, to = 0;
  double r = 0.0, x = 0.0;  // series impedance (per-unit)
  double g = 0.0, b = 0.0;  // derived series admittance: g = r/(r^2+x^2), b = -x/(r^2+x^2)
  double charge = 0.0;      // total line-charging susceptance (extended model only)
  double tap = 1.0;         // off-nominal turns ratio (extended model only)
  double shift = 0.0;       // phase shift angle, radians (extended model only)
  double rate_a = 0.0;      // apparent-power limit (per-unit); 0 means unlimited
  double angmin = 0.0, angmax = 0.0;  // angle-difference bounds, radians

  bool operator==(const Branch&) const = default;
};

struct Network {
  double base_mva = 100.0;
  std::vector<Bus> buses;            // sorted by id, ids unique
  std::vector<Generator> generators;
  std::vector<Branch> branches;      // at most one per unordered bus pair

  int bus_index(int id) const;       // -1 when absent
  const Bus& bus(int id) const;      // throws on unknown id

  bool operator==(const Network&) const = default;
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what, int line = -1)
      : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + what : what),
        line(line) {}
  int line;
};

// MATPOWER-style tabular case text -> validated per-unit Network.
// Throws ParseError on syntax errors (with line numbers), unknown bus
// references, zero-impedance branches, and disconnected graphs.
Network parse_case(std::string_view text);

// Invariant violations, one message per offense; empty iff all type
// invariants hold.
std::vector<std::string> validate_network(const Network& net);

// Parameters the default line model ignores (charging, taps, shifts, bus
// shunts). Non-empty output means results will not match a tool that honors
// them unless the extended branch model is enabled.
std::vector<std::string> model_mismatch_diagnostics(const Network& net);

// Canonical JSON dump (schema documented in README) and its inverse.
std::string network_to_json(const Network& net);
Network network_from_json(std::string_view json_text);

}  // namespace opf

#endif  // OPFRELAX_NETWORK_HPP
