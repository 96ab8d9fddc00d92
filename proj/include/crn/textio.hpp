#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crn/completion.hpp"
#include "crn/dynamics.hpp"

namespace crn::textio {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Parse failure with the offending location.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct ParsedNetwork {
  ChemicalNetwork network;
  RateFunction rates;
  std::map<std::size_t, double> frozen;       // "frozen:" lines
  std::vector<std::size_t> constrained;       // "constrained:" lines, reaction indices
  bool fully_bidirectional = true;            // false when any "->" line appears
};

/**
 * Network text format, one statement per line:
 *   species: NAME NAME ...          (optional, pins the species order)
 *   LHS <-> RHS ; kf=<rate> kr=<rate>
 *   LHS -> RHS ; k=<rate>
 *   frozen: NAME=<conc>[, NAME=<conc>...]
 *   constrained: LHS <-> RHS
 * with '#' comments. Species register in first-appearance order; coefficients
 * are positive integers < 2^31 and a species may not appear on both sides.
 */
ParsedNetwork parse_network(const std::string& text);

/// Canonical text form; parse(serialize(x)) == x.
std::string serialize_network(const ParsedNetwork& parsed);

/// Canonical rendering of an exact rational: "p" when integral, else "p/q".
std::string rational_string(const Rational& r);

json report_envelope(const std::string& kind);
json structure_json(const ChemicalNetwork& net, const StructureReport& rep);
json db_json(const KineticSystem& sys, const DbVerdict& verdict, const EnergySolution& energy);
json reduction_json(const KineticSystem& sys, const ReductionMap& rmap,
                    const FrozenConcentrations& n_u, const DbStabilityReport& report);
json completion_json(const KineticSystem& original, const CompletionResult& result);
json admissible_json(const KineticSystem& original, const AdmissibleCompletion& result);
json trajectory_summary_json(const KineticSystem& sys, const Trajectory& traj);

}  // namespace crn::textio
