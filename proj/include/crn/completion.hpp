#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crn/reduction.hpp"

namespace crn {

/// Pipeline step that introduced a pair of auxiliary species.
enum class CompletionStep { SourceSink, Conservativize, CycleBreak };

const char* to_string(CompletionStep s);

struct ProvenanceEntry {
  CompletionStep step;
  std::vector<std::size_t> new_species;  // indices in the completed network
  std::size_t trigger_column;            // non-reverse column that caused the step
};

/// Raised when a pipeline invariant fails (no admissible progress on a cycle,
/// kernel dimension not dropping, or a conservativeness post-check failing).
class PipelineError : public std::logic_error {
 public:
  explicit PipelineError(const std::string& what) : std::logic_error(what) {}
};

/// Independently re-derived checks on a candidate completion.
struct CompletionCertificate {
  bool reduction_matches = false;   // pi_Omega reduction equals the original network
  bool rates_roundtrip = false;     // reduced rates at the frozen defaults equal K
  bool acyclic = false;             // ker(R_c) = {0}
  bool detailed_balanced = false;   // circuit condition on the completion
  bool conservative = false;
  bool no_sources_sinks = false;
  bool admissible = true;           // no new species in a constrained reaction
  std::vector<std::string> failures;

  bool closed() const { return detailed_balanced && conservative && no_sources_sinks; }
  bool all_green() const {
    return reduction_matches && rates_roundtrip && closed() && admissible;
  }
};

struct CompletionResult {
  ChemicalNetwork completed_network;
  RateFunction completed_rates;
  std::vector<std::size_t> added_species;  // indices in the completed network
  FrozenConcentrations frozen_defaults;    // all ones
  std::vector<ProvenanceEntry> provenance;
  CompletionCertificate certificate;

  KineticSystem completed_system() const {
    return KineticSystem(completed_network, completed_rates);
  }
};

/// Reactions that must not acquire new species, closed under reversal.
struct ConstraintSet {
  std::vector<std::size_t> reaction_indices;

  bool contains(std::size_t i) const;
};

/**
 * Step 1: append a fresh (+1, -1) species pair to every source or sink
 * reaction, on the direction with empty reactant set.
 */
ChemicalNetwork eliminate_sources_sinks(const ChemicalNetwork& net,
                                        std::vector<ProvenanceEntry>* provenance = nullptr);

/**
 * Step 2: mirror the coefficients of the law-free species block B on fresh
 * species so every species joins a conservation law. The result is re-verified
 * conservative by the exact LP; failure raises PipelineError.
 */
ChemicalNetwork make_conservative(const ChemicalNetwork& net,
                                  std::vector<ProvenanceEntry>* provenance = nullptr);

/**
 * Step 3: kill kernel vectors one at a time by tagging one cycle reaction with
 * a fresh (zeta, -zeta) species pair, where zeta is that reaction's
 * coefficient on its highest participating species. Each iteration must drop
 * the kernel dimension by exactly one (asserted).
 *
 * When `circuit_log_ratios` is supplied (minimal mode), only cycles violating
 * the circuit condition beyond `tol` are removed.
 */
ChemicalNetwork break_cycles(const ChemicalNetwork& net,
                             const std::vector<std::size_t>& forbidden_columns,
                             std::vector<ProvenanceEntry>* provenance = nullptr,
                             const std::vector<double>* circuit_log_ratios = nullptr,
                             double tol = kDbTolDefault);

/// Full closed completion: Steps 1-3, rates copied through the projection.
CompletionResult complete_closed(const KineticSystem& sys, bool minimal = false,
                                 double tol = kDbTolDefault);

enum class AdmissibleStatus { Completed, Impossible, NotDecided };

struct AdmissibleCompletion {
  AdmissibleStatus status = AdmissibleStatus::NotDecided;
  std::optional<CompletionResult> result;            // Completed / NotDecided attempt
  std::optional<std::pair<IntVec, double>> blocking_cycle;  // Impossible certificate
};

/**
 * Closed completion that adds no species to the constrained reactions.
 * Returns Impossible with a certificate cycle when some fully constrained
 * cycle violates the circuit condition; otherwise attempts the pipeline and
 * reports Completed or NotDecided with the attempt's certificate.
 */
AdmissibleCompletion complete_admissible(const KineticSystem& sys,
                                         const ConstraintSet& constraints,
                                         bool minimal = false, double tol = kDbTolDefault);

/// Re-derive every certificate predicate of a candidate completion.
CompletionCertificate verify_completion(const KineticSystem& original,
                                        const CompletionResult& candidate,
                                        const ConstraintSet* constraints = nullptr,
                                        double tol = kDbTolDefault);

}  // namespace crn
