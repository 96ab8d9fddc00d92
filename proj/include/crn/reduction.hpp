#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crn/kinetics.hpp"

namespace crn {

/// Positive concentrations held fixed for the frozen species (parent indices).
struct FrozenConcentrations {
  std::map<std::size_t, double> values;

  double at(std::size_t species) const;
};

/**
 * A U-reduction of a chemical network: the frozen set U, the kept set V, the
 * reduced network over V, and the exact column bookkeeping between the parent
 * non-reverse representatives and the reduced reaction matrix.
 *
 * Reduced columns are the nonzero projections of the parent representatives,
 * in parent order, with duplicates merged. A projection equal to the negative
 * of an earlier column is merged into that column's reverse direction
 * (sign -1 in the preimage list), which bidirectionality of the reduced
 * network forces.
 */
struct ReductionMap {
  ChemicalNetwork parent;
  std::vector<std::size_t> frozen;  // U, ascending parent species indices
  std::vector<std::size_t> kept;    // V, ascending parent species indices
  ChemicalNetwork reduced;          // over V; reactions [c_1..c_v, -c_1..-c_v]

  std::vector<std::size_t> parent_nonreverse;          // parent R_s (reaction indices)
  std::vector<std::vector<long long>> reduced_columns;  // v columns over V coords
  /// Per reduced column: (parent R_s position, sign) pairs.
  std::vector<std::vector<std::pair<std::size_t, int>>> preimages;
  std::vector<std::size_t> zero_reduced;  // parent R_s positions with zero projection
  std::vector<std::size_t> one_to_one;    // reduced columns with a single preimage

  /// Projection to V coordinates of a parent reaction vector.
  std::vector<long long> project(const Reaction& r) const;

  std::size_t n_reduced() const { return reduced_columns.size(); }
  bool is_one_to_one(std::size_t col) const { return preimages[col].size() == 1; }
  ratlin::RationalMatrix reduced_matrix() const;
};

/// Freeze the species in U. Throws std::invalid_argument unless 0 < |U| < N.
ReductionMap reduce_network(const ChemicalNetwork& net, const std::vector<std::size_t>& u);

/**
 * Rates of the reduced kinetic system: K_Rbar[n_U] sums K_R prod n_s^{-R(s)}
 * over the preimages, frozen reactant species absorbed into the constant.
 * Aligned with the reduced network's reaction order.
 */
RateFunction reduced_rates(const KineticSystem& sys, const ReductionMap& rmap,
                           const FrozenConcentrations& n_u);

/// Reduced kinetic system (V, R_V, K[n_U]) as a value.
KineticSystem reduced_system(const KineticSystem& sys, const ReductionMap& rmap,
                             const FrozenConcentrations& n_u);

/** Projection p of parent cycles into the reduced cycle space, with the
 *  containment and equality comparisons of the reduced-cycle lemmas. */
struct CycleProjection {
  std::vector<IntVec> images;       // p[c] per parent basis cycle
  ratlin::SubspaceBasis image_span;  // canonical basis of p(C)
  bool image_in_reduced_cycles = false;   // p(C) subseteq C_V (always true)
  bool image_equals_reduced_cycles = false;  // p(C) = C_V
  /// Set when |R_V| = |R|: C subseteq C_V and ker(R_V) subseteq ker(pi_U R).
  std::optional<bool> parent_in_reduced;
  std::optional<bool> reduced_kernel_in_frozen_kernel;
};

CycleProjection project_cycles(const ReductionMap& rmap);

/// D(C_V): parent species touched by a reaction whose projection lies in the
/// support of the reduced cycle space.
std::vector<std::size_t> cycle_species(const ReductionMap& rmap);

struct EquilibriumCheck {
  bool at_equilibrium = false;
  std::vector<double> witness_energy;  // valid when at_equilibrium
};

/**
 * Whether the frozen concentrations on U intersect D(C_V) match e^{-E(s)} for
 * some energy gauge E = E0 + sum mu_j m_j (linear least squares in mu,
 * accepted within 1e-9). Vacuously true when the intersection is empty.
 */
EquilibriumCheck equilibrium_db_check(const KineticSystem& sys, const ReductionMap& rmap,
                                      const FrozenConcentrations& n_u,
                                      double tol = kDbTolDefault);

enum class DbStability {
  StableDb,             // topological conditions hold; DB survives any rates/n_U
  DbAtEquilibriumOnly,  // reduced DB holds because n_U sits on the equilibrium gauge
  DbFineTuned,          // reduced DB holds for these rates but is not protected
  NotDb,                // reduced system is not detailed balanced
};

const char* to_string(DbStability v);

struct DbStabilityReport {
  DbStability verdict = DbStability::NotDb;
  bool all_cycle_reactions_one_to_one = false;
  bool no_zero_reduction_in_cycles = false;
  bool projected_cycles_equal = false;
  std::vector<std::size_t> cycle_species_set;  // D(C_V)
  bool equilibrium_check = false;
  DbVerdict reduced_verdict;  // circuit test on the concrete reduced system
};

/// Classify how the reduction treats detailed balance of a balanced parent.
DbStabilityReport db_stability_report(const KineticSystem& sys, const ReductionMap& rmap,
                                      const FrozenConcentrations& n_u,
                                      double tol = kDbTolDefault);

/**
 * A rate perturbation K_delta with ||K - K_delta|| < delta that keeps the
 * parent detailed balanced while breaking detailed balance of the reduced
 * system; nullopt when no construction applies (topologically stable
 * reductions, or frozen concentrations on the equilibrium gauge).
 */
std::optional<RateFunction> perturbation_witness(const KineticSystem& sys,
                                                 const ReductionMap& rmap,
                                                 const FrozenConcentrations& n_u, double delta,
                                                 std::uint64_t seed = 0,
                                                 double tol = kDbTolDefault);

/// Every reduced conservation law, zero-padded on U, lies in the parent's M.
bool conservation_embedding(const ReductionMap& rmap);

}  // namespace crn
