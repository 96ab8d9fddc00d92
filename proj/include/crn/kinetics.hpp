#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "crn/network.hpp"

namespace crn {

/// Default tolerance for log-scale circuit sums and energy residuals.
inline constexpr double kDbTolDefault = 1e-9;

/**
 * Strictly positive mass-action rates, one per reaction of the network,
 * aligned with the network's reaction order. All quantities are treated as
 * dimensionless.
 */
struct RateFunction {
  std::vector<double> values;

  double norm() const;  // max_R |K(R)|
};

/**
 * A chemical network with mass-action rates. The structural report (reaction
 * matrix, cycle and conservation bases) is computed once at construction;
 * the object is immutable afterwards and safe to share across threads.
 */
class KineticSystem {
 public:
  KineticSystem(ChemicalNetwork net, RateFunction rates);

  const ChemicalNetwork& network() const { return net_; }
  const RateFunction& rates() const { return rates_; }
  const StructureReport& structure() const { return structure_; }
  bool bidirectional() const { return net_.bidirectional(); }
  std::size_t n_species() const { return net_.n_species(); }

  const std::vector<std::size_t>& nonreverse() const { return structure_.nonreverse_indices; }
  /// Forward rate of non-reverse representative k.
  double forward_rate(std::size_t k) const;
  /// Rate of the reverse of representative k; requires a bidirectional system.
  double reverse_rate(std::size_t k) const;

  /// w(k) = ln(K_{-R_k} / K_{R_k}) over the non-reverse set.
  std::vector<double> energy_rhs() const;

 private:
  ChemicalNetwork net_;
  RateFunction rates_;
  StructureReport structure_;
};

/// Sum_R K_R R prod_{i in I(R)} n_i^{-R(i)}; n must be componentwise nonnegative.
std::vector<double> mass_action_rhs(const KineticSystem& sys, const std::vector<double>& n);

/// Net fluxes J_R(n) over the non-reverse set; requires a bidirectional system.
std::vector<double> reaction_fluxes(const KineticSystem& sys, const std::vector<double>& n);

/// One violated circuit: cycle basis vector plus its circuit value.
struct DbVerdict {
  bool balanced = false;
  std::vector<std::pair<IntVec, double>> violated_cycles;
  double tolerance = kDbTolDefault;
};

/**
 * Wegscheider circuit condition on a cycle basis: the system is detailed
 * balanced iff |sum_j c(j) ln(K_Rj / K_-Rj)| <= tol for every basis cycle.
 * Linearity over the cycle space makes the basis test complete.
 */
DbVerdict detailed_balance(const KineticSystem& sys, double tol = kDbTolDefault);

/**
 * A solution of R^T E = w together with the gauge directions (conservation
 * laws) along which E is free, and the least-squares residual. residual <= tol
 * iff the system is detailed balanced.
 */
struct EnergySolution {
  std::vector<double> particular;   // minimum-norm least-squares solution
  ratlin::SubspaceBasis gauge_basis;  // conservation laws
  double residual = 0.0;            // ||R^T E - w||_inf
};

EnergySolution energy_vector(const KineticSystem& sys);

/**
 * Energy of an accessible composition xi, evaluated through a representation
 * xi = R x; well-definedness under detailed balance is asserted against E.xi.
 *
 * Throws std::domain_error when xi is not accessible and
 * std::invalid_argument when the system is not detailed balanced.
 */
double composition_energy(const KineticSystem& sys, const IntVec& xi,
                          double tol = kDbTolDefault);

/**
 * Energy matching prescribed conserved totals: finds E = E0 + sum mu_j m_j
 * with m_j^T e^{-E} = T_j by a damped Newton iteration on the chemical
 * potentials. Returns nullopt when the targets are infeasible or the
 * iteration fails after 200 steps and 10 seeded restarts.
 */
std::optional<std::vector<double>> gauge_fix_energy(
    const KineticSystem& sys, const std::vector<std::pair<IntVec, double>>& targets);

/**
 * Energy with E(s) = -ln(n_s), shifted along a conservation law with
 * m(s) != 0 when one exists; nullopt when no law moves s and the particular
 * solution misses the target.
 */
std::optional<std::vector<double>> single_species_gauge(const KineticSystem& sys,
                                                        std::size_t species, double n_s);

}  // namespace crn
