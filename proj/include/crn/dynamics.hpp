#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "crn/reduction.hpp"

namespace crn {

struct SimulationConfig {
  double t_end = 10.0;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  /// Stop once ||rhs||_inf <= steady_tol (1 + ||n||_inf).
  double steady_tol = 1e-12;
  /// Record every k-th accepted step (first and last samples always kept).
  std::size_t record_every = 1;

  void validate() const;
};

enum class IntegrationStatus { Ok, SteadyState, StiffFailure };

const char* to_string(IntegrationStatus s);

/**
 * Sampled solution of the mass-action ODEs with free energy, dissipation and,
 * for frozen-flux runs, the external fluxes and their cumulative integrals
 * (integrated as extra state components, so by the same quadrature).
 */
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;       // full state, parent ordering
  std::vector<double> free_energy;
  std::vector<double> dissipation;
  std::vector<std::size_t> frozen;               // U (empty for closed runs)
  std::vector<std::vector<double>> external_flux;     // J^E per frozen species
  std::vector<std::vector<double>> cumulative_flux;   // int_0^t J^E
  std::vector<double> conservation_residual;     // max law drift per sample
  std::vector<double> energy;                    // E used for F and D
  IntegrationStatus status = IntegrationStatus::Ok;

  const std::vector<double>& final_state() const { return states.back(); }
};

/// Integrate the closed system from n0 >= 0 with an embedded RK4(5) pair.
Trajectory integrate(const KineticSystem& sys, const std::vector<double>& n0,
                     const SimulationConfig& cfg);

/**
 * Integrate with the species in U frozen at n_U; their drift is cancelled
 * algebraically and the compensating external fluxes are recorded. n0_v lists
 * the initial values of the kept species in ascending species order.
 */
Trajectory integrate_with_fluxes(const KineticSystem& sys, const std::vector<std::size_t>& u,
                                 const FrozenConcentrations& n_u,
                                 const std::vector<double>& n0_v, const SimulationConfig& cfg);

/// F(n) = sum_j n_j (ln(n_j e^{E_j}) - 1), with 0 ln 0 = 0.
double free_energy(const std::vector<double>& energy, const std::vector<double>& n);

/// Dissipation -dF/dt in the closed form of the free-energy expansion;
/// boundary states use guarded logarithms (ln 0 terms dropped).
double dissipation(const KineticSystem& sys, const std::vector<double>& energy,
                   const std::vector<double>& n);

struct DecompositionSample {
  double t = 0.0;
  double df_dt = 0.0;        // centered difference of F
  double reduced_dissipation = 0.0;  // D_R
  double external_power = 0.0;       // J^ext
  double residual = 0.0;     // |dF/dt + D_R - J^ext|
};

/**
 * Per-sample free-energy balance dF/dt = -D_R + J^ext along a frozen-flux
 * trajectory. Requires a detailed balanced parent and a reduction with no
 * zero-V-reductions and only one-to-one reactions; violations raise
 * std::invalid_argument naming the failing condition.
 */
std::vector<DecompositionSample> energy_decomposition(const KineticSystem& sys,
                                                      const ReductionMap& rmap,
                                                      const FrozenConcentrations& n_u,
                                                      const Trajectory& traj);

/**
 * Integrate the reduced system and the frozen-flux system on a shared time
 * grid and return the largest deviation max_t ||n_red(t) - pi_V n_flux(t)||.
 */
double reduced_flux_equivalence(const KineticSystem& sys, const std::vector<std::size_t>& u,
                                const FrozenConcentrations& n_u,
                                const std::vector<double>& n0_v, const SimulationConfig& cfg);

/**
 * Steady state e^{-E*} predicted for a frozen-flux run: E* solves R^T E = w,
 * matches -ln n_U on the frozen coordinates, and conserves m^T n0 along the
 * laws vanishing on U. nullopt when no such gauge exists.
 */
std::optional<std::vector<double>> predicted_flux_limit(const KineticSystem& sys,
                                                        const std::vector<std::size_t>& u,
                                                        const FrozenConcentrations& n_u,
                                                        const std::vector<double>& n0_full);

/// CSV export: t,n_<name>...,F,D[,JE_<name>,cumJE_<name>...].
void write_csv(std::ostream& os, const Trajectory& traj,
               const std::vector<std::string>& species);

}  // namespace crn
