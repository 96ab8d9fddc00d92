#include "crn/dynamics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace crn {

void SimulationConfig::validate() const {
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(steady_tol > 0.0) || !(max_step > 0.0))
    throw std::invalid_argument("tolerances must be positive");
  if (record_every == 0) throw std::invalid_argument("record_every must be positive");
}

const char* to_string(IntegrationStatus s) {
  switch (s) {
    case IntegrationStatus::Ok: return "OK";
    case IntegrationStatus::SteadyState: return "STEADY_STATE";
    case IntegrationStatus::StiffFailure: return "STIFF_FAILURE";
  }
  return "?";
}

namespace {

using Rhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

// Dormand-Prince 5(4) coefficients.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

struct StepResult {
  std::vector<double> y;
  double error = 0.0;   // scaled error estimate
  bool negative = false;
};

StepResult rk_step(const Rhs& f, double t, const std::vector<double>& y,
                   const std::vector<double>& k1, double h, double rel_tol, double abs_tol,
                   std::size_t positivity_dim) {
  const std::size_t n = y.size();
  std::vector<double> k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n);
  auto stage = [&](const std::vector<double>& weights,
                   const std::vector<const std::vector<double>*>& ks, double c,
                   std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = y[i];
      for (std::size_t w = 0; w < weights.size(); ++w) acc += h * weights[w] * (*ks[w])[i];
      tmp[i] = acc;
    }
    // Mass-action monomials need nonnegative stage values; clamp the
    // intermediate stages only (the solution itself is guarded below).
    for (std::size_t i = 0; i < positivity_dim; ++i) tmp[i] = std::max(tmp[i], 0.0);
    f(t + c * h, tmp, out);
  };
  stage({kA21}, {&k1}, kA21, k2);
  stage({kA31, kA32}, {&k1, &k2}, 3.0 / 10, k3);
  stage({kA41, kA42, kA43}, {&k1, &k2, &k3}, 4.0 / 5, k4);
  stage({kA51, kA52, kA53, kA54}, {&k1, &k2, &k3, &k4}, 8.0 / 9, k5);
  stage({kA61, kA62, kA63, kA64, kA65}, {&k1, &k2, &k3, &k4, &k5}, 1.0, k6);

  StepResult res;
  res.y.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    res.y[i] = y[i] + h * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] + kB5 * k5[i] + kB6 * k6[i]);
  for (std::size_t i = 0; i < positivity_dim; ++i) {
    if (res.y[i] < -1e-14) {
      res.negative = true;
      return res;
    }
    if (res.y[i] < 0.0) res.y[i] = 0.0;
  }
  f(t + h, res.y, k7);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = h * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] + kE5 * k5[i] + kE6 * k6[i] +
                          kE7 * k7[i]);
    const double scale = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(res.y[i]));
    err = std::max(err, std::abs(e) / scale);
  }
  res.error = err;
  return res;
}

struct RawTrajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  IntegrationStatus status = IntegrationStatus::Ok;
};

/**
 * Adaptive integration with PI step control, positivity guarding on the first
 * positivity_dim components, and optional forced sample times.
 */
RawTrajectory integrate_raw(const Rhs& f, std::vector<double> y0, const SimulationConfig& cfg,
                            std::size_t positivity_dim,
                            const std::vector<double>* forced_times) {
  cfg.validate();
  RawTrajectory out;
  double t = 0.0;
  std::vector<double> y = std::move(y0);
  std::vector<double> k1(y.size());
  f(t, y, k1);
  out.times.push_back(t);
  out.states.push_back(y);

  double h = std::min({cfg.t_end / 100.0, cfg.max_step, 0.1});
  double prev_err = 1.0;
  std::size_t grid_next = forced_times && !forced_times->empty() ? 1 : 0;  // grid[0] == 0
  std::size_t accepted = 0;

  while (t < cfg.t_end) {
    h = std::min(h, cfg.max_step);
    double target = cfg.t_end;
    if (forced_times && grid_next < forced_times->size())
      target = std::min(target, (*forced_times)[grid_next]);
    if (t + h > target) h = target - t;
    if (h < 1e-14 * std::max(1.0, std::abs(t))) {
      out.status = IntegrationStatus::StiffFailure;
      return out;
    }

    const StepResult step =
        rk_step(f, t, y, k1, h, cfg.rel_tol, cfg.abs_tol, positivity_dim);
    if (step.negative) {
      h *= 0.5;
      continue;
    }
    if (step.error > 1.0) {
      const double fac =
          std::clamp(0.9 * std::pow(step.error, -0.2), 0.2, 1.0);
      h *= fac;
      continue;
    }

    t += h;
    y = step.y;
    f(t, y, k1);
    ++accepted;

    const bool on_grid = forced_times && grid_next < forced_times->size() &&
                         std::abs(t - (*forced_times)[grid_next]) <= 1e-12 * std::max(1.0, t);
    if (on_grid) ++grid_next;
    const bool record = forced_times ? on_grid : (accepted % cfg.record_every == 0);
    if (record || t >= cfg.t_end) {
      if (out.times.back() != t) {
        out.times.push_back(t);
        out.states.push_back(y);
      }
    }

    double rhs_norm = 0.0, y_norm = 0.0;
    for (std::size_t i = 0; i < positivity_dim; ++i) {
      rhs_norm = std::max(rhs_norm, std::abs(k1[i]));
      y_norm = std::max(y_norm, std::abs(y[i]));
    }
    if (rhs_norm <= cfg.steady_tol * (1.0 + y_norm)) {
      if (out.times.back() != t) {
        out.times.push_back(t);
        out.states.push_back(y);
      }
      out.status = IntegrationStatus::SteadyState;
      return out;
    }

    const double fac = std::clamp(
        0.9 * std::pow(std::max(step.error, 1e-10), -0.7 / 5.0) * std::pow(prev_err, 0.4 / 5.0),
        0.2, 5.0);
    prev_err = std::max(step.error, 1e-10);
    h *= fac;
  }
  return out;
}

/// Energy used for the free-energy bookkeeping of a trajectory.
std::vector<double> trajectory_energy(const KineticSystem& sys,
                                      const std::vector<std::size_t>& u,
                                      const FrozenConcentrations& n_u) {
  const EnergySolution es = energy_vector(sys);
  if (u.empty()) return es.particular;
  // Prefer a gauge matching the frozen concentrations, when one exists.
  const std::size_t L = es.gauge_basis.dim();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(u.size()),
                    static_cast<Eigen::Index>(std::max<std::size_t>(L, 1)));
  a.setZero();
  Eigen::VectorXd d(static_cast<Eigen::Index>(u.size()));
  for (std::size_t r = 0; r < u.size(); ++r) {
    for (std::size_t j = 0; j < L; ++j)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          es.gauge_basis.vectors[j][u[r]].convert_to<double>();
    d(static_cast<Eigen::Index>(r)) = -std::log(n_u.at(u[r])) - es.particular[u[r]];
  }
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(a.cols());
  if (L > 0) mu = a.completeOrthogonalDecomposition().solve(d);
  if ((a * mu - d).lpNorm<Eigen::Infinity>() > 1e-9) return es.particular;
  std::vector<double> e = es.particular;
  for (std::size_t j = 0; j < L; ++j)
    for (std::size_t i = 0; i < e.size(); ++i)
      e[i] += mu(static_cast<Eigen::Index>(j)) *
              es.gauge_basis.vectors[j][i].convert_to<double>();
  return e;
}

double law_drift(const ratlin::SubspaceBasis& laws, const std::vector<double>& n,
                 const std::vector<double>& n0, const std::vector<double>* flux_correction) {
  double drift = 0.0;
  for (const IntVec& m : laws.vectors) {
    double now = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const double mi = m[i].convert_to<double>();
      now += mi * n[i];
      ref += mi * n0[i];
    }
    if (flux_correction)
      for (std::size_t i = 0; i < n.size(); ++i)
        ref += m[i].convert_to<double>() * (*flux_correction)[i];
    drift = std::max(drift, std::abs(now - ref) / (1.0 + std::abs(ref)));
  }
  return drift;
}

}  // namespace

double free_energy(const std::vector<double>& energy, const std::vector<double>& n) {
  double f = 0.0;
  for (std::size_t j = 0; j < n.size(); ++j) {
    if (n[j] <= 0.0) continue;  // 0 ln 0 = 0
    f += n[j] * (std::log(n[j]) + energy[j] - 1.0);
  }
  return f;
}

double dissipation(const KineticSystem& sys, const std::vector<double>& energy,
                   const std::vector<double>& n) {
  double d = 0.0;
  const auto& rs = sys.nonreverse();
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const Reaction& r = sys.network().reaction(rs[k]);
    double fwd = sys.forward_rate(k), bwd = sys.reverse_rate(k);
    double logx = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
      if (r.coeffs[i] == 0) continue;
      const double c = static_cast<double>(r.coeffs[i]);
      if (r.coeffs[i] < 0)
        fwd *= std::pow(n[i], -c);
      else
        bwd *= std::pow(n[i], c);
      logx += c * ((n[i] > 0.0 ? std::log(n[i]) : 0.0) + energy[i]);
    }
    d += (bwd - fwd) * logx;
  }
  return d;
}

namespace {

Trajectory finish_trajectory(const KineticSystem& sys, RawTrajectory raw,
                             const std::vector<std::size_t>& u,
                             const FrozenConcentrations& n_u, std::size_t state_dim) {
  Trajectory traj;
  traj.status = raw.status;
  traj.frozen = u;
  traj.energy = trajectory_energy(sys, u, n_u);
  const ratlin::SubspaceBasis& laws = sys.structure().conservation_basis;

  const std::vector<double>& first = raw.states.front();
  std::vector<double> n0(first.begin(), first.begin() + static_cast<long>(state_dim));
  for (std::size_t s = 0; s < raw.states.size(); ++s) {
    const std::vector<double>& full = raw.states[s];
    std::vector<double> n(full.begin(), full.begin() + static_cast<long>(state_dim));
    traj.times.push_back(raw.times[s]);
    traj.free_energy.push_back(free_energy(traj.energy, n));
    traj.dissipation.push_back(dissipation(sys, traj.energy, n));
    if (!u.empty()) {
      const std::vector<double> flux = reaction_fluxes(sys, n);
      std::vector<double> je(u.size(), 0.0);
      for (std::size_t ui = 0; ui < u.size(); ++ui)
        for (std::size_t k = 0; k < flux.size(); ++k)
          je[ui] -= static_cast<double>(
                        sys.network().reaction(sys.nonreverse()[k]).coeffs[u[ui]]) *
                    flux[k];
      traj.external_flux.push_back(std::move(je));
      traj.cumulative_flux.emplace_back(full.begin() + static_cast<long>(state_dim),
                                        full.end());
      std::vector<double> correction(state_dim, 0.0);
      for (std::size_t ui = 0; ui < u.size(); ++ui)
        correction[u[ui]] = traj.cumulative_flux.back()[ui];
      traj.conservation_residual.push_back(law_drift(laws, n, n0, &correction));
    } else {
      traj.conservation_residual.push_back(law_drift(laws, n, n0, nullptr));
    }
    traj.states.push_back(std::move(n));
  }
  return traj;
}

}  // namespace

Trajectory integrate(const KineticSystem& sys, const std::vector<double>& n0,
                     const SimulationConfig& cfg) {
  if (n0.size() != sys.n_species()) throw std::invalid_argument("initial state dimension");
  for (double x : n0)
    if (x < 0.0) throw std::domain_error("negative initial concentration");
  const Rhs f = [&sys](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy = mass_action_rhs(sys, y);
  };
  RawTrajectory raw = integrate_raw(f, n0, cfg, sys.n_species(), nullptr);
  return finish_trajectory(sys, std::move(raw), {}, FrozenConcentrations{}, sys.n_species());
}

Trajectory integrate_with_fluxes(const KineticSystem& sys, const std::vector<std::size_t>& u,
                                 const FrozenConcentrations& n_u,
                                 const std::vector<double>& n0_v,
                                 const SimulationConfig& cfg) {
  if (u.empty()) return integrate(sys, n0_v, cfg);
  std::vector<std::size_t> frozen(u);
  std::sort(frozen.begin(), frozen.end());
  std::vector<bool> is_frozen(sys.n_species(), false);
  for (std::size_t s : frozen) {
    if (s >= sys.n_species()) throw std::invalid_argument("frozen species out of range");
    is_frozen[s] = true;
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < sys.n_species(); ++i)
    if (!is_frozen[i]) kept.push_back(i);
  if (n0_v.size() != kept.size())
    throw std::invalid_argument("initial state must cover exactly the kept species");

  const std::size_t n = sys.n_species();
  std::vector<double> y0(n + frozen.size(), 0.0);
  for (std::size_t i = 0; i < kept.size(); ++i) y0[kept[i]] = n0_v[i];
  for (std::size_t s : frozen) y0[s] = n_u.at(s);

  // Frozen coordinates are cancelled algebraically; the compensating external
  // fluxes are appended as cumulative-integral states.
  const Rhs f = [&sys, &frozen, n](double, const std::vector<double>& y,
                                   std::vector<double>& dy) {
    std::vector<double> state(y.begin(), y.begin() + static_cast<long>(n));
    std::vector<double> rhs = mass_action_rhs(sys, state);
    dy.assign(y.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) dy[i] = rhs[i];
    for (std::size_t ui = 0; ui < frozen.size(); ++ui) {
      dy[n + ui] = -rhs[frozen[ui]];  // J^E_i
      dy[frozen[ui]] = 0.0;
    }
  };
  RawTrajectory raw = integrate_raw(f, y0, cfg, n, nullptr);
  return finish_trajectory(sys, std::move(raw), frozen, n_u, n);
}

std::vector<DecompositionSample> energy_decomposition(const KineticSystem& sys,
                                                      const ReductionMap& rmap,
                                                      const FrozenConcentrations& n_u,
                                                      const Trajectory& traj) {
  if (rmap.frozen.empty())
    throw std::invalid_argument("energy_decomposition requires a nonempty frozen set");
  if (!detailed_balance(sys).balanced)
    throw std::invalid_argument("energy_decomposition requires a detailed balanced parent");
  if (!rmap.zero_reduced.empty())
    throw std::invalid_argument(
        "energy_decomposition hypothesis violated: a reaction has zero-V-reduction");
  if (rmap.one_to_one.size() != rmap.n_reduced())
    throw std::invalid_argument(
        "energy_decomposition hypothesis violated: a reduced reaction is not one-to-one");
  if (traj.frozen != rmap.frozen)
    throw std::invalid_argument("trajectory frozen set does not match the reduction");

  const RateFunction red_rates = reduced_rates(sys, rmap, n_u);
  const std::size_t v = rmap.n_reduced();

  std::vector<DecompositionSample> out;
  for (std::size_t s = 0; s + 1 < traj.times.size(); ++s) {
    if (s == 0) continue;
    DecompositionSample smp;
    smp.t = traj.times[s];
    // Three-point centered difference on the (nonuniform) sample grid.
    const double h1 = traj.times[s] - traj.times[s - 1];
    const double h2 = traj.times[s + 1] - traj.times[s];
    smp.df_dt = (h1 * h1 * traj.free_energy[s + 1] +
                 (h2 * h2 - h1 * h1) * traj.free_energy[s] -
                 h2 * h2 * traj.free_energy[s - 1]) /
                (h1 * h2 * (h1 + h2));

    const std::vector<double>& n = traj.states[s];
    // D_R from the reduced rates, products over the kept species only.
    double dr = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      double fwd = red_rates.values[j], bwd = red_rates.values[v + j];
      double logx = std::log(bwd) - std::log(fwd);
      for (std::size_t i = 0; i < rmap.kept.size(); ++i) {
        const long long c = rmap.reduced_columns[j][i];
        if (c == 0) continue;
        const double x = n[rmap.kept[i]];
        if (c < 0)
          fwd *= std::pow(x, static_cast<double>(-c));
        else
          bwd *= std::pow(x, static_cast<double>(c));
        logx += static_cast<double>(c) * (x > 0.0 ? std::log(x) : 0.0);
      }
      dr += (bwd - fwd) * logx;
    }
    smp.reduced_dissipation = dr;

    double jext = 0.0;
    for (std::size_t ui = 0; ui < rmap.frozen.size(); ++ui) {
      const std::size_t sp = rmap.frozen[ui];
      jext += traj.external_flux[s][ui] * (std::log(n[sp]) + traj.energy[sp]);
    }
    smp.external_power = jext;
    smp.residual = std::abs(smp.df_dt + smp.reduced_dissipation - smp.external_power);
    out.push_back(smp);
  }
  return out;
}

double reduced_flux_equivalence(const KineticSystem& sys, const std::vector<std::size_t>& u,
                                const FrozenConcentrations& n_u,
                                const std::vector<double>& n0_v,
                                const SimulationConfig& cfg) {
  const ReductionMap rmap = reduce_network(sys.network(), u);
  const KineticSystem red = reduced_system(sys, rmap, n_u);

  std::vector<double> grid;
  const std::size_t samples = 200;
  for (std::size_t i = 1; i <= samples; ++i)
    grid.push_back(cfg.t_end * static_cast<double>(i) / static_cast<double>(samples));

  SimulationConfig shared = cfg;
  shared.steady_tol = std::numeric_limits<double>::min();  // keep both on the full grid

  const Rhs f_red = [&red](double, const std::vector<double>& y, std::vector<double>& dy) {
    dy = mass_action_rhs(red, y);
  };
  RawTrajectory a = integrate_raw(f_red, n0_v, shared, red.n_species(), &grid);

  const std::size_t n = sys.n_species();
  std::vector<double> y0(n, 0.0);
  for (std::size_t i = 0; i < rmap.kept.size(); ++i) y0[rmap.kept[i]] = n0_v[i];
  for (std::size_t s : rmap.frozen) y0[s] = n_u.at(s);
  const std::vector<std::size_t> frozen = rmap.frozen;
  const Rhs f_flux = [&sys, &frozen](double, const std::vector<double>& y,
                                     std::vector<double>& dy) {
    dy = mass_action_rhs(sys, y);
    for (std::size_t s : frozen) dy[s] = 0.0;
  };
  RawTrajectory b = integrate_raw(f_flux, y0, shared, n, &grid);

  if (a.status == IntegrationStatus::StiffFailure || b.status == IntegrationStatus::StiffFailure)
    throw std::runtime_error("stiff failure during equivalence check");

  double dev = 0.0;
  const std::size_t m = std::min(a.times.size(), b.times.size());
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t i = 0; i < rmap.kept.size(); ++i)
      dev = std::max(dev, std::abs(a.states[s][i] - b.states[s][rmap.kept[i]]));
  }
  return dev;
}

std::optional<std::vector<double>> predicted_flux_limit(const KineticSystem& sys,
                                                        const std::vector<std::size_t>& u,
                                                        const FrozenConcentrations& n_u,
                                                        const std::vector<double>& n0_full) {
  const EnergySolution es = energy_vector(sys);
  const std::size_t n = sys.n_species();
  const std::size_t L = es.gauge_basis.dim();

  // Gauge matching -ln n_U on all frozen coordinates.
  Eigen::MatrixXd a(static_cast<Eigen::Index>(u.size()),
                    static_cast<Eigen::Index>(std::max<std::size_t>(L, 1)));
  a.setZero();
  Eigen::VectorXd d(static_cast<Eigen::Index>(u.size()));
  for (std::size_t r = 0; r < u.size(); ++r) {
    for (std::size_t j = 0; j < L; ++j)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          es.gauge_basis.vectors[j][u[r]].convert_to<double>();
    d(static_cast<Eigen::Index>(r)) = -std::log(n_u.at(u[r])) - es.particular[u[r]];
  }
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(a.cols());
  if (L > 0) mu = a.completeOrthogonalDecomposition().solve(d);
  if ((a * mu - d).lpNorm<Eigen::Infinity>() > 1e-9) return std::nullopt;

  std::vector<double> e = es.particular;
  for (std::size_t j = 0; j < L; ++j)
    for (std::size_t i = 0; i < n; ++i)
      e[i] += mu(static_cast<Eigen::Index>(j)) *
              es.gauge_basis.vectors[j][i].convert_to<double>();

  // Remaining gauge freedom: laws vanishing on U, pinned by conservation of
  // the initial totals. Newton in the residual potentials.
  std::vector<IntVec> zero_on_u;
  {
    std::vector<RatVec> rows;
    for (std::size_t s : u) {
      RatVec row(L);
      for (std::size_t j = 0; j < L; ++j) row[j] = Rational(es.gauge_basis.vectors[j][s]);
      rows.push_back(std::move(row));
    }
    if (L > 0) {
      const ratlin::SubspaceBasis alpha =
          ratlin::nullspace(ratlin::RationalMatrix::from_rows(rows));
      for (const IntVec& av : alpha.vectors) {
        RatVec combo(n, Rational(0));
        for (std::size_t j = 0; j < L; ++j) {
          if (av[j] == 0) continue;
          for (std::size_t i = 0; i < n; ++i)
            combo[i] += Rational(Rational(av[j]) * es.gauge_basis.vectors[j][i]);
        }
        zero_on_u.push_back(ratlin::primitive_normalize(combo));
      }
    }
  }
  if (zero_on_u.empty()) {
    std::vector<double> limit(n);
    for (std::size_t i = 0; i < n; ++i) limit[i] = std::exp(-e[i]);
    return limit;
  }

  const std::size_t K = zero_on_u.size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(n));
  Eigen::VectorXd t(static_cast<Eigen::Index>(K));
  for (std::size_t j = 0; j < K; ++j) {
    double target = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          zero_on_u[j][i].convert_to<double>();
      target += zero_on_u[j][i].convert_to<double>() * n0_full[i];
    }
    t(static_cast<Eigen::Index>(j)) = target;
  }
  Eigen::VectorXd e0(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) e0(static_cast<Eigen::Index>(i)) = e[i];
  Eigen::VectorXd nu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::VectorXd conc = (-(e0 + m.transpose() * nu)).array().exp().matrix();
    const Eigen::VectorXd g = m * conc - t;
    if (g.lpNorm<Eigen::Infinity>() <= 1e-11 * (1.0 + t.lpNorm<Eigen::Infinity>())) {
      std::vector<double> limit(n);
      for (std::size_t i = 0; i < n; ++i) limit[i] = conc(static_cast<Eigen::Index>(i));
      return limit;
    }
    const Eigen::MatrixXd jac = m * conc.asDiagonal() * m.transpose();
    Eigen::VectorXd step = jac.ldlt().solve(g);
    if (!step.allFinite()) return std::nullopt;
    double alpha = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 40; ++bt) {
      const Eigen::VectorXd nu_try = nu + alpha * step;
      const Eigen::VectorXd g_try = m * Eigen::VectorXd((-(e0 + m.transpose() * nu_try)).array().exp().matrix()) - t;
      if (g_try.allFinite() && g_try.norm() < g.norm()) {
        nu = nu_try;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return std::nullopt;
  }
  return std::nullopt;
}

void write_csv(std::ostream& os, const Trajectory& traj,
               const std::vector<std::string>& species) {
  os << "t";
  for (const auto& name : species) os << ",n_" << name;
  os << ",F,D";
  for (std::size_t s : traj.frozen) os << ",JE_" << species[s];
  for (std::size_t s : traj.frozen) os << ",cumJE_" << species[s];
  os << "\n";
  os.precision(17);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << traj.times[i];
    for (double x : traj.states[i]) os << "," << x;
    os << "," << traj.free_energy[i] << "," << traj.dissipation[i];
    if (!traj.frozen.empty()) {
      for (double x : traj.external_flux[i]) os << "," << x;
      for (double x : traj.cumulative_flux[i]) os << "," << x;
    }
    os << "\n";
  }
}

}  // namespace crn
