// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "crn/completion.hpp"
#include "crn/dynamics.hpp"
#include "helpers.hpp"

using namespace crn;
using namespace crn::testing;

namespace {

int failures = 0;

struct Criterion {
  std::string label;
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

void finish(Criterion& c, double elapsed_s) {
  std::printf("[%s] %s (%.2fs)%s%s\n", c.ok ? "PASS" : "FAIL", c.label.c_str(), elapsed_s,
              c.ok ? "" : " -- ", c.ok ? "" : c.detail.c_str());
  if (!c.ok) ++failures;
}

void run(const std::string& label, const std::function<void(Criterion&)>& body) {
  Criterion c{label, true, ""};
  const auto start = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.require(false, std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  finish(c, elapsed);
}

IntVec iv(std::vector<long long> v) { return IntVec(v.begin(), v.end()); }

double circuit_value(const KineticSystem& sys, const IntVec& cycle) {
  const auto w = sys.energy_rhs();
  double s = 0.0;
  for (std::size_t j = 0; j < cycle.size(); ++j)
    if (cycle[j] != 0) s += cycle[j].convert_to<double>() * (-w[j]);
  return std::exp(s);
}

double max_circuit_deviation(const KineticSystem& sys) {
  const auto w = sys.energy_rhs();
  double dev = 0.0;
  for (const IntVec& c : sys.structure().cycle_basis.vectors) {
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (c[j] != 0) s += c[j].convert_to<double>() * w[j];
    dev = std::max(dev, std::abs(s));
  }
  return dev;
}

KineticSystem six_variant() {
  ChemicalNetwork net = six_species_network();
  std::vector<double> rates(net.reactions().size(), 1.0);
  rates[*net.find_reaction(rx({0, 0, 1, -1, -1, 0}))] = 2.0;
  rates[*net.find_reaction(rx({0, 0, -1, 1, 1, 0}))] = 2.0;
  return KineticSystem(net, RateFunction{rates});
}

FrozenConcentrations freeze56(double n5, double n6) {
  return FrozenConcentrations{{{4, n5}, {5, n6}}};
}

}  // namespace

int main() {
  std::chrono::steady_clock::time_point suite_start = std::chrono::steady_clock::now();

  run("criterion 1: cycle spaces and cycle projection, exact", [](Criterion& c) {
    const auto start = std::chrono::steady_clock::now();
    const auto small = ratlin::nullspace(
        ratlin::RationalMatrix::from_int_rows({{-1, 2}, {1, -2}}));
    c.require(small.dim() == 1 && small.vectors[0] == iv({2, 1}),
              "kernel of the 2x2 example is not span{(2,1)}");

    const auto big = ratlin::nullspace(six_species_printed_matrix());
    c.require(big.dim() == 2, "six-species kernel dimension is not 2");
    c.require(ratlin::in_span_int(big, iv({1, 1, 2, -2, 1, 1})),
              "(1,1,2,-2,1,1) escapes the six-species kernel");

    const ReductionMap rmap = reduce_network(six_species_network(), {4, 5});
    const CycleProjection proj = project_cycles(rmap);
    IntVec sum(4, Integer(0));
    for (const auto& img : proj.images)
      for (std::size_t j = 0; j < 4; ++j) sum[j] += img[j];
    c.require(sum == iv({2, 2, -2, 2}), "projected cycle is not (2,2,-2,2)");
    c.require(proj.image_equals_reduced_cycles, "p(C) != C_V on the six-species reduction");
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(elapsed < 1.0, "criterion exceeded 1s");
  });

  run("criterion 2: conservation laws by exact LP", [](Criterion& c) {
    const auto start = std::chrono::steady_clock::now();
    const StructureReport closed = structure(bidir(3, {{-1, -1, 2}, {0, 1, -1}}));
    c.require(closed.conservation_basis.dim() == 1 &&
                  closed.conservation_basis.vectors[0] == iv({1, 1, 1}),
              "conservation laws of the closed example are not span{(1,1,1)}");
    c.require(closed.conservative, "closed example not recognized conservative");

    const StructureReport open = structure(bidir(3, {{-1, -1, 1}, {0, 1, -1}}));
    c.require(open.conservation_basis.dim() == 1 &&
                  open.conservation_basis.vectors[0] == iv({0, 1, 1}),
              "conservation laws of the open example are not span{(0,1,1)}");
    c.require(!open.conservative, "open example wrongly conservative");
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(elapsed < 1.0, "criterion exceeded 1s");
  });

  run("criterion 3: reduced rates and the circuit-value formula", [](Criterion& c) {
    const KineticSystem ones = unit_rates(six_species_network());
    const KineticSystem variant = six_variant();
    const ReductionMap rmap = reduce_network(ones.network(), {4, 5});
    const std::size_t v = rmap.n_reduced();

    {
      const RateFunction rr = reduced_rates(ones, rmap, freeze56(0.9, 1.4));
      c.require(std::abs(rr.values[3] - 2.0) <= 1e-12, "all-ones forward rate is not 2");
      c.require(std::abs(rr.values[v + 3] - (0.9 + 1.4)) <= 1e-12,
                "all-ones backward rate is not n5+n6");
    }
    {
      const RateFunction rr = reduced_rates(variant, rmap, freeze56(0.9, 1.4));
      c.require(std::abs(rr.values[3] - 3.0) <= 1e-12, "variant forward rate is not 3");
      c.require(std::abs(rr.values[v + 3] - (1.4 + 2 * 0.9)) <= 1e-12,
                "variant backward rate is not n6+2n5");
    }

    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> conc(0.1, 5.0);
    const IntVec cycle = ratlin::nullspace(rmap.reduced_matrix()).vectors[0];
    for (int i = 0; i < 20; ++i) {
      const double n5 = conc(rng), n6 = conc(rng);
      const KineticSystem red = reduced_system(variant, rmap, freeze56(n5, n6));
      const double expected = 3 * (n5 + n6) / (2 * (n6 + 2 * n5));
      const double got = circuit_value(red, cycle);
      c.require(std::abs(got - expected) <= 1e-12 * std::max(1.0, expected),
                "circuit value deviates from 3(n5+n6)/(2(n6+2n5))");
    }
    for (const double a : {0.3, 1.0, 2.7}) {
      const DbStabilityReport on = db_stability_report(variant, rmap, freeze56(a, a));
      c.require(on.reduced_verdict.balanced, "reduced DB fails on the n5=n6 family");
    }
    for (const auto& [n5, n6] :
         std::vector<std::pair<double, double>>{{1.0, 2.0}, {2.0, 1.0}, {1.0, 1.0 + 1e-6}}) {
      const DbStabilityReport off = db_stability_report(variant, rmap, freeze56(n5, n6));
      c.require(!off.reduced_verdict.balanced && off.verdict == DbStability::NotDb,
                "reduced DB survives off the n5=n6 family");
    }
  });

  run("criterion 4: zero-reduction example balanced iff n1=n4", [](Criterion& c) {
    const KineticSystem ones = unit_rates(six_species_network());
    const ReductionMap rbar = reduce_network(ones.network(), {0, 3});
    const DbStabilityReport on =
        db_stability_report(ones, rbar, FrozenConcentrations{{{0, 1.0}, {3, 1.0}}});
    c.require(on.reduced_verdict.balanced && on.verdict != DbStability::NotDb,
              "reduced DB fails at n1=n4=1");
    const DbStabilityReport off =
        db_stability_report(ones, rbar, FrozenConcentrations{{{0, 1.0}, {3, 2.0}}});
    c.require(!off.reduced_verdict.balanced && off.verdict == DbStability::NotDb,
              "reduced DB survives at n1=1, n4=2");
  });

  run("criterion 5: constrained ring completion and impossibility", [](Criterion& c) {
    ChemicalNetwork ring = ring4_network();
    std::vector<double> rates(ring.reactions().size(), 1.0);
    rates[0] = 2.0;
    const KineticSystem sys(ring, RateFunction{rates});

    const AdmissibleCompletion res = complete_admissible(sys, ConstraintSet{{2, 3}});
    c.require(res.status == AdmissibleStatus::Completed, "constrained completion failed");
    if (res.result) {
      const auto m = reaction_matrix(res.result->completed_network,
                                     nonreverse_set(res.result->completed_network));
      const auto expected = ratlin::RationalMatrix::from_int_rows({{-1, 0, 0, -1},
                                                                   {1, -1, 0, 0},
                                                                   {0, 1, -1, 0},
                                                                   {0, 0, 1, 1},
                                                                   {0, 0, 0, 1},
                                                                   {0, 0, 0, -1}});
      c.require(m == expected, "completed matrix differs from the expected 6x4 form");
      c.require(res.result->certificate.all_green(), "certificate not all green");
    }

    const AdmissibleCompletion blocked =
        complete_admissible(sys, ConstraintSet{{0, 1, 2, 3, 4, 5, 6, 7}});
    c.require(blocked.status == AdmissibleStatus::Impossible,
              "fully constrained ring not reported impossible");
    if (blocked.blocking_cycle) {
      const auto& [cycle, value] = *blocked.blocking_cycle;
      for (const auto& x : sys.structure().matrix.apply(RatVec(cycle.begin(), cycle.end())))
        c.require(x == 0, "impossibility certificate is not a cycle");
      c.require(std::abs(std::log(value)) > kDbTolDefault,
                "impossibility certificate satisfies the circuit condition");
      const double replay = std::abs(std::log(circuit_value(sys, cycle)));
      c.require(replay > kDbTolDefault, "certificate replay failed");
    } else {
      c.require(false, "missing impossibility certificate");
    }
  });

  run("criterion 6: 200 fuzzed closed completions, certified", [](Criterion& c) {
    std::mt19937 rng(4242);
    for (int done = 0; done < 200; ++done) {
      const ChemicalNetwork net = random_bidirectional(rng, 2 + done % 5, 2 + done % 7);
      const KineticSystem sys = random_rates(rng, net);
      const CompletionResult res = complete_closed(sys);
      c.require(res.certificate.all_green(),
                "completion certificate not green on a fuzzed network");
      c.require(res.certificate.acyclic, "fuzzed completion kept a cycle");
      if (!c.ok) break;
    }
  });

  run("criterion 7: 100 fuzzed systems, circuit verdict vs energy residual",
      [](Criterion& c) {
        std::mt19937 rng(515151);
        for (int done = 0; done < 100; ++done) {
          const ChemicalNetwork net = random_bidirectional(rng, 2 + done % 5, 5);
          const KineticSystem sys =
              done % 3 == 2 ? random_rates(rng, net) : random_db_system(rng, net);
          const bool balanced = detailed_balance(sys).balanced;
          const EnergySolution es = energy_vector(sys);
          c.require(balanced == (es.residual <= 1e-9),
                    "circuit verdict and energy residual disagree");
          if (balanced) {
            std::vector<double> ss(net.n_species());
            for (std::size_t i = 0; i < ss.size(); ++i) ss[i] = std::exp(-es.particular[i]);
            const double scale = 1.0 + sys.rates().norm();
            for (double r : mass_action_rhs(sys, ss))
              c.require(std::abs(r) <= 1e-10 * scale, "steady state does not zero the rhs");
          }
          if (!c.ok) break;
        }
      });

  run("criterion 8: stable-topology reductions stay balanced", [](Criterion& c) {
    std::mt19937 rng(777);
    // Instances whose reductions satisfy the three topological conditions:
    // chains, a triangle with a frozen pendant, and filtered random draws.
    struct Instance {
      ChemicalNetwork net;
      std::vector<std::size_t> frozen;
    };
    std::vector<Instance> instances;
    instances.push_back({bidir(4, {{-1, 1, 0, 0}, {0, -1, 1, 0}, {0, 0, -1, 1}}), {3}});
    instances.push_back(
        {bidir(5, {{-1, 1, 0, 0, 0}, {0, -1, 1, 0, 0}, {-1, 0, 1, 0, 0},
                   {0, 0, -1, 1, 0}, {0, 0, 0, -1, 1}}),
         {4}});
    while (instances.size() < 10) {
      const ChemicalNetwork net =
          random_bidirectional(rng, 3 + instances.size() % 3, 5);
      std::uniform_int_distribution<std::size_t> pick(0, net.n_species() - 1);
      const std::vector<std::size_t> u{pick(rng)};
      try {
        const ReductionMap rmap = reduce_network(net, u);
        const DbStabilityReport probe = db_stability_report(
            random_db_system(rng, net), rmap, FrozenConcentrations{{{u[0], 1.0}}});
        if (probe.all_cycle_reactions_one_to_one && probe.no_zero_reduction_in_cycles &&
            probe.projected_cycles_equal)
          instances.push_back({net, u});
      } catch (const std::invalid_argument&) {
      }
    }
    std::uniform_real_distribution<double> conc(0.1, 5.0);
    for (int draw = 0; draw < 100; ++draw) {
      const Instance& inst = instances[draw % instances.size()];
      const KineticSystem sys = random_db_system(rng, inst.net);
      const ReductionMap rmap = reduce_network(inst.net, inst.frozen);
      FrozenConcentrations n_u;
      for (std::size_t s : inst.frozen) n_u.values[s] = conc(rng);
      const DbStabilityReport rep = db_stability_report(sys, rmap, n_u);
      c.require(rep.verdict == DbStability::StableDb,
                "topologically protected reduction not classified stable");
      c.require(rep.reduced_verdict.balanced,
                "topologically protected reduction lost detailed balance");
      if (!c.ok) break;
    }
  });

  run("criterion 9: perturbation witnesses off equilibrium", [](Criterion& c) {
    const double delta = 1e-2;
    std::mt19937 rng(999);
    std::uniform_real_distribution<double> conc(0.3, 3.0);
    const KineticSystem ones = unit_rates(six_species_network());
    const ReductionMap merged = reduce_network(ones.network(), {4, 5});
    const ReductionMap zeroed = reduce_network(ones.network(), {0, 3});
    int produced = 0;
    for (int i = 0; i < 10; ++i) {
      double n5 = conc(rng), n6 = conc(rng);
      if (std::abs(n5 - n6) < 0.1) n6 += 0.5;
      const std::vector<std::pair<const ReductionMap*, FrozenConcentrations>> cases{
          {&merged, freeze56(n5, n6)},
          {&zeroed, FrozenConcentrations{{{0, n5}, {3, n6}}}}};
      for (const auto& [rmap, n_u] : cases) {
        const DbStabilityReport rep = db_stability_report(ones, *rmap, n_u);
        if (rep.verdict != DbStability::DbFineTuned) continue;
        const auto witness = perturbation_witness(ones, *rmap, n_u, delta);
        c.require(witness.has_value(), "no witness on a fine-tuned off-equilibrium instance");
        if (!witness) continue;
        ++produced;
        double dist = 0.0;
        for (std::size_t k = 0; k < witness->values.size(); ++k)
          dist = std::max(dist, std::abs(witness->values[k] - ones.rates().values[k]));
        c.require(dist < delta, "witness strays beyond delta");
        const KineticSystem perturbed(ones.network(), *witness);
        c.require(detailed_balance(perturbed).balanced, "witness broke the parent balance");
        const KineticSystem red = reduced_system(perturbed, *rmap, n_u);
        c.require(max_circuit_deviation(red) > 1e-8,
                  "witness left the reduced circuits within tolerance");
      }
      if (!c.ok) break;
    }
    c.require(produced >= 10, "too few witness instances exercised");
  });

  run("criterion 10: dynamics, fluxes and the free-energy balance", [](Criterion& c) {
    // Closed detailed-balanced runs.
    std::mt19937 rng(31337);
    const std::vector<KineticSystem> closed_systems = {
        KineticSystem(bidir(2, {{-1, 1}}), RateFunction{{1.0, 1.0}}),
        random_db_system(rng, bidir(3, {{-1, -1, 2}, {0, 1, -1}})),
    };
    const std::vector<std::vector<double>> inits = {{2.0, 0.0}, {1.2, 0.4, 0.3}};
    for (std::size_t k = 0; k < closed_systems.size(); ++k) {
      const KineticSystem& sys = closed_systems[k];
      SimulationConfig cfg;
      cfg.t_end = 400.0;
      const Trajectory traj = integrate(sys, inits[k], cfg);
      c.require(traj.status != IntegrationStatus::StiffFailure, "closed run went stiff");
      for (std::size_t s = 0; s + 1 < traj.free_energy.size(); ++s)
        c.require(traj.free_energy[s + 1] <= traj.free_energy[s] + 1e-8,
                  "free energy increased beyond slack");
      for (double d : traj.conservation_residual)
        c.require(d <= 1e-8, "conservation drift beyond 1e-8");
      std::vector<std::pair<IntVec, double>> targets;
      for (const auto& m : sys.structure().conservation_basis.vectors) {
        double t = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i)
          t += m[i].convert_to<double>() * inits[k][i];
        targets.emplace_back(m, t);
      }
      const auto gauge = gauge_fix_energy(sys, targets);
      c.require(gauge.has_value(), "gauge fixing failed");
      if (gauge)
        for (std::size_t i = 0; i < inits[k].size(); ++i)
          c.require(std::abs(traj.final_state()[i] - std::exp(-(*gauge)[i])) <= 1e-6,
                    "closed run missed the gauge-fixed steady state");
    }

    // Frozen-flux three-chain.
    const KineticSystem chain = unit_rates(bidir(3, {{-1, 1, 0}, {0, -1, 1}}));
    SimulationConfig cfg;
    cfg.t_end = 80.0;
    cfg.max_step = 5e-3;
    const FrozenConcentrations n_u{{{0, 2.0}}};
    const Trajectory traj = integrate_with_fluxes(chain, {0}, n_u, {0.3, 0.7}, cfg);
    for (std::size_t i = 0; i < 3; ++i)
      c.require(std::abs(traj.final_state()[i] - 2.0) <= 1e-6, "fluxed chain missed (2,2,2)");
    const double mass_change = (traj.final_state()[0] + traj.final_state()[1] +
                                traj.final_state()[2]) - (2.0 + 0.3 + 0.7);
    c.require(std::abs(traj.cumulative_flux.back()[0] - mass_change) <= 1e-6,
              "cumulative flux does not account for the conserved total");
    for (double d : traj.conservation_residual)
      c.require(d <= 1e-6, "fluxed conservation bookkeeping drifted");

    const double dev = reduced_flux_equivalence(chain, {0}, n_u, {0.3, 0.7}, cfg);
    c.require(dev <= 10 * (cfg.rel_tol * 2.0 + cfg.abs_tol),
              "reduced and fluxed trajectories diverged");

    const ReductionMap rmap = reduce_network(chain.network(), {0});
    const auto samples = energy_decomposition(chain, rmap, n_u, traj);
    c.require(!samples.empty(), "no decomposition samples");
    for (const auto& s : samples)
      c.require(s.residual <= std::max(1e-6, 1e-3 * std::abs(s.df_dt)),
                "free-energy balance residual out of tolerance");
  });

  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
  std::printf("%d criterion(s) failed; total %.1fs\n", failures, total);
  if (total >= 60.0) {
    std::printf("[FAIL] suite runtime budget: %.1fs >= 60s\n", total);
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
