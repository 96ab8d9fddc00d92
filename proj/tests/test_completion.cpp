#include <doctest.h>

#include <random>

#include "crn/completion.hpp"
#include "helpers.hpp"

using namespace crn;
using namespace crn::testing;

namespace {

KineticSystem ring4_nondb() {
  ChemicalNetwork net = ring4_network();
  std::vector<double> rates(net.reactions().size(), 1.0);
  rates[0] = 2.0;  // S1 -> S2 faster than its reverse: circuit value 2
  return KineticSystem(net, RateFunction{rates});
}

}  // namespace

TEST_CASE("eliminate sources and sinks") {
  const ChemicalNetwork clean = bidir(2, {{-1, 1}});
  CHECK(eliminate_sources_sinks(clean).n_species() == 2);
  CHECK(eliminate_sources_sinks(ring4_network()).n_species() == 4);

  // A pure source pair gains two species, the source direction producing the
  // first and consuming the second.
  const ChemicalNetwork source = bidir(2, {{1, 0}, {0, -1}});
  std::vector<ProvenanceEntry> prov;
  const ChemicalNetwork fixed = eliminate_sources_sinks(source, &prov);
  CHECK(fixed.n_species() == 6);
  CHECK(prov.size() == 2);
  CHECK(has_sources_or_sinks(fixed).empty());
  CHECK(fixed.find_reaction(rx({1, 0, 1, -1, 0, 0})).has_value());
  const ChemicalNetwork one_source = bidir(3, {{1, 0, 0}, {0, -1, 1}});
  CHECK(eliminate_sources_sinks(one_source).n_species() == 5);
}

TEST_CASE("make conservative") {
  const ChemicalNetwork closed = bidir(3, {{-1, 1, 0}, {0, -1, 1}});
  CHECK(make_conservative(closed).n_species() == 3);

  const ChemicalNetwork open = bidir(3, {{-1, -1, 1}, {0, 1, -1}});
  std::vector<ProvenanceEntry> prov;
  const ChemicalNetwork fixed = make_conservative(open, &prov);
  CHECK(fixed.n_species() == 4);  // one mirror species for the law-free block
  CHECK(prov.size() == 1);
  CHECK(structure(fixed).conservative);
  CHECK(has_sources_or_sinks(fixed).empty());
  CHECK_THROWS_AS(make_conservative(bidir(2, {{1, 0}, {0, -1}})), std::invalid_argument);
}

TEST_CASE("the mirror construction alone can fail and the pipeline recovers") {
  // All species are covered by laws but no positive law exists, so the mirror
  // step has nothing to add and reports the falsification; the full pipeline
  // still closes the system with one extra species.
  const ChemicalNetwork net = bidir(3, {{1, -1, 1}, {0, 2, -1}});
  CHECK_THROWS_AS(make_conservative(net), PipelineError);
  const KineticSystem sys(net, RateFunction{{1.0, 2.0, 0.5, 1.0}});
  const CompletionResult res = complete_closed(sys);
  CHECK(res.certificate.all_green());
  CHECK(verify_completion(sys, res).all_green());

  // Constrained variant: the second pair must stay untouched.
  const auto a = net.find_reaction(rx({0, 2, -1}));
  const auto b = net.find_reaction(rx({0, -2, 1}));
  const AdmissibleCompletion adm = complete_admissible(sys, ConstraintSet{{*a, *b}});
  REQUIRE(adm.status == AdmissibleStatus::Completed);
  CHECK(adm.result->certificate.all_green());
}

TEST_CASE("break cycles on the constrained ring reproduces the known matrix") {
  std::vector<ProvenanceEntry> prov;
  const ChemicalNetwork completed = break_cycles(ring4_network(), {1}, &prov);
  REQUIRE(completed.n_species() == 6);
  REQUIRE(prov.size() == 1);
  CHECK(prov[0].step == CompletionStep::CycleBreak);
  const auto m = reaction_matrix(completed, nonreverse_set(completed));
  const auto expected = ratlin::RationalMatrix::from_int_rows({{-1, 0, 0, -1},
                                                               {1, -1, 0, 0},
                                                               {0, 1, -1, 0},
                                                               {0, 0, 1, 1},
                                                               {0, 0, 0, 1},
                                                               {0, 0, 0, -1}});
  CHECK(m == expected);
  CHECK(ratlin::nullspace(m).empty());
}

TEST_CASE("break cycles leaves acyclic networks alone and kills parallel pairs") {
  const ChemicalNetwork chain = bidir(3, {{-1, 1, 0}, {0, -1, 1}});
  CHECK(break_cycles(chain, {}).n_species() == 3);

  std::vector<ProvenanceEntry> prov;
  const ChemicalNetwork twin = bidir(2, {{-1, 1}, {-2, 2}});
  const ChemicalNetwork fixed = break_cycles(twin, {}, &prov);
  CHECK(fixed.n_species() == 4);
  CHECK(prov.size() == 1);
  CHECK(ratlin::nullspace(reaction_matrix(fixed, nonreverse_set(fixed))).empty());
}

TEST_CASE("break cycles reports no admissible progress on fully frozen cycles") {
  CHECK_THROWS_AS(break_cycles(ring4_network(), {0, 1, 2, 3}), PipelineError);
}

TEST_CASE("closed completion of worked systems") {
  // Already closed and acyclic: identity completion.
  const KineticSystem chain = unit_rates(bidir(3, {{-1, 1, 0}, {0, -1, 1}}));
  const CompletionResult id = complete_closed(chain);
  CHECK(id.added_species.empty());
  CHECK(id.certificate.all_green());

  const KineticSystem triangle(bidir(3, {{-1, 1, 0}, {0, -1, 1}, {-1, 0, 1}}),
                               RateFunction{{2.0, 1.0, 1.0, 1.0, 1.0, 1.0}});
  CHECK(!detailed_balance(triangle).balanced);
  const CompletionResult tri = complete_closed(triangle);
  CHECK(tri.certificate.all_green());
  CHECK(tri.certificate.acyclic);

  const CompletionResult ring = complete_closed(ring4_nondb());
  CHECK(ring.certificate.all_green());
  CHECK(verify_completion(ring4_nondb(), ring).all_green());
}

TEST_CASE("minimal mode keeps balanced cycles") {
  // Balanced ring: nothing to break; the completion keeps the cycle and is
  // still closed because the circuit condition already holds.
  const KineticSystem balanced = unit_rates(ring4_network());
  const CompletionResult res = complete_closed(balanced, /*minimal=*/true);
  CHECK(res.added_species.empty());
  CHECK(res.certificate.all_green());
  CHECK(!res.certificate.acyclic);

  const CompletionResult full = complete_closed(balanced, /*minimal=*/false);
  CHECK(full.certificate.all_green());
  CHECK(full.certificate.acyclic);

  // Non-balanced ring still gets its cycle removed in minimal mode.
  const CompletionResult fixed = complete_closed(ring4_nondb(), /*minimal=*/true);
  CHECK(fixed.certificate.all_green());
}

TEST_CASE("admissible completion of the constrained ring") {
  const KineticSystem sys = ring4_nondb();
  const AdmissibleCompletion res = complete_admissible(sys, ConstraintSet{{2, 3}});
  REQUIRE(res.status == AdmissibleStatus::Completed);
  REQUIRE(res.result.has_value());
  CHECK(res.result->certificate.all_green());
  CHECK(res.result->completed_network.n_species() == 6);
  // The constrained reaction kept its exact coefficients.
  CHECK(res.result->completed_network.find_reaction(rx({0, -1, 1, 0, 0, 0})).has_value());

  const AdmissibleCompletion blocked =
      complete_admissible(sys, ConstraintSet{{0, 1, 2, 3, 4, 5, 6, 7}});
  REQUIRE(blocked.status == AdmissibleStatus::Impossible);
  REQUIRE(blocked.blocking_cycle.has_value());
  // Certificate replay: the cycle is supported on constrained columns only and
  // its circuit value stays away from one.
  const auto& [cycle, circuit] = *blocked.blocking_cycle;
  CHECK(std::abs(std::log(circuit)) > kDbTolDefault);
  const auto m = sys.structure().matrix;
  for (const auto& x : m.apply(RatVec(cycle.begin(), cycle.end()))) CHECK(x == 0);
}

TEST_CASE("admissible completion via the sufficient conditions") {
  // Constrained reaction outside every cycle, with conserved species only.
  const ChemicalNetwork net =
      bidir(5, {{-1, 1, 0, 0, 0}, {0, -1, 1, 0, 0}, {-1, 0, 1, 0, 0},
                {0, 0, -1, 1, 0}, {0, 0, 0, -1, 1}});
  std::vector<double> rates(net.reactions().size(), 1.0);
  rates[0] = 2.0;  // break the triangle circuit
  const KineticSystem sys(net, RateFunction{rates});
  CHECK(!detailed_balance(sys).balanced);
  const auto pair_a = net.find_reaction(rx({0, 0, 0, -1, 1}));
  const auto pair_b = net.find_reaction(rx({0, 0, 0, 1, -1}));
  const AdmissibleCompletion res =
      complete_admissible(sys, ConstraintSet{{*pair_a, *pair_b}});
  REQUIRE(res.status == AdmissibleStatus::Completed);
  CHECK(res.result->certificate.all_green());
}

TEST_CASE("constraint sets must be closed under reversal") {
  CHECK_THROWS_AS(complete_admissible(ring4_nondb(), ConstraintSet{{2}}),
                  std::invalid_argument);
}

TEST_CASE("verify_completion flags corrupted candidates") {
  const KineticSystem sys = ring4_nondb();
  CompletionResult good = complete_closed(sys);
  REQUIRE(good.certificate.all_green());

  // Injecting a new species into a constrained reaction breaks admissibility.
  const ConstraintSet constraints{{2, 3}};
  CompletionResult tampered = good;
  {
    auto reactions = tampered.completed_network.reactions();
    auto species = tampered.completed_network.species();
    const auto idx = *tampered.completed_network.find_reaction(
        rx({0, -1, 1, 0, 0, 0}));
    const auto rev = *tampered.completed_network.reverse_index(idx);
    reactions[idx].coeffs[4] += 1;
    reactions[rev].coeffs[4] -= 1;
    tampered.completed_network = ChemicalNetwork(species, reactions);
  }
  const CompletionCertificate cert = verify_completion(sys, tampered, &constraints);
  CHECK(!cert.admissible);
  CHECK(!cert.all_green());

  // Dropping a reaction breaks the round trip.
  CompletionResult dropped = good;
  {
    auto reactions = dropped.completed_network.reactions();
    reactions.erase(reactions.begin(), reactions.begin() + 2);
    dropped.completed_network = ChemicalNetwork(dropped.completed_network.species(), reactions);
    dropped.completed_rates.values.erase(dropped.completed_rates.values.begin(),
                                         dropped.completed_rates.values.begin() + 2);
  }
  CHECK(!verify_completion(sys, dropped).reduction_matches);
}

TEST_CASE("fuzzed closed completions are certified and round-trip") {
  std::mt19937 rng(73);
  int done = 0;
  while (done < 60) {
    const ChemicalNetwork net = random_bidirectional(rng, 2 + done % 5, 2 + done % 7);
    const KineticSystem sys = random_rates(rng, net);
    const CompletionResult res = complete_closed(sys);
    CHECK(res.certificate.all_green());
    CHECK(res.certificate.acyclic);
    // Acyclic completions are balanced for any rates: re-randomize.
    const KineticSystem rerated(res.completed_network,
                                random_rates(rng, res.completed_network).rates());
    CHECK(detailed_balance(rerated).balanced);
    ++done;
  }
}
