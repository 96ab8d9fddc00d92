#include "crn/completion.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace crn {

const char* to_string(CompletionStep s) {
  switch (s) {
    case CompletionStep::SourceSink: return "SOURCE_SINK";
    case CompletionStep::Conservativize: return "CONSERVATIVIZE";
    case CompletionStep::CycleBreak: return "CYCLE_BREAK";
  }
  return "?";
}

bool ConstraintSet::contains(std::size_t i) const {
  return std::find(reaction_indices.begin(), reaction_indices.end(), i) !=
         reaction_indices.end();
}

namespace {

std::string aux_name(std::size_t k) { return "_aux" + std::to_string(k); }

/// Extend every reaction with `extra` zero coefficients and add fresh species.
struct Extender {
  std::vector<std::string> species;
  std::vector<Reaction> reactions;
  std::size_t aux_counter;

  explicit Extender(const ChemicalNetwork& net)
      : species(net.species()), reactions(net.reactions()) {
    aux_counter = 0;
    for (const auto& name : species)
      if (name.rfind("_aux", 0) == 0) ++aux_counter;
  }

  std::size_t add_species() {
    species.push_back(aux_name(++aux_counter));
    for (auto& r : reactions) r.coeffs.push_back(0);
    return species.size() - 1;
  }

  ChemicalNetwork network() const { return ChemicalNetwork(species, reactions); }
};

}  // namespace

ChemicalNetwork eliminate_sources_sinks(const ChemicalNetwork& net,
                                        std::vector<ProvenanceEntry>* provenance) {
  if (!net.bidirectional())
    throw std::invalid_argument("completion requires a bidirectional network");
  Extender ext(net);
  const std::vector<std::size_t> rs = nonreverse_set(net);
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const Reaction& rep = net.reaction(rs[k]);
    if (!rep.initial().empty() && !rep.final().empty()) continue;
    const std::size_t a = ext.add_species();
    const std::size_t b = ext.add_species();
    // The source direction (empty reactant set) produces species a and
    // consumes species b; the reverse gets the mirrored coefficients.
    const bool rep_is_source = rep.initial().empty();
    const long long sign = rep_is_source ? 1 : -1;
    ext.reactions[rs[k]].coeffs[a] = sign;
    ext.reactions[rs[k]].coeffs[b] = -sign;
    const std::size_t rev = *net.reverse_index(rs[k]);
    ext.reactions[rev].coeffs[a] = -sign;
    ext.reactions[rev].coeffs[b] = sign;
    if (provenance)
      provenance->push_back({CompletionStep::SourceSink, {a, b}, k});
  }
  return ext.network();
}

namespace {

ChemicalNetwork mirror_uncovered(const ChemicalNetwork& net,
                                 std::vector<ProvenanceEntry>* provenance, bool* falsified) {
  if (!has_sources_or_sinks(net).empty())
    throw std::invalid_argument("make_conservative requires a network without sources/sinks");
  *falsified = false;
  const StructureReport rep = structure(net);
  if (rep.conservative) return net;

  std::vector<std::size_t> uncovered;  // B: species with m(u) = 0 for all laws
  for (std::size_t u = 0; u < net.n_species(); ++u) {
    bool covered = false;
    for (const IntVec& m : rep.conservation_basis.vectors)
      if (m[u] != 0) covered = true;
    if (!covered) uncovered.push_back(u);
  }

  Extender ext(net);
  for (std::size_t u : uncovered) {
    const std::size_t mirror = ext.add_species();
    for (std::size_t ri = 0; ri < ext.reactions.size(); ++ri)
      ext.reactions[ri].coeffs[mirror] = -net.reaction(ri).coeffs[u];
    if (provenance)
      provenance->push_back({CompletionStep::Conservativize, {mirror}, u});
  }
  ChemicalNetwork out = ext.network();

  if (!structure(out).conservative) *falsified = true;
  if (!has_sources_or_sinks(out).empty())
    throw PipelineError("conservativization introduced a source or sink");
  return out;
}

/**
 * Fallback when the mirror construction leaves the network non-conservative
 * (the covering laws need not contain a strictly positive member): append one
 * species whose row is -m^T R for a strictly positive m vanishing on the
 * forbidden columns, so (m, 1) becomes a strictly positive law.
 */
ChemicalNetwork conservativize_total(const ChemicalNetwork& net,
                                     const std::vector<std::size_t>& forbidden_columns,
                                     std::vector<ProvenanceEntry>* provenance) {
  const std::vector<std::size_t> rs = nonreverse_set(net);
  const ratlin::RationalMatrix m = reaction_matrix(net, rs);

  RatVec weights(net.n_species(), Rational(1));
  if (!forbidden_columns.empty()) {
    std::vector<RatVec> rows;
    for (std::size_t f : forbidden_columns) rows.push_back(m.column(f));
    const auto candidate = ratlin::positive_vector_in_span(
        ratlin::nullspace(ratlin::RationalMatrix::from_rows(rows)));
    if (!candidate)
      throw PipelineError(
          "no positive species weighting is orthogonal to the constrained reactions");
    weights = *candidate;
  }
  const IntVec m_int = ratlin::primitive_normalize(weights);

  Extender ext(net);
  const std::size_t tag = ext.add_species();
  for (std::size_t k = 0; k < rs.size(); ++k) {
    Integer t(0);
    for (std::size_t i = 0; i < net.n_species(); ++i)
      t -= m_int[i] * numerator(m(i, k));
    ext.reactions[rs[k]].coeffs[tag] = t.convert_to<long long>();
    const auto rev = net.reverse_index(rs[k]);
    ext.reactions[*rev].coeffs[tag] = -t.convert_to<long long>();
  }
  if (provenance) provenance->push_back({CompletionStep::Conservativize, {tag}, 0});
  ChemicalNetwork out = ext.network();
  if (!structure(out).conservative)
    throw PipelineError("total conservativization failed its post-check");
  return out;
}

/// Steps 2a/2b for the pipeline: mirror, then patch when the mirror's claimed
/// law fails to be strictly positive.
ChemicalNetwork pipeline_conservative(const ChemicalNetwork& net,
                                      const std::vector<std::size_t>& forbidden_columns,
                                      std::vector<ProvenanceEntry>* provenance) {
  bool falsified = false;
  ChemicalNetwork out = mirror_uncovered(net, provenance, &falsified);
  if (falsified) out = conservativize_total(out, forbidden_columns, provenance);
  return out;
}

}  // namespace

ChemicalNetwork make_conservative(const ChemicalNetwork& net,
                                  std::vector<ProvenanceEntry>* provenance) {
  bool falsified = false;
  ChemicalNetwork out = mirror_uncovered(net, provenance, &falsified);
  if (falsified)
    throw PipelineError("conservativization post-check failed: extension is not conservative");
  return out;
}

ChemicalNetwork break_cycles(const ChemicalNetwork& net,
                             const std::vector<std::size_t>& forbidden_columns,
                             std::vector<ProvenanceEntry>* provenance,
                             const std::vector<double>* circuit_log_ratios, double tol) {
  const std::set<std::size_t> forbidden(forbidden_columns.begin(), forbidden_columns.end());
  ChemicalNetwork current = net;
  for (;;) {
    const std::vector<std::size_t> rs = nonreverse_set(current);
    const ratlin::RationalMatrix m = reaction_matrix(current, rs);
    const ratlin::SubspaceBasis kernel = ratlin::nullspace(m);
    if (kernel.empty()) return current;

    // Lowest-index basis cycle; in minimal mode, the lowest one whose circuit
    // sum violates the condition (none violating means the system is already
    // detailed balanced and the remaining cycles may stay).
    std::size_t chosen = kernel.dim();
    for (std::size_t ci = 0; ci < kernel.dim(); ++ci) {
      if (circuit_log_ratios) {
        double s = 0.0;
        for (std::size_t j = 0; j < kernel.vectors[ci].size(); ++j)
          if (kernel.vectors[ci][j] != 0)
            s += kernel.vectors[ci][j].convert_to<double>() * (*circuit_log_ratios)[j];
        if (std::abs(s) <= tol) continue;
      }
      chosen = ci;
      break;
    }
    if (chosen == kernel.dim()) return current;  // minimal mode: all cycles balanced
    const IntVec& cycle = kernel.vectors[chosen];

    // Tag the highest admissible column of the cycle support on its highest
    // participating species row.
    std::size_t col = m.cols();
    for (std::size_t j = m.cols(); j-- > 0;) {
      if (cycle[j] == 0 || forbidden.count(j)) continue;
      col = j;
      break;
    }
    if (col == m.cols())
      throw PipelineError("no admissible column available to break a cycle");
    std::size_t row = m.rows();
    for (std::size_t i = m.rows(); i-- > 0;) {
      if (m(i, col) != 0) {
        row = i;
        break;
      }
    }
    const long long zeta = numerator(m(row, col)).convert_to<long long>();

    Extender ext(current);
    const std::size_t a = ext.add_species();
    const std::size_t b = ext.add_species();
    ext.reactions[rs[col]].coeffs[a] = zeta;
    ext.reactions[rs[col]].coeffs[b] = -zeta;
    const std::size_t rev = *current.reverse_index(rs[col]);
    ext.reactions[rev].coeffs[a] = -zeta;
    ext.reactions[rev].coeffs[b] = zeta;
    if (provenance) {
      ProvenanceEntry entry{CompletionStep::CycleBreak, {a, b}, col};
      provenance->push_back(entry);
    }
    ChemicalNetwork next = ext.network();

    const std::size_t dim_after =
        ratlin::nullspace(reaction_matrix(next, nonreverse_set(next))).dim();
    if (dim_after + 1 != kernel.dim())
      throw PipelineError("cycle break did not drop the kernel dimension by one");
    if (!structure(next).conservative && structure(current).conservative)
      throw PipelineError("cycle break lost conservativeness");
    if (!has_sources_or_sinks(next).empty())
      throw PipelineError("cycle break introduced a source or sink");
    current = std::move(next);
  }
}

namespace {

/// Rates for the completed network: K_c(R) = K(pi_Omega R). Columns are
/// preserved in order by the pipeline, so this is a straight copy.
RateFunction lift_rates(const KineticSystem& sys, const ChemicalNetwork& completed) {
  const ChemicalNetwork& net = sys.network();
  RateFunction out;
  out.values.resize(completed.reactions().size());
  for (std::size_t i = 0; i < completed.reactions().size(); ++i) {
    Reaction projected{std::vector<long long>(completed.reaction(i).coeffs.begin(),
                                              completed.reaction(i).coeffs.begin() +
                                                  static_cast<long long>(net.n_species()))};
    const auto orig = net.find_reaction(projected);
    if (!orig) throw PipelineError("completed reaction does not project onto an original one");
    out.values[i] = sys.rates().values[*orig];
  }
  return out;
}

CompletionResult assemble(const KineticSystem& sys, ChemicalNetwork completed,
                          std::vector<ProvenanceEntry> provenance,
                          const ConstraintSet* constraints, double tol) {
  RateFunction rates = lift_rates(sys, completed);
  CompletionResult res{std::move(completed), std::move(rates), {}, {},
                       std::move(provenance), {}};
  for (std::size_t i = sys.n_species(); i < res.completed_network.n_species(); ++i) {
    res.added_species.push_back(i);
    res.frozen_defaults.values[i] = 1.0;
  }
  res.certificate = verify_completion(sys, res, constraints, tol);
  return res;
}

}  // namespace

CompletionResult complete_closed(const KineticSystem& sys, bool minimal, double tol) {
  std::vector<ProvenanceEntry> provenance;
  ChemicalNetwork stage = eliminate_sources_sinks(sys.network(), &provenance);
  stage = pipeline_conservative(stage, {}, &provenance);
  std::vector<double> log_ratios;
  if (minimal) {
    const std::vector<double> w = sys.energy_rhs();
    log_ratios.assign(w.size(), 0.0);
    for (std::size_t k = 0; k < w.size(); ++k) log_ratios[k] = -w[k];
  }
  stage = break_cycles(stage, {}, &provenance, minimal ? &log_ratios : nullptr, tol);
  return assemble(sys, std::move(stage), std::move(provenance), nullptr, tol);
}

AdmissibleCompletion complete_admissible(const KineticSystem& sys,
                                         const ConstraintSet& constraints, bool minimal,
                                         double tol) {
  const ChemicalNetwork& net = sys.network();
  for (std::size_t i : constraints.reaction_indices) {
    if (i >= net.reactions().size())
      throw std::invalid_argument("constrained reaction index out of range");
    const auto rev = net.reverse_index(i);
    if (rev && !constraints.contains(*rev))
      throw std::invalid_argument("constraint set must be closed under reversal");
  }

  const StructureReport rep = sys.structure();
  const auto& rs = rep.nonreverse_indices;
  std::vector<std::size_t> forbidden_cols;
  for (std::size_t k = 0; k < rs.size(); ++k)
    if (constraints.contains(rs[k])) forbidden_cols.push_back(k);
  const std::set<std::size_t> forbidden(forbidden_cols.begin(), forbidden_cols.end());

  AdmissibleCompletion out;

  // Impossibility: a kernel vector supported on constrained columns whose
  // circuit sum is nonzero can never be balanced by any completion.
  {
    std::vector<RatVec> rows;
    for (std::size_t i = 0; i < rep.matrix.rows(); ++i) rows.push_back(rep.matrix.row(i));
    for (std::size_t k = 0; k < rs.size(); ++k) {
      if (forbidden.count(k)) continue;
      RatVec sel(rs.size(), Rational(0));
      sel[k] = 1;
      rows.push_back(std::move(sel));
    }
    const ratlin::SubspaceBasis constrained_cycles =
        ratlin::nullspace(ratlin::RationalMatrix::from_rows(rows));
    const std::vector<double> w = sys.energy_rhs();
    for (const IntVec& c : constrained_cycles.vectors) {
      double s = 0.0;
      for (std::size_t j = 0; j < c.size(); ++j)
        if (c[j] != 0) s += c[j].convert_to<double>() * w[j];
      if (std::abs(s) > tol) {
        out.status = AdmissibleStatus::Impossible;
        out.blocking_cycle = {c, std::exp(-s)};  // circuit value prod (K_R/K_-R)^c
        return out;
      }
    }
  }

  std::optional<CompletionResult> attempt;
  try {
    std::vector<ProvenanceEntry> provenance;
    ChemicalNetwork stage = eliminate_sources_sinks(net, &provenance);
    stage = pipeline_conservative(stage, forbidden_cols, &provenance);
    std::vector<double> log_ratios;
    if (minimal) {
      const std::vector<double> w = sys.energy_rhs();
      log_ratios.assign(w.size(), 0.0);
      for (std::size_t k = 0; k < w.size(); ++k) log_ratios[k] = -w[k];
    }
    stage = break_cycles(stage, forbidden_cols, &provenance,
                         minimal ? &log_ratios : nullptr, tol);
    attempt = assemble(sys, std::move(stage), std::move(provenance), &constraints, tol);
  } catch (const PipelineError&) {
    out.status = AdmissibleStatus::NotDecided;
    return out;
  }

  out.result = std::move(attempt);
  out.status = out.result->certificate.all_green() ? AdmissibleStatus::Completed
                                                   : AdmissibleStatus::NotDecided;
  return out;
}

CompletionCertificate verify_completion(const KineticSystem& original,
                                        const CompletionResult& candidate,
                                        const ConstraintSet* constraints, double tol) {
  CompletionCertificate cert;
  const ChemicalNetwork& net = original.network();
  const ChemicalNetwork& comp = candidate.completed_network;
  const auto fail = [&cert](const std::string& what) { cert.failures.push_back(what); };

  KineticSystem completed_sys(comp, candidate.completed_rates);

  // pi_Omega reduction reproduces the original network: every original
  // reaction is a one-to-one reduction and nothing projects to zero.
  if (comp.n_species() == net.n_species()) {
    cert.reduction_matches = comp.reactions() == net.reactions();
    cert.rates_roundtrip = candidate.completed_rates.values == original.rates().values;
    if (!cert.reduction_matches) fail("identity completion does not match the original network");
  } else {
    try {
      const ReductionMap rmap = reduce_network(comp, candidate.added_species);
      const std::vector<std::size_t> orig_rs = nonreverse_set(net);
      bool match = rmap.zero_reduced.empty() &&
                   rmap.one_to_one.size() == rmap.n_reduced() &&
                   rmap.n_reduced() == orig_rs.size();
      if (match)
        for (std::size_t k = 0; k < orig_rs.size(); ++k)
          if (rmap.reduced_columns[k] != net.reaction(orig_rs[k]).coeffs) match = false;
      cert.reduction_matches = match;
      if (!match) fail("pi_Omega reduction does not reproduce the original network");

      if (match) {
        const RateFunction roundtrip =
            reduced_rates(completed_sys, rmap, candidate.frozen_defaults);
        RateFunction expected;
        expected.values.reserve(roundtrip.values.size());
        for (std::size_t k = 0; k < orig_rs.size(); ++k)
          expected.values.push_back(original.rates().values[orig_rs[k]]);
        for (std::size_t k = 0; k < orig_rs.size(); ++k)
          expected.values.push_back(
              original.rates().values[*net.reverse_index(orig_rs[k])]);
        cert.rates_roundtrip = roundtrip.values == expected.values;
        if (!cert.rates_roundtrip) fail("rate round-trip at unit frozen defaults failed");
      }
    } catch (const std::exception& e) {
      fail(std::string("reduction of the candidate failed: ") + e.what());
    }
  }

  cert.acyclic = completed_sys.structure().cycle_basis.empty();
  cert.detailed_balanced = detailed_balance(completed_sys, tol).balanced;
  if (!cert.detailed_balanced) fail("completion violates the circuit condition");
  cert.conservative = completed_sys.structure().conservative;
  if (!cert.conservative) fail("completion is not conservative");
  cert.no_sources_sinks = has_sources_or_sinks(comp).empty();
  if (!cert.no_sources_sinks) fail("completion has sources or sinks");

  if (constraints) {
    for (std::size_t i = 0; i < comp.reactions().size(); ++i) {
      Reaction projected{std::vector<long long>(
          comp.reaction(i).coeffs.begin(),
          comp.reaction(i).coeffs.begin() + static_cast<long long>(net.n_species()))};
      if (projected.is_zero()) continue;
      const auto orig = net.find_reaction(projected);
      if (!orig || !constraints->contains(*orig)) continue;
      for (std::size_t s = net.n_species(); s < comp.n_species(); ++s)
        if (comp.reaction(i).coeffs[s] != 0) {
          cert.admissible = false;
          fail("constrained reaction '" + std::to_string(*orig) + "' acquired a new species");
        }
    }
  }
  return cert;
}

}  // namespace crn
