#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crn/ratlin.hpp"

namespace crn {

/**
 * One reaction as a signed stoichiometric vector over the species list.
 * Negative coefficients are consumed species I(R), positive ones produced
 * species F(R); the two sets are disjoint by construction.
 */
struct Reaction {
  std::vector<long long> coeffs;

  std::vector<std::size_t> initial() const;  // I(R)
  std::vector<std::size_t> final() const;    // F(R)
  std::vector<std::size_t> support() const;  // D(R)
  bool is_zero() const;
  Reaction negated() const;

  bool operator==(const Reaction& other) const = default;
};

/**
 * A chemical network: ordered species plus a list of reactions.
 *
 * Construction validates the structural invariants: no zero reaction, no
 * duplicate reaction, every species occurs in at least one reaction, and all
 * reaction vectors have the same length as the species list.
 */
class ChemicalNetwork {
 public:
  ChemicalNetwork(std::vector<std::string> species, std::vector<Reaction> reactions);

  std::size_t n_species() const { return species_.size(); }
  const std::vector<std::string>& species() const { return species_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  const Reaction& reaction(std::size_t i) const { return reactions_[i]; }

  /// True iff -R is present for every reaction R.
  bool bidirectional() const { return bidirectional_; }

  std::optional<std::size_t> find_reaction(const Reaction& r) const;
  /// Index of the reverse of reaction i, if present.
  std::optional<std::size_t> reverse_index(std::size_t i) const;

 private:
  std::vector<std::string> species_;
  std::vector<Reaction> reactions_;
  std::vector<std::optional<std::size_t>> reverse_;
  bool bidirectional_ = false;
};

/**
 * Indices of the non-reverse representatives, one per {R, -R} pair.
 *
 * The representative of a reversible pair is the direction with
 * min I(R) < min F(R); irreversible reactions are always included. Output
 * order follows the input order of the selected representatives.
 */
std::vector<std::size_t> nonreverse_set(const ChemicalNetwork& net);

/// N x |R_s| matrix whose columns are the non-reverse representatives.
ratlin::RationalMatrix reaction_matrix(const ChemicalNetwork& net,
                                       const std::vector<std::size_t>& nonreverse);

/// Reactions violating the no-sources/no-sinks condition (I or F empty).
std::vector<Reaction> has_sources_or_sinks(const ChemicalNetwork& net);

/**
 * Structural invariants of a network: reaction matrix, cycle space,
 * conservation laws, conservativeness with a positive-law witness, the cycle
 * support, and any source/sink reactions.
 */
struct StructureReport {
  std::vector<std::size_t> nonreverse_indices;
  ratlin::RationalMatrix matrix;          // N x |R_s|
  ratlin::SubspaceBasis cycle_basis;      // ker(R)
  ratlin::SubspaceBasis conservation_basis;  // ker(R^T)
  bool conservative = false;
  std::optional<RatVec> positive_law;
  std::set<std::size_t> cycle_support;    // R_s indices touched by the kernel
  std::vector<Reaction> sources_sinks;
  /// Whether the per-species positive-entry check agreed with the LP verdict.
  /// Conservative networks always agree; the reverse implication can fail.
  bool per_species_law_agreement = true;
};

StructureReport structure(const ChemicalNetwork& net);

/// True iff v is an integer combination of reactions (composition accessible from 0).
bool accessible(const ChemicalNetwork& net, const IntVec& v);

/**
 * Extreme rays of the cone M+ = span(conservation) intersected with the
 * nonnegative orthant, by exhaustive support enumeration.
 *
 * Throws std::invalid_argument when the ambient dimension exceeds 16.
 */
std::vector<IntVec> extreme_rays(const ratlin::SubspaceBasis& conservation);

}  // namespace crn
