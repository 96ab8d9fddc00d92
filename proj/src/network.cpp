#include "crn/network.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace crn {

std::vector<std::size_t> Reaction::initial() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] < 0) s.push_back(i);
  return s;
}

std::vector<std::size_t> Reaction::final() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] > 0) s.push_back(i);
  return s;
}

std::vector<std::size_t> Reaction::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] != 0) s.push_back(i);
  return s;
}

bool Reaction::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](long long c) { return c == 0; });
}

Reaction Reaction::negated() const {
  Reaction r = *this;
  for (auto& c : r.coeffs) c = -c;
  return r;
}

ChemicalNetwork::ChemicalNetwork(std::vector<std::string> species,
                                 std::vector<Reaction> reactions)
    : species_(std::move(species)), reactions_(std::move(reactions)) {
  if (reactions_.empty()) throw std::invalid_argument("network needs at least one reaction");
  std::vector<bool> used(species_.size(), false);
  for (std::size_t i = 0; i < reactions_.size(); ++i) {
    const Reaction& r = reactions_[i];
    if (r.coeffs.size() != species_.size())
      throw std::invalid_argument("reaction length does not match species count");
    if (r.is_zero()) throw std::invalid_argument("zero reaction is not allowed");
    for (std::size_t j = 0; j < i; ++j)
      if (reactions_[j] == r) throw std::invalid_argument("duplicate reaction");
    for (std::size_t k = 0; k < r.coeffs.size(); ++k)
      if (r.coeffs[k] != 0) used[k] = true;
  }
  for (std::size_t k = 0; k < used.size(); ++k)
    if (!used[k])
      throw std::invalid_argument("species '" + species_[k] + "' appears in no reaction");

  reverse_.resize(reactions_.size());
  bidirectional_ = true;
  for (std::size_t i = 0; i < reactions_.size(); ++i) {
    reverse_[i] = find_reaction(reactions_[i].negated());
    if (!reverse_[i]) bidirectional_ = false;
  }
}

std::optional<std::size_t> ChemicalNetwork::find_reaction(const Reaction& r) const {
  for (std::size_t i = 0; i < reactions_.size(); ++i)
    if (reactions_[i] == r) return i;
  return std::nullopt;
}

std::optional<std::size_t> ChemicalNetwork::reverse_index(std::size_t i) const {
  return reverse_.at(i);
}

namespace {

// min of an index set with min(empty) = +infinity, matching the tie-break
// convention for source/sink pairs.
std::size_t min_or_inf(const std::vector<std::size_t>& s) {
  return s.empty() ? std::numeric_limits<std::size_t>::max() : s.front();
}

}  // namespace

std::vector<std::size_t> nonreverse_set(const ChemicalNetwork& net) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < net.reactions().size(); ++i) {
    const Reaction& r = net.reaction(i);
    const auto rev = net.reverse_index(i);
    if (!rev) {
      out.push_back(i);
      continue;
    }
    if (min_or_inf(r.initial()) < min_or_inf(r.final())) out.push_back(i);
  }
  return out;
}

ratlin::RationalMatrix reaction_matrix(const ChemicalNetwork& net,
                                       const std::vector<std::size_t>& nonreverse) {
  ratlin::RationalMatrix m(net.n_species(), nonreverse.size());
  for (std::size_t k = 0; k < nonreverse.size(); ++k) {
    const Reaction& r = net.reaction(nonreverse[k]);
    for (std::size_t j = 0; j < net.n_species(); ++j) m(j, k) = r.coeffs[j];
  }
  return m;
}

std::vector<Reaction> has_sources_or_sinks(const ChemicalNetwork& net) {
  std::vector<Reaction> bad;
  for (const Reaction& r : net.reactions())
    if (r.initial().empty() || r.final().empty()) bad.push_back(r);
  return bad;
}

StructureReport structure(const ChemicalNetwork& net) {
  StructureReport rep;
  rep.nonreverse_indices = nonreverse_set(net);
  rep.matrix = reaction_matrix(net, rep.nonreverse_indices);
  rep.cycle_basis = ratlin::nullspace(rep.matrix);
  rep.conservation_basis = ratlin::nullspace(rep.matrix.transposed());
  rep.positive_law = ratlin::positive_vector_in_span(rep.conservation_basis);
  rep.conservative = rep.positive_law.has_value();
  for (const auto& c : rep.cycle_basis.vectors)
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i] != 0) rep.cycle_support.insert(i);
  rep.sources_sinks = has_sources_or_sinks(net);

  // Cross-check against the per-species condition. Conservative networks
  // always pass it; the converse can fail (a species-covering law family with
  // no single strictly positive member), so a mismatch is recorded rather
  // than raised.
  bool per_species = true;
  for (std::size_t j = 0; j < net.n_species(); ++j)
    if (!ratlin::span_has_positive_coordinate(rep.conservation_basis, j)) {
      per_species = false;
      break;
    }
  rep.per_species_law_agreement = (per_species == rep.conservative);
  if (rep.conservative && !per_species)
    throw std::logic_error("a conservative network must pass the per-species law check");
  return rep;
}

bool accessible(const ChemicalNetwork& net, const IntVec& v) {
  if (v.size() != net.n_species()) throw std::invalid_argument("accessible: dimension mismatch");
  std::vector<std::vector<long long>> cols;
  for (const Reaction& r : net.reactions()) cols.push_back(r.coeffs);
  return ratlin::lattice_member(ratlin::RationalMatrix::from_int_columns(cols), v);
}

std::vector<IntVec> extreme_rays(const ratlin::SubspaceBasis& conservation) {
  const std::size_t n = conservation.ambient_dim;
  if (n > 16) throw std::invalid_argument("extreme_rays: ambient dimension exceeds 16");
  std::vector<IntVec> rays;
  if (conservation.empty()) return rays;
  const std::size_t k = conservation.dim();

  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    // W = {y in span : y_i = 0 outside the candidate support}; keep supports
    // whose restriction is one-dimensional.
    std::vector<RatVec> constraint_rows;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) continue;
      RatVec row(k);
      for (std::size_t c = 0; c < k; ++c) row[c] = Rational(conservation.vectors[c][i]);
      constraint_rows.push_back(std::move(row));
    }
    ratlin::SubspaceBasis alpha;
    if (constraint_rows.empty()) {
      if (k != 1) continue;
      alpha.ambient_dim = k;
      alpha.vectors.push_back(IntVec{Integer(1)});
    } else {
      alpha = ratlin::nullspace(ratlin::RationalMatrix::from_rows(constraint_rows));
    }
    if (alpha.dim() != 1) continue;

    RatVec y(n, Rational(0));
    for (std::size_t c = 0; c < k; ++c) {
      if (alpha.vectors[0][c] == 0) continue;
      for (std::size_t i = 0; i < n; ++i)
        y[i] += Rational(Rational(alpha.vectors[0][c]) * conservation.vectors[c][i]);
    }
    bool nonneg = true, nonpos = true;
    for (const auto& x : y) {
      if (x < 0) nonneg = false;
      if (x > 0) nonpos = false;
    }
    if (!nonneg && !nonpos) continue;
    if (nonpos)
      for (auto& x : y) x = Rational(-x);
    IntVec ray = ratlin::primitive_normalize(y);
    // Reject supports that were not minimal and duplicates.
    std::uint32_t supp = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (ray[i] != 0) supp |= (1u << i);
    if (supp != mask) continue;
    if (std::find(rays.begin(), rays.end(), ray) == rays.end()) rays.push_back(ray);
  }
  return rays;
}

}  // namespace crn
