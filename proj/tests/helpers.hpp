#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "crn/kinetics.hpp"

namespace crn::testing {

inline Reaction rx(std::vector<long long> coeffs) { return Reaction{std::move(coeffs)}; }

inline std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("S" + std::to_string(i + 1));
  return out;
}

/// Bidirectional network from one representative per pair.
inline ChemicalNetwork bidir(std::size_t n_species,
                             const std::vector<std::vector<long long>>& reps) {
  std::vector<Reaction> reactions;
  for (const auto& r : reps) {
    reactions.push_back(rx(r));
    reactions.push_back(rx(r).negated());
  }
  return ChemicalNetwork(names(n_species), std::move(reactions));
}

/// All rates one.
inline KineticSystem unit_rates(const ChemicalNetwork& net) {
  return KineticSystem(net, RateFunction{std::vector<double>(net.reactions().size(), 1.0)});
}

/// The six-species two-cycle network of the reduction examples, pairs in the
/// listed order: S1+S5<->S2, S1+S6<->S2, S2<->S3, S1<->S4, S4+S5<->S3, S4+S6<->S3.
inline ChemicalNetwork six_species_network() {
  return bidir(6, {{-1, 1, 0, 0, -1, 0},
                   {-1, 1, 0, 0, 0, -1},
                   {0, -1, 1, 0, 0, 0},
                   {-1, 0, 0, 1, 0, 0},
                   {0, 0, 1, -1, -1, 0},
                   {0, 0, 1, -1, 0, -1}});
}

/// The printed 6x6 reaction matrix of that network (columns as printed).
inline ratlin::RationalMatrix six_species_printed_matrix() {
  return ratlin::RationalMatrix::from_int_rows({{-1, -1, 0, -1, 0, 0},
                                                {1, 1, -1, 0, 0, 0},
                                                {0, 0, 1, 0, -1, -1},
                                                {0, 0, 0, 1, 1, 1},
                                                {-1, 0, 0, 0, 0, 1},
                                                {0, -1, 0, 0, 1, 0}});
}

/// Unit ring S1<->S2<->S3<->S4<->S1.
inline ChemicalNetwork ring4_network() {
  return bidir(4, {{-1, 1, 0, 0}, {0, -1, 1, 0}, {0, 0, -1, 1}, {-1, 0, 0, 1}});
}

/// Random bidirectional network with every species used. Entries in [-2, 2].
inline ChemicalNetwork random_bidirectional(std::mt19937& rng, std::size_t n_species,
                                            std::size_t max_pairs) {
  std::uniform_int_distribution<int> coeff(-2, 2);
  std::uniform_int_distribution<std::size_t> npairs(1, max_pairs);
  for (;;) {
    std::vector<std::vector<long long>> reps;
    std::set<std::vector<long long>> seen;
    const std::size_t target = npairs(rng);
    for (std::size_t attempt = 0; attempt < 40 && reps.size() < target; ++attempt) {
      std::vector<long long> r(n_species, 0);
      for (auto& c : r) c = coeff(rng);
      bool zero = std::all_of(r.begin(), r.end(), [](long long c) { return c == 0; });
      if (zero) continue;
      std::vector<long long> neg = r;
      for (auto& c : neg) c = -c;
      if (seen.count(r) || seen.count(neg)) continue;
      seen.insert(r);
      reps.push_back(r);
    }
    if (reps.empty()) continue;
    std::vector<bool> used(n_species, false);
    for (const auto& r : reps)
      for (std::size_t i = 0; i < n_species; ++i)
        if (r[i] != 0) used[i] = true;
    if (!std::all_of(used.begin(), used.end(), [](bool b) { return b; })) continue;
    return bidir(n_species, reps);
  }
}

/// Detailed balanced rates induced by a random energy vector.
inline KineticSystem random_db_system(std::mt19937& rng, const ChemicalNetwork& net) {
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  std::uniform_real_distribution<double> energy(-1.0, 1.0);
  std::vector<double> e(net.n_species());
  for (auto& x : e) x = energy(rng);
  std::vector<double> rates(net.reactions().size(), 0.0);
  for (std::size_t i = 0; i < net.reactions().size(); ++i) {
    if (rates[i] != 0.0) continue;
    const Reaction& r = net.reaction(i);
    double re = 0.0;
    for (std::size_t k = 0; k < r.coeffs.size(); ++k)
      re += static_cast<double>(r.coeffs[k]) * e[k];
    const double kf = unif(rng);
    rates[i] = kf;
    if (const auto rev = net.reverse_index(i)) rates[*rev] = kf * std::exp(re);
  }
  return KineticSystem(net, RateFunction{rates});
}

/// Strictly positive random rates without any balance structure.
inline KineticSystem random_rates(std::mt19937& rng, const ChemicalNetwork& net) {
  std::uniform_real_distribution<double> unif(0.2, 2.0);
  std::vector<double> rates(net.reactions().size());
  for (auto& k : rates) k = unif(rng);
  return KineticSystem(net, RateFunction{rates});
}

// ---------------------------------------------------------------------------
// Independent oracles.
// ---------------------------------------------------------------------------

/// Rank as the largest size of a nonzero minor (exact, exponential; tiny only).
std::size_t minor_rank(const ratlin::RationalMatrix& m);

/// Fourier-Motzkin decision of "span has a strictly positive vector" for
/// bases of dimension <= 2 (exact, complete).
bool positive_span_oracle_fm(const ratlin::SubspaceBasis& basis);

/// Exhaustive lattice membership over coefficients lambda in [-10, 10]^cols.
bool lattice_member_bruteforce(const ratlin::RationalMatrix& a, const IntVec& v);

}  // namespace crn::testing
