#include "crn/reduction.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace crn {

double FrozenConcentrations::at(std::size_t species) const {
  const auto it = values.find(species);
  if (it == values.end()) throw std::invalid_argument("missing frozen concentration");
  return it->second;
}

std::vector<long long> ReductionMap::project(const Reaction& r) const {
  std::vector<long long> p(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) p[i] = r.coeffs[kept[i]];
  return p;
}

ratlin::RationalMatrix ReductionMap::reduced_matrix() const {
  return ratlin::RationalMatrix::from_int_columns(reduced_columns);
}

namespace {

std::vector<long long> negate_ll(const std::vector<long long>& v) {
  std::vector<long long> w = v;
  for (auto& x : w) x = -x;
  return w;
}

bool is_zero_ll(const std::vector<long long>& v) {
  return std::all_of(v.begin(), v.end(), [](long long x) { return x == 0; });
}

}  // namespace

ReductionMap reduce_network(const ChemicalNetwork& net, const std::vector<std::size_t>& u) {
  std::set<std::size_t> uset(u.begin(), u.end());
  if (uset.empty() || uset.size() >= net.n_species())
    throw std::invalid_argument("frozen set must be a nonempty proper subset of the species");
  for (std::size_t s : uset)
    if (s >= net.n_species()) throw std::invalid_argument("frozen species index out of range");

  ReductionMap rmap{net,
                    std::vector<std::size_t>(uset.begin(), uset.end()),
                    {},
                    net,  // placeholder, replaced below
                    {},
                    {},
                    {},
                    {},
                    {}};
  for (std::size_t i = 0; i < net.n_species(); ++i)
    if (!uset.count(i)) rmap.kept.push_back(i);

  rmap.parent_nonreverse = nonreverse_set(net);
  const bool bidir = net.bidirectional();

  for (std::size_t k = 0; k < rmap.parent_nonreverse.size(); ++k) {
    const std::vector<long long> p = rmap.project(net.reaction(rmap.parent_nonreverse[k]));
    if (is_zero_ll(p)) {
      rmap.zero_reduced.push_back(k);
      continue;
    }
    bool merged = false;
    for (std::size_t j = 0; j < rmap.reduced_columns.size() && !merged; ++j) {
      if (p == rmap.reduced_columns[j]) {
        rmap.preimages[j].emplace_back(k, +1);
        merged = true;
      } else if (bidir && p == negate_ll(rmap.reduced_columns[j])) {
        rmap.preimages[j].emplace_back(k, -1);
        merged = true;
      }
    }
    if (!merged) {
      rmap.reduced_columns.push_back(p);
      rmap.preimages.push_back({{k, +1}});
    }
  }
  if (rmap.reduced_columns.empty())
    throw std::invalid_argument("every reaction projects to zero; reduced network is empty");

  for (std::size_t j = 0; j < rmap.reduced_columns.size(); ++j)
    if (rmap.preimages[j].size() == 1) rmap.one_to_one.push_back(j);

  std::vector<std::string> names;
  names.reserve(rmap.kept.size());
  for (std::size_t s : rmap.kept) names.push_back(net.species()[s]);
  std::vector<Reaction> reactions;
  for (const auto& c : rmap.reduced_columns) reactions.push_back(Reaction{c});
  if (bidir)
    for (const auto& c : rmap.reduced_columns) reactions.push_back(Reaction{negate_ll(c)});
  rmap.reduced = ChemicalNetwork(std::move(names), std::move(reactions));
  return rmap;
}

namespace {

/// Khat: the parent rate with frozen reactant concentrations absorbed.
double khat(const Reaction& r, double rate, const std::vector<std::size_t>& frozen,
            const FrozenConcentrations& n_u) {
  double k = rate;
  for (std::size_t s : frozen)
    if (r.coeffs[s] < 0)
      for (long long e = 0; e < -r.coeffs[s]; ++e) k *= n_u.at(s);
  return k;
}

}  // namespace

RateFunction reduced_rates(const KineticSystem& sys, const ReductionMap& rmap,
                           const FrozenConcentrations& n_u) {
  const ChemicalNetwork& net = sys.network();
  for (std::size_t s : rmap.frozen)
    if (!(n_u.at(s) > 0.0))
      throw std::invalid_argument("frozen concentrations must be strictly positive");

  const std::size_t v = rmap.n_reduced();
  std::vector<double> forward(v, 0.0), backward(v, 0.0);
  for (std::size_t j = 0; j < v; ++j) {
    for (const auto& [k, sign] : rmap.preimages[j]) {
      const std::size_t ri = rmap.parent_nonreverse[k];
      const Reaction& r = net.reaction(ri);
      const double kf = khat(r, sys.rates().values[ri], rmap.frozen, n_u);
      double kr = 0.0;
      const auto rev = net.reverse_index(ri);
      if (rev) kr = khat(r.negated(), sys.rates().values[*rev], rmap.frozen, n_u);
      if (sign > 0) {
        forward[j] += kf;
        backward[j] += kr;
      } else {
        forward[j] += kr;
        backward[j] += kf;
      }
    }
  }

  // For one-to-one reductions the rate ratio obeys the closed-form identity
  // K_{-Rbar}/K_Rbar = (K_{-R}/K_R) prod_{s in U} n_s^{R(s)}.
  if (net.bidirectional()) {
    for (std::size_t j : rmap.one_to_one) {
      const auto [k, sign] = rmap.preimages[j].front();
      const std::size_t ri = rmap.parent_nonreverse[k];
      const Reaction r = sign > 0 ? net.reaction(ri) : net.reaction(ri).negated();
      const double kf_parent =
          sign > 0 ? sys.rates().values[ri] : sys.rates().values[*net.reverse_index(ri)];
      const double kr_parent =
          sign > 0 ? sys.rates().values[*net.reverse_index(ri)] : sys.rates().values[ri];
      double frozen_factor = 1.0;
      for (std::size_t s : rmap.frozen)
        frozen_factor *= std::pow(n_u.at(s), static_cast<double>(r.coeffs[s]));
      const double lhs = backward[j] / forward[j];
      const double rhs = kr_parent / kf_parent * frozen_factor;
      if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, std::abs(rhs)))
        throw std::logic_error("one-to-one reduced rate identity violated");
    }
  }

  RateFunction out;
  out.values = forward;
  if (net.bidirectional()) out.values.insert(out.values.end(), backward.begin(), backward.end());
  return out;
}

KineticSystem reduced_system(const KineticSystem& sys, const ReductionMap& rmap,
                             const FrozenConcentrations& n_u) {
  return KineticSystem(rmap.reduced, reduced_rates(sys, rmap, n_u));
}

CycleProjection project_cycles(const ReductionMap& rmap) {
  const ratlin::SubspaceBasis& cycles =
      structure(rmap.parent).cycle_basis;  // parent C, canonical
  const ratlin::RationalMatrix reduced_m = rmap.reduced_matrix();
  const ratlin::SubspaceBasis reduced_cycles = ratlin::nullspace(reduced_m);

  CycleProjection out;
  const std::size_t v = rmap.n_reduced();
  for (const IntVec& c : cycles.vectors) {
    IntVec img(v, Integer(0));
    for (std::size_t j = 0; j < v; ++j)
      for (const auto& [k, sign] : rmap.preimages[j]) img[j] += Integer(sign) * c[k];
    out.images.push_back(std::move(img));
  }
  out.image_span = ratlin::span_basis_int(v, out.images);

  out.image_in_reduced_cycles = true;
  for (const IntVec& img : out.images) {
    const RatVec prod = reduced_m.apply(RatVec(img.begin(), img.end()));
    for (const auto& x : prod)
      if (x != 0) out.image_in_reduced_cycles = false;
  }
  if (!out.image_in_reduced_cycles)
    throw std::logic_error("projected cycle escaped the reduced cycle space");
  out.image_equals_reduced_cycles = ratlin::subspace_equal(out.image_span, reduced_cycles);

  if (rmap.zero_reduced.empty() && rmap.one_to_one.size() == v) {
    // |R_V| = |R|: the reduced columns are the projections in order, so the
    // two cycle spaces share coordinates and can be compared directly.
    out.parent_in_reduced = ratlin::subspace_contained(cycles, reduced_cycles);
    std::vector<std::vector<long long>> frozen_rows;
    for (std::size_t s : rmap.frozen) {
      std::vector<long long> row(v);
      for (std::size_t k = 0; k < v; ++k)
        row[k] = rmap.parent.reaction(rmap.parent_nonreverse[k]).coeffs[s];
      frozen_rows.push_back(std::move(row));
    }
    const ratlin::SubspaceBasis frozen_kernel =
        ratlin::nullspace(ratlin::RationalMatrix::from_int_rows(frozen_rows));
    out.reduced_kernel_in_frozen_kernel =
        ratlin::subspace_contained(reduced_cycles, frozen_kernel);
  }
  return out;
}

std::vector<std::size_t> cycle_species(const ReductionMap& rmap) {
  const ratlin::SubspaceBasis reduced_cycles = ratlin::nullspace(rmap.reduced_matrix());
  std::set<std::size_t> cycle_cols;
  for (const IntVec& c : reduced_cycles.vectors)
    for (std::size_t j = 0; j < c.size(); ++j)
      if (c[j] != 0) cycle_cols.insert(j);

  std::set<std::size_t> species;
  for (std::size_t j : cycle_cols)
    for (const auto& [k, sign] : rmap.preimages[j]) {
      const Reaction& r = rmap.parent.reaction(rmap.parent_nonreverse[k]);
      for (std::size_t i = 0; i < r.coeffs.size(); ++i)
        if (r.coeffs[i] != 0) species.insert(i);
    }
  return {species.begin(), species.end()};
}

EquilibriumCheck equilibrium_db_check(const KineticSystem& sys, const ReductionMap& rmap,
                                      const FrozenConcentrations& n_u, double tol) {
  if (!detailed_balance(sys, tol).balanced)
    throw std::invalid_argument("equilibrium_db_check requires a detailed balanced system");
  const std::vector<std::size_t> dset = cycle_species(rmap);
  std::vector<std::size_t> constrained;
  for (std::size_t s : rmap.frozen)
    if (std::find(dset.begin(), dset.end(), s) != dset.end()) constrained.push_back(s);

  const EnergySolution es = energy_vector(sys);
  EquilibriumCheck out;
  if (constrained.empty()) {
    out.at_equilibrium = true;
    out.witness_energy = es.particular;
    return out;
  }

  // Least squares in the chemical potentials: E = E0 + sum mu_j m_j with
  // E(s) = -ln(n_s) on the constrained coordinates.
  const std::size_t L = es.gauge_basis.dim();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(constrained.size()),
                    static_cast<Eigen::Index>(std::max<std::size_t>(L, 1)));
  a.setZero();
  Eigen::VectorXd d(static_cast<Eigen::Index>(constrained.size()));
  for (std::size_t r = 0; r < constrained.size(); ++r) {
    const std::size_t s = constrained[r];
    for (std::size_t j = 0; j < L; ++j)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
          es.gauge_basis.vectors[j][s].convert_to<double>();
    d(static_cast<Eigen::Index>(r)) = -std::log(n_u.at(s)) - es.particular[s];
  }
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(a.cols());
  if (L > 0) mu = a.completeOrthogonalDecomposition().solve(d);
  const double residual = (a * mu - d).lpNorm<Eigen::Infinity>();
  if (residual > 1e-9) return out;

  out.at_equilibrium = true;
  out.witness_energy = es.particular;
  for (std::size_t j = 0; j < L; ++j)
    for (std::size_t i = 0; i < out.witness_energy.size(); ++i)
      out.witness_energy[i] +=
          mu(static_cast<Eigen::Index>(j)) * es.gauge_basis.vectors[j][i].convert_to<double>();
  return out;
}

const char* to_string(DbStability v) {
  switch (v) {
    case DbStability::StableDb: return "STABLE_DB";
    case DbStability::DbAtEquilibriumOnly: return "DB_AT_EQUILIBRIUM_ONLY";
    case DbStability::DbFineTuned: return "DB_FINE_TUNED";
    case DbStability::NotDb: return "NOT_DB";
  }
  return "?";
}

DbStabilityReport db_stability_report(const KineticSystem& sys, const ReductionMap& rmap,
                                      const FrozenConcentrations& n_u, double tol) {
  if (!detailed_balance(sys, tol).balanced)
    throw std::invalid_argument("db_stability_report requires a detailed balanced parent");

  DbStabilityReport rep;
  const ratlin::SubspaceBasis reduced_cycles = ratlin::nullspace(rmap.reduced_matrix());
  std::set<std::size_t> cycle_cols;
  for (const IntVec& c : reduced_cycles.vectors)
    for (std::size_t j = 0; j < c.size(); ++j)
      if (c[j] != 0) cycle_cols.insert(j);

  rep.all_cycle_reactions_one_to_one = true;
  for (std::size_t j : cycle_cols)
    if (!rmap.is_one_to_one(j)) rep.all_cycle_reactions_one_to_one = false;

  const StructureReport parent_structure = structure(rmap.parent);
  rep.no_zero_reduction_in_cycles = true;
  for (std::size_t k : rmap.zero_reduced)
    if (parent_structure.cycle_support.count(k)) rep.no_zero_reduction_in_cycles = false;

  rep.projected_cycles_equal = project_cycles(rmap).image_equals_reduced_cycles;
  rep.cycle_species_set = cycle_species(rmap);
  rep.reduced_verdict = detailed_balance(reduced_system(sys, rmap, n_u), tol);

  if (rep.all_cycle_reactions_one_to_one && rep.no_zero_reduction_in_cycles &&
      rep.projected_cycles_equal) {
    rep.verdict = DbStability::StableDb;
    rep.equilibrium_check = equilibrium_db_check(sys, rmap, n_u, tol).at_equilibrium;
    return rep;
  }
  rep.equilibrium_check = equilibrium_db_check(sys, rmap, n_u, tol).at_equilibrium;
  if (rep.equilibrium_check)
    rep.verdict = DbStability::DbAtEquilibriumOnly;
  else if (rep.reduced_verdict.balanced)
    rep.verdict = DbStability::DbFineTuned;
  else
    rep.verdict = DbStability::NotDb;
  return rep;
}

namespace {

/// Max circuit-sum deviation of the reduced system under the given rates.
double reduced_circuit_deviation(const KineticSystem& sys, const ReductionMap& rmap,
                                 const FrozenConcentrations& n_u, const RateFunction& rates) {
  KineticSystem perturbed(sys.network(), rates);
  const KineticSystem red = reduced_system(perturbed, rmap, n_u);
  const std::vector<double> w = red.energy_rhs();
  double dev = 0.0;
  for (const IntVec& c : red.structure().cycle_basis.vectors) {
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (c[j] != 0) s += c[j].convert_to<double>() * w[j];
    dev = std::max(dev, std::abs(s));
  }
  return dev;
}

}  // namespace

std::optional<RateFunction> perturbation_witness(const KineticSystem& sys,
                                                 const ReductionMap& rmap,
                                                 const FrozenConcentrations& n_u, double delta,
                                                 std::uint64_t seed, double tol) {
  if (!(delta > 0.0)) throw std::domain_error("delta must be strictly positive");
  const DbStabilityReport rep = db_stability_report(sys, rmap, n_u, tol);
  if (rep.verdict == DbStability::StableDb) return std::nullopt;
  // The instability propositions only assert a witness off the equilibrium
  // gauge; on it, the alternative branch holds and no construction applies.
  if (rep.equilibrium_check) return std::nullopt;

  const ChemicalNetwork& net = sys.network();
  const EnergySolution es = energy_vector(sys);
  const auto& rs = sys.nonreverse();

  const auto accept = [&](const RateFunction& candidate) -> bool {
    double dist = 0.0;
    for (std::size_t i = 0; i < candidate.values.size(); ++i)
      dist = std::max(dist, std::abs(candidate.values[i] - sys.rates().values[i]));
    if (!(dist < delta)) return false;
    KineticSystem perturbed(net, candidate);
    if (!detailed_balance(perturbed, tol).balanced) return false;
    return reduced_circuit_deviation(sys, rmap, n_u, candidate) > 10.0 * tol;
  };

  // Energy-bump family: E_delta supported on one frozen species keeps the
  // parent exactly balanced (cycles annihilate every species row) while
  // shifting the reduced circuit sums.
  std::vector<double> eps_candidates;
  double max_coeff = 1.0;
  for (std::size_t k = 0; k < rs.size(); ++k)
    for (std::size_t s : rmap.frozen)
      max_coeff = std::max(max_coeff,
                           std::abs(static_cast<double>(net.reaction(rs[k]).coeffs[s])));
  const double base = delta / (2.0 * std::max(1.0, sys.rates().norm()) * max_coeff);
  eps_candidates = {base, base / 4.0, -base, base / 16.0};

  for (std::size_t s : rmap.frozen) {
    for (double eps : eps_candidates) {
      RateFunction cand = sys.rates();
      bool ok = true;
      for (std::size_t k = 0; k < rs.size() && ok; ++k) {
        const Reaction& r = net.reaction(rs[k]);
        if (r.coeffs[s] == 0) continue;
        const auto rev = net.reverse_index(rs[k]);
        if (!rev) {
          ok = false;
          break;
        }
        cand.values[*rev] *= std::exp(static_cast<double>(r.coeffs[s]) * eps);
      }
      if (ok && accept(cand)) return cand;
    }
  }

  // Additive bump on one preimage of a merged reduced reaction, reverse rate
  // pinned to the detailed-balance ratio e^{R.E}.
  std::vector<std::size_t> merged;
  for (std::size_t j = 0; j < rmap.n_reduced(); ++j)
    if (!rmap.is_one_to_one(j)) merged.push_back(j);
  std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull);
  for (std::size_t j : merged) {
    for (const auto& [k, sign] : rmap.preimages[j]) {
      const std::size_t ri = rmap.parent_nonreverse[k];
      const Reaction& r = net.reaction(ri);
      double re = 0.0;
      for (std::size_t i = 0; i < r.coeffs.size(); ++i)
        re += static_cast<double>(r.coeffs[i]) * es.particular[i];
      for (double frac : {0.5, 0.125, 0.03125}) {
        const double bump = frac * delta / std::max(1.0, std::exp(re));
        RateFunction cand = sys.rates();
        cand.values[ri] += bump;
        cand.values[*net.reverse_index(ri)] = cand.values[ri] * std::exp(re);
        if (accept(cand)) return cand;
      }
    }
  }

  // Seeded random fallback over small detailed-balance-preserving bumps.
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int attempt = 0; attempt < 64; ++attempt) {
    RateFunction cand = sys.rates();
    bool ok = true;
    for (std::size_t k = 0; k < rs.size() && ok; ++k) {
      const auto rev = net.reverse_index(rs[k]);
      if (!rev) {
        ok = false;
        break;
      }
      const double bump = 0.25 * delta * unif(rng);
      const Reaction& r = net.reaction(rs[k]);
      double re = 0.0;
      for (std::size_t i = 0; i < r.coeffs.size(); ++i)
        re += static_cast<double>(r.coeffs[i]) * es.particular[i];
      if (cand.values[rs[k]] + bump <= 0) continue;
      cand.values[rs[k]] += bump;
      cand.values[*rev] = cand.values[rs[k]] * std::exp(re);
    }
    if (ok && accept(cand)) return cand;
  }
  return std::nullopt;
}

bool conservation_embedding(const ReductionMap& rmap) {
  const ratlin::SubspaceBasis reduced_laws =
      ratlin::nullspace(rmap.reduced_matrix().transposed());
  const ratlin::SubspaceBasis parent_laws =
      structure(rmap.parent).conservation_basis;
  for (const IntVec& m : reduced_laws.vectors) {
    RatVec padded(rmap.parent.n_species(), Rational(0));
    for (std::size_t i = 0; i < rmap.kept.size(); ++i) padded[rmap.kept[i]] = Rational(m[i]);
    if (!ratlin::in_span(parent_laws, padded)) return false;
  }
  return true;
}

}  // namespace crn
