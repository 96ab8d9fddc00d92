#include "crn/kinetics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace crn {

namespace {

/// b^e for a small nonnegative integer exponent, by repeated multiplication.
/// Keeps 0^0 = 1 and exactness of factors equal to one.
double ipow(double base, long long e) {
  double r = 1.0;
  for (long long i = 0; i < e; ++i) r *= base;
  return r;
}

/// prod_{i in I(R)} n_i^{-R(i)} (the mass-action monomial of the reactants).
double reactant_monomial(const Reaction& r, const std::vector<double>& n) {
  double m = 1.0;
  for (std::size_t i = 0; i < r.coeffs.size(); ++i)
    if (r.coeffs[i] < 0) m *= ipow(n[i], -r.coeffs[i]);
  return m;
}

/// prod_{i in F(R)} n_i^{R(i)}.
double product_monomial(const Reaction& r, const std::vector<double>& n) {
  double m = 1.0;
  for (std::size_t i = 0; i < r.coeffs.size(); ++i)
    if (r.coeffs[i] > 0) m *= ipow(n[i], r.coeffs[i]);
  return m;
}

Eigen::MatrixXd transpose_as_double(const ratlin::RationalMatrix& m) {
  Eigen::MatrixXd a(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) a(j, i) = to_double(m(i, j));
  return a;
}

}  // namespace

double RateFunction::norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

KineticSystem::KineticSystem(ChemicalNetwork net, RateFunction rates)
    : net_(std::move(net)), rates_(std::move(rates)), structure_(crn::structure(net_)) {
  if (rates_.values.size() != net_.reactions().size())
    throw std::invalid_argument("rate function must cover every reaction");
  for (double k : rates_.values)
    if (!(k > 0.0)) throw std::invalid_argument("reaction rates must be strictly positive");
}

double KineticSystem::forward_rate(std::size_t k) const {
  return rates_.values[structure_.nonreverse_indices.at(k)];
}

double KineticSystem::reverse_rate(std::size_t k) const {
  const auto rev = net_.reverse_index(structure_.nonreverse_indices.at(k));
  if (!rev) throw std::invalid_argument("reverse rate of a one-directional reaction");
  return rates_.values[*rev];
}

std::vector<double> KineticSystem::energy_rhs() const {
  std::vector<double> w(nonreverse().size());
  for (std::size_t k = 0; k < w.size(); ++k)
    w[k] = std::log(reverse_rate(k)) - std::log(forward_rate(k));
  return w;
}

std::vector<double> mass_action_rhs(const KineticSystem& sys, const std::vector<double>& n) {
  const ChemicalNetwork& net = sys.network();
  if (n.size() != net.n_species()) throw std::invalid_argument("state dimension mismatch");
  for (double x : n)
    if (x < 0.0) throw std::domain_error("negative concentration");

  std::vector<double> rhs(net.n_species(), 0.0);
  std::vector<double> scale(net.n_species(), 0.0);
  for (std::size_t ri = 0; ri < net.reactions().size(); ++ri) {
    const Reaction& r = net.reaction(ri);
    const double speed = sys.rates().values[ri] * reactant_monomial(r, n);
    for (std::size_t i = 0; i < n.size(); ++i) {
      if (r.coeffs[i] == 0) continue;
      rhs[i] += static_cast<double>(r.coeffs[i]) * speed;
      scale[i] += std::abs(static_cast<double>(r.coeffs[i]) * speed);
    }
  }

  if (sys.bidirectional()) {
    // Same sum grouped by fluxes over the non-reverse set; the two forms must
    // agree to roundoff.
    const std::vector<double> flux = reaction_fluxes(sys, n);
    std::vector<double> alt(net.n_species(), 0.0);
    for (std::size_t k = 0; k < flux.size(); ++k) {
      const Reaction& r = net.reaction(sys.nonreverse()[k]);
      for (std::size_t i = 0; i < n.size(); ++i)
        alt[i] += static_cast<double>(r.coeffs[i]) * flux[k];
    }
    for (std::size_t i = 0; i < n.size(); ++i)
      if (std::abs(rhs[i] - alt[i]) > 1e-12 * std::max(1.0, scale[i]))
        throw std::logic_error("mass-action rhs and flux form disagree");
  }
  return rhs;
}

std::vector<double> reaction_fluxes(const KineticSystem& sys, const std::vector<double>& n) {
  if (!sys.bidirectional())
    throw std::invalid_argument("reaction_fluxes requires a bidirectional system");
  if (n.size() != sys.n_species()) throw std::invalid_argument("state dimension mismatch");
  for (double x : n)
    if (x < 0.0) throw std::domain_error("negative concentration");
  std::vector<double> flux(sys.nonreverse().size());
  for (std::size_t k = 0; k < flux.size(); ++k) {
    const Reaction& r = sys.network().reaction(sys.nonreverse()[k]);
    flux[k] = sys.forward_rate(k) * reactant_monomial(r, n) -
              sys.reverse_rate(k) * product_monomial(r, n);
  }
  return flux;
}

DbVerdict detailed_balance(const KineticSystem& sys, double tol) {
  if (!sys.bidirectional())
    throw std::invalid_argument("detailed_balance requires a bidirectional system");
  const std::vector<double> w = sys.energy_rhs();
  DbVerdict verdict;
  verdict.tolerance = tol;
  verdict.balanced = true;
  for (const IntVec& c : sys.structure().cycle_basis.vectors) {
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (c[j] != 0) s += c[j].convert_to<double>() * (-w[j]);  // c(j) ln(K_R / K_-R)
    if (std::abs(s) > tol) {
      verdict.balanced = false;
      verdict.violated_cycles.emplace_back(c, std::exp(s));
    }
  }
  return verdict;
}

EnergySolution energy_vector(const KineticSystem& sys) {
  if (!sys.bidirectional())
    throw std::invalid_argument("energy_vector requires a bidirectional system");
  const std::vector<double> w = sys.energy_rhs();
  const Eigen::MatrixXd rt = transpose_as_double(sys.structure().matrix);
  Eigen::VectorXd wv(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) wv(static_cast<Eigen::Index>(i)) = w[i];

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(rt);
  const Eigen::VectorXd e = cod.solve(wv);

  EnergySolution sol;
  sol.particular.assign(e.data(), e.data() + e.size());
  sol.gauge_basis = sys.structure().conservation_basis;
  sol.residual = (rt * e - wv).lpNorm<Eigen::Infinity>();
  return sol;
}

double composition_energy(const KineticSystem& sys, const IntVec& xi, double tol) {
  if (!detailed_balance(sys, tol).balanced)
    throw std::invalid_argument("composition_energy requires a detailed balanced system");
  if (!accessible(sys.network(), xi))
    throw std::domain_error("composition is not accessible from 0");

  RatVec b(xi.begin(), xi.end());
  const auto x = ratlin::solve_exact(sys.structure().matrix, b);
  if (!x) throw std::domain_error("composition is not in the stoichiometric span");

  const std::vector<double> w = sys.energy_rhs();
  double sequence_energy = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    if ((*x)[k] != 0) sequence_energy += to_double((*x)[k]) * w[k];

  const EnergySolution es = energy_vector(sys);
  double additive = 0.0;
  for (std::size_t j = 0; j < xi.size(); ++j)
    if (xi[j] != 0) additive += xi[j].convert_to<double>() * es.particular[j];
  if (std::abs(sequence_energy - additive) > 1e-10 * std::max(1.0, std::abs(additive)))
    throw std::logic_error("composition energy is representation-dependent");
  return sequence_energy;
}

std::optional<std::vector<double>> gauge_fix_energy(
    const KineticSystem& sys, const std::vector<std::pair<IntVec, double>>& targets) {
  if (!detailed_balance(sys).balanced)
    throw std::invalid_argument("gauge_fix_energy requires a detailed balanced system");
  for (const auto& [m, t] : targets)
    if (!(t > 0.0)) return std::nullopt;
  const EnergySolution es = energy_vector(sys);
  const std::size_t n = sys.n_species();
  const std::size_t L = targets.size();
  if (L == 0) return es.particular;

  Eigen::MatrixXd m(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(n));
  Eigen::VectorXd t(static_cast<Eigen::Index>(L));
  for (std::size_t j = 0; j < L; ++j) {
    if (targets[j].first.size() != n)
      throw std::invalid_argument("gauge target dimension mismatch");
    for (std::size_t i = 0; i < n; ++i)
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          targets[j].first[i].convert_to<double>();
    t(static_cast<Eigen::Index>(j)) = targets[j].second;
  }
  Eigen::VectorXd e0(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) e0(static_cast<Eigen::Index>(i)) = es.particular[i];

  std::mt19937 rng(20240715u);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (int restart = 0; restart <= 10; ++restart) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(L));
    if (restart > 0)
      for (Eigen::Index j = 0; j < mu.size(); ++j) mu(j) = 3.0 * jitter(rng);
    for (int iter = 0; iter < 200; ++iter) {
      const Eigen::VectorXd conc = (-(e0 + m.transpose() * mu)).array().exp().matrix();
      const Eigen::VectorXd g = m * conc - t;
      double gnorm = 0.0;
      for (Eigen::Index j = 0; j < g.size(); ++j)
        gnorm = std::max(gnorm, std::abs(g(j)) / std::max(1.0, std::abs(t(j))));
      if (gnorm <= 1e-10) {
        const Eigen::VectorXd e = e0 + m.transpose() * mu;
        return std::vector<double>(e.data(), e.data() + e.size());
      }
      // Jacobian dg/dmu = -M diag(conc) M^T, symmetric negative definite.
      const Eigen::MatrixXd jac = m * conc.asDiagonal() * m.transpose();
      Eigen::VectorXd step = jac.ldlt().solve(g);
      if (!step.allFinite()) break;
      double alpha = 1.0;
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        const Eigen::VectorXd mu_try = mu + alpha * step;
        const Eigen::VectorXd conc_try = (-(e0 + m.transpose() * mu_try)).array().exp().matrix();
        const Eigen::VectorXd g_try = m * conc_try - t;
        if (g_try.allFinite() && g_try.norm() < g.norm()) {
          mu = mu_try;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }
  }
  return std::nullopt;
}

std::optional<std::vector<double>> single_species_gauge(const KineticSystem& sys,
                                                        std::size_t species, double n_s) {
  if (!(n_s > 0.0)) throw std::domain_error("concentration must be strictly positive");
  if (species >= sys.n_species()) throw std::invalid_argument("species index out of range");
  const EnergySolution es = energy_vector(sys);
  const double target = -std::log(n_s);
  for (const IntVec& mv : es.gauge_basis.vectors) {
    if (mv[species] == 0) continue;
    const double ms = mv[species].convert_to<double>();
    const double shift = (std::log(n_s) + es.particular[species]) / ms;
    std::vector<double> e = es.particular;
    for (std::size_t i = 0; i < e.size(); ++i)
      e[i] -= shift * mv[i].convert_to<double>();
    return e;
  }
  if (std::abs(es.particular[species] - target) <= 1e-9) return es.particular;
  return std::nullopt;
}

}  // namespace crn
