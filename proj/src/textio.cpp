#include "crn/textio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace crn::textio {

namespace {

constexpr long long kCoeffLimit = 1ll << 31;

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;
  std::size_t line;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool eof() const { return pos >= text.size(); }
  char peek() const { return eof() ? '\0' : text[pos]; }
  std::size_t column() const { return pos + 1; }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line, column(), what); }
};

bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string read_name(Cursor& c) {
  c.skip_ws();
  std::size_t start = c.pos;
  while (!c.eof() && name_char(c.peek())) ++c.pos;
  if (c.pos == start) c.fail("expected a species name");
  return c.text.substr(start, c.pos - start);
}

long long read_count(Cursor& c) {
  std::size_t start = c.pos;
  long long v = 0;
  while (!c.eof() && std::isdigit(static_cast<unsigned char>(c.peek()))) {
    v = v * 10 + (c.peek() - '0');
    if (v >= kCoeffLimit) c.fail("stoichiometric coefficient overflow");
    ++c.pos;
  }
  if (c.pos == start) c.fail("expected a coefficient");
  if (v == 0) c.fail("zero stoichiometric coefficient");
  return v;
}

double read_rate(Cursor& c) {
  c.skip_ws();
  std::size_t start = c.pos;
  while (!c.eof() && !std::isspace(static_cast<unsigned char>(c.peek())) && c.peek() != ',')
    ++c.pos;
  const std::string tok = c.text.substr(start, c.pos - start);
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    c.pos = start;
    c.fail("expected a numeric value, got '" + tok + "'");
  }
}

// One side of a reaction: term (+ term)*, term = [count] name.
std::vector<std::pair<std::string, long long>> read_side(Cursor& c) {
  std::vector<std::pair<std::string, long long>> terms;
  for (;;) {
    c.skip_ws();
    long long count = 1;
    if (std::isdigit(static_cast<unsigned char>(c.peek()))) {
      count = read_count(c);
      if (c.peek() == '*') ++c.pos;
    }
    terms.emplace_back(read_name(c), count);
    c.skip_ws();
    if (c.peek() == '+') {
      ++c.pos;
      continue;
    }
    return terms;
  }
}

struct LineForm {
  std::vector<std::pair<std::string, long long>> lhs, rhs;
  bool bidirectional = false;
};

LineForm read_reaction_expr(Cursor& c) {
  LineForm form;
  form.lhs = read_side(c);
  c.skip_ws();
  if (c.text.compare(c.pos, 3, "<->") == 0) {
    form.bidirectional = true;
    c.pos += 3;
  } else if (c.text.compare(c.pos, 2, "->") == 0) {
    c.pos += 2;
  } else {
    c.fail("expected '->' or '<->'");
  }
  form.rhs = read_side(c);
  return form;
}

struct Builder {
  std::vector<std::string> species;
  std::map<std::string, std::size_t> index;
  std::vector<Reaction> reactions;
  std::vector<double> rates;

  std::size_t species_id(const std::string& name) {
    const auto it = index.find(name);
    if (it != index.end()) return it->second;
    species.push_back(name);
    index[name] = species.size() - 1;
    return species.size() - 1;
  }

  Reaction make_vector(const LineForm& form, Cursor& c) {
    // Register species first so vectors can be resized consistently later.
    std::map<std::size_t, long long> coeffs;
    for (const auto& [name, count] : form.lhs) {
      const std::size_t id = species_id(name);
      if (coeffs.count(id)) coeffs[id] -= count;
      else coeffs[id] = -count;
    }
    for (const auto& [name, count] : form.rhs) {
      const std::size_t id = species_id(name);
      if (coeffs.count(id) && coeffs[id] < 0)
        c.fail("species '" + species[id] + "' appears on both sides");
      coeffs[id] += count;
    }
    Reaction r;
    r.coeffs.assign(species.size(), 0);
    for (const auto& [id, v] : coeffs) r.coeffs[id] = v;
    return r;
  }

  void add_reaction(Reaction r, double rate, Cursor& c) {
    if (!(rate > 0.0)) c.fail("reaction rate must be strictly positive");
    for (auto& existing : reactions) existing.coeffs.resize(species.size(), 0);
    r.coeffs.resize(species.size(), 0);
    for (const auto& existing : reactions)
      if (existing == r) c.fail("duplicate reaction");
    reactions.push_back(std::move(r));
    rates.push_back(rate);
  }
};

void expect_token(Cursor& c, const std::string& tok) {
  c.skip_ws();
  if (c.text.compare(c.pos, tok.size(), tok) != 0) c.fail("expected '" + tok + "'");
  c.pos += tok.size();
}

}  // namespace

ParsedNetwork parse_network(const std::string& text) {
  Builder b;
  std::map<std::size_t, double> frozen_by_id;
  std::vector<LineForm> constrained_refs;
  std::vector<std::size_t> constrained_lines;
  bool fully_bidirectional = true;

  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    Cursor c{raw, 0, lineno};
    c.skip_ws();
    if (c.eof()) continue;

    if (raw.compare(c.pos, 8, "species:") == 0) {
      c.pos += 8;
      for (;;) {
        c.skip_ws();
        if (c.eof()) break;
        b.species_id(read_name(c));
        c.skip_ws();
        if (c.peek() == ',') ++c.pos;
      }
      continue;
    }
    if (raw.compare(c.pos, 7, "frozen:") == 0) {
      c.pos += 7;
      for (;;) {
        const std::string name = read_name(c);
        expect_token(c, "=");
        const double v = read_rate(c);
        if (!(v > 0.0)) c.fail("frozen concentration must be strictly positive");
        frozen_by_id[b.species_id(name)] = v;
        c.skip_ws();
        if (c.peek() == ',') {
          ++c.pos;
          continue;
        }
        break;
      }
      c.skip_ws();
      if (!c.eof()) c.fail("unexpected trailing input");
      continue;
    }
    if (raw.compare(c.pos, 12, "constrained:") == 0) {
      c.pos += 12;
      constrained_refs.push_back(read_reaction_expr(c));
      constrained_lines.push_back(lineno);
      c.skip_ws();
      if (!c.eof()) c.fail("unexpected trailing input");
      continue;
    }

    const LineForm form = read_reaction_expr(c);
    expect_token(c, ";");
    if (form.bidirectional) {
      expect_token(c, "kf");
      expect_token(c, "=");
      const double kf = read_rate(c);
      expect_token(c, "kr");
      expect_token(c, "=");
      const double kr = read_rate(c);
      c.skip_ws();
      if (!c.eof()) c.fail("unexpected trailing input");
      Reaction r = b.make_vector(form, c);
      b.add_reaction(r, kf, c);
      b.add_reaction(r.negated(), kr, c);
    } else {
      fully_bidirectional = false;
      expect_token(c, "k");
      expect_token(c, "=");
      const double k = read_rate(c);
      c.skip_ws();
      if (!c.eof()) c.fail("unexpected trailing input");
      b.add_reaction(b.make_vector(form, c), k, c);
    }
  }
  if (b.reactions.empty()) throw ParseError(lineno, 1, "no reactions in input");
  for (auto& r : b.reactions) r.coeffs.resize(b.species.size(), 0);

  ParsedNetwork out{ChemicalNetwork(b.species, b.reactions), RateFunction{b.rates},
                    std::move(frozen_by_id), {}, fully_bidirectional};

  for (std::size_t ci = 0; ci < constrained_refs.size(); ++ci) {
    Cursor c{raw, 0, constrained_lines[ci]};
    Builder ref_builder = b;  // same species universe
    Reaction r = ref_builder.make_vector(constrained_refs[ci], c);
    if (ref_builder.species.size() != b.species.size())
      throw ParseError(constrained_lines[ci], 1, "unknown species in constrained reaction");
    const auto idx = out.network.find_reaction(r);
    if (!idx) throw ParseError(constrained_lines[ci], 1, "constrained reaction not found");
    out.constrained.push_back(*idx);
    const auto rev = out.network.reverse_index(*idx);
    if (rev && std::find(out.constrained.begin(), out.constrained.end(), *rev) ==
                   out.constrained.end())
      out.constrained.push_back(*rev);
  }
  std::sort(out.constrained.begin(), out.constrained.end());
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string side_string(const ChemicalNetwork& net, const Reaction& r, bool initial) {
  std::string s;
  for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
    const long long c = initial ? -r.coeffs[i] : r.coeffs[i];
    if (c <= 0) continue;
    if (!s.empty()) s += " + ";
    if (c != 1) s += std::to_string(c) + " ";
    s += net.species()[i];
  }
  return s;
}

}  // namespace

std::string serialize_network(const ParsedNetwork& parsed) {
  const ChemicalNetwork& net = parsed.network;
  std::string out = "species:";
  for (const auto& name : net.species()) out += " " + name;
  out += "\n";
  for (std::size_t i = 0; i < net.reactions().size(); ++i) {
    const Reaction& r = net.reaction(i);
    const auto rev = net.reverse_index(i);
    if (rev && *rev < i) continue;  // reversible pair already written
    out += side_string(net, r, true);
    if (rev) {
      out += " <-> " + side_string(net, r, false) + " ; kf=" +
             format_double(parsed.rates.values[i]) +
             " kr=" + format_double(parsed.rates.values[*rev]) + "\n";
    } else {
      out += " -> " + side_string(net, r, false) + " ; k=" +
             format_double(parsed.rates.values[i]) + "\n";
    }
  }
  for (const auto& [id, v] : parsed.frozen)
    out += "frozen: " + net.species()[id] + "=" + format_double(v) + "\n";
  for (std::size_t idx : parsed.constrained) {
    const Reaction& r = net.reaction(idx);
    const auto rev = net.reverse_index(idx);
    if (rev && *rev < idx) continue;
    out += "constrained: " + side_string(net, r, true) + " <-> " +
           side_string(net, r, false) + "\n";
  }
  return out;
}

std::string rational_string(const Rational& r) {
  const Integer num = numerator(r);
  const Integer den = denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

namespace {

json reaction_json(const ChemicalNetwork& net, const Reaction& r) {
  json j;
  j["vector"] = r.coeffs;
  const std::string lhs = side_string(net, r, true);
  const std::string rhs = side_string(net, r, false);
  j["text"] = (lhs.empty() ? "0" : lhs) + " -> " + (rhs.empty() ? "0" : rhs);
  return j;
}

json basis_json(const ratlin::SubspaceBasis& b) {
  json vectors = json::array();
  for (const auto& v : b.vectors) {
    json row = json::array();
    for (const auto& x : v) row.push_back(x.str());
    vectors.push_back(row);
  }
  json j;
  j["ambient_dim"] = b.ambient_dim;
  j["dim"] = b.dim();
  j["vectors"] = vectors;
  return j;
}

json rational_vector_json(const RatVec& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(rational_string(x));
  return a;
}

json matrix_json(const ratlin::RationalMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(rational_vector_json(m.row(i)));
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["entries"] = rows;
  return j;
}

/// 1-based species indices for reports, matching Omega = {1..N}.
json one_based(const std::vector<std::size_t>& idx) {
  json a = json::array();
  for (std::size_t i : idx) a.push_back(i + 1);
  return a;
}

}  // namespace

json report_envelope(const std::string& kind) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  return j;
}

json structure_json(const ChemicalNetwork& net, const StructureReport& rep) {
  json j = report_envelope("structure");
  j["species"] = net.species();
  j["bidirectional"] = net.bidirectional();
  json nr = json::array();
  for (std::size_t i : rep.nonreverse_indices) nr.push_back(i);
  j["nonreverse_indices"] = nr;
  j["reaction_matrix"] = matrix_json(rep.matrix);
  j["cycle_basis"] = basis_json(rep.cycle_basis);
  j["conservation_basis"] = basis_json(rep.conservation_basis);
  j["conservative"] = rep.conservative;
  j["per_species_law_agreement"] = rep.per_species_law_agreement;
  if (rep.positive_law) j["positive_law"] = rational_vector_json(*rep.positive_law);
  j["cycle_support"] =
      one_based(std::vector<std::size_t>(rep.cycle_support.begin(), rep.cycle_support.end()));
  json ss = json::array();
  for (const Reaction& r : rep.sources_sinks) ss.push_back(reaction_json(net, r));
  j["sources_sinks"] = ss;
  if (net.n_species() <= 16) {
    json rays = json::array();
    for (const IntVec& ray : extreme_rays(rep.conservation_basis)) {
      json row = json::array();
      for (const auto& x : ray) row.push_back(x.str());
      rays.push_back(row);
    }
    j["extreme_rays"] = rays;
  }
  return j;
}

json db_json(const KineticSystem& sys, const DbVerdict& verdict,
             const EnergySolution& energy) {
  json j = report_envelope("detailed_balance");
  j["balanced"] = verdict.balanced;
  j["tolerance"] = verdict.tolerance;
  json viol = json::array();
  for (const auto& [cycle, value] : verdict.violated_cycles) {
    json row;
    json cv = json::array();
    for (const auto& x : cycle) cv.push_back(x.str());
    row["cycle"] = cv;
    row["circuit_value"] = value;
    viol.push_back(row);
  }
  j["violated_cycles"] = viol;
  j["energy"] = {{"particular", energy.particular},
                 {"residual", energy.residual},
                 {"gauge_basis", basis_json(energy.gauge_basis)}};
  json names = json::array();
  for (const auto& s : sys.network().species()) names.push_back(s);
  j["species"] = names;
  return j;
}

json reduction_json(const KineticSystem& sys, const ReductionMap& rmap,
                    const FrozenConcentrations& n_u, const DbStabilityReport& report) {
  json j = report_envelope("reduction");
  json frozen;
  for (std::size_t s : rmap.frozen)
    frozen[sys.network().species()[s]] = n_u.at(s);
  j["frozen"] = frozen;
  json kept = json::array();
  for (std::size_t s : rmap.kept) kept.push_back(sys.network().species()[s]);
  j["kept"] = kept;
  j["reduced_matrix"] = matrix_json(rmap.reduced_matrix());
  json pre = json::array();
  for (std::size_t col = 0; col < rmap.n_reduced(); ++col) {
    json p = json::array();
    for (const auto& [k, sign] : rmap.preimages[col]) {
      json e;
      e["column"] = k;
      e["sign"] = sign;
      p.push_back(e);
    }
    pre.push_back(p);
  }
  j["preimages"] = pre;
  json zero = json::array();
  for (std::size_t k : rmap.zero_reduced) zero.push_back(k);
  j["zero_reduced_columns"] = zero;
  json oto = json::array();
  for (std::size_t k : rmap.one_to_one) oto.push_back(k);
  j["one_to_one_columns"] = oto;

  const RateFunction rates = reduced_rates(sys, rmap, n_u);
  const std::size_t v = rmap.n_reduced();
  json rr = json::array();
  for (std::size_t col = 0; col < v; ++col) {
    json e;
    e["forward"] = rates.values[col];
    e["backward"] = sys.bidirectional() ? rates.values[v + col] : 0.0;
    rr.push_back(e);
  }
  j["reduced_rates"] = rr;

  j["stability"] = {{"verdict", to_string(report.verdict)},
                    {"all_cycle_reactions_1to1", report.all_cycle_reactions_one_to_one},
                    {"no_zero_reduction_in_cycles", report.no_zero_reduction_in_cycles},
                    {"projected_cycles_equal", report.projected_cycles_equal},
                    {"equilibrium_check", report.equilibrium_check},
                    {"cycle_species", one_based(report.cycle_species_set)},
                    {"reduced_balanced", report.reduced_verdict.balanced}};
  json viol = json::array();
  for (const auto& [cycle, value] : report.reduced_verdict.violated_cycles) {
    json row;
    json cv = json::array();
    for (const auto& x : cycle) cv.push_back(x.str());
    row["cycle"] = cv;
    row["circuit_value"] = value;
    viol.push_back(row);
  }
  j["stability"]["violated_cycles"] = viol;
  j["conservation_embedding"] = conservation_embedding(rmap);
  return j;
}

namespace {

json certificate_json(const CompletionCertificate& cert) {
  json j;
  j["reduction_matches"] = cert.reduction_matches;
  j["rates_roundtrip"] = cert.rates_roundtrip;
  j["acyclic"] = cert.acyclic;
  j["detailed_balanced"] = cert.detailed_balanced;
  j["conservative"] = cert.conservative;
  j["no_sources_sinks"] = cert.no_sources_sinks;
  j["admissible"] = cert.admissible;
  j["all_green"] = cert.all_green();
  j["failures"] = cert.failures;
  return j;
}

}  // namespace

json completion_json(const KineticSystem& original, const CompletionResult& result) {
  json j = report_envelope("completion");
  j["species"] = result.completed_network.species();
  j["added_species"] = one_based(result.added_species);
  const std::vector<std::size_t> rs = nonreverse_set(result.completed_network);
  j["reaction_matrix"] = matrix_json(reaction_matrix(result.completed_network, rs));
  json prov = json::array();
  for (const auto& p : result.provenance) {
    json e;
    e["step"] = to_string(p.step);
    e["new_species"] = one_based(p.new_species);
    e["trigger_column"] = p.trigger_column;
    prov.push_back(e);
  }
  j["provenance"] = prov;
  j["certificate"] = certificate_json(result.certificate);
  json fr;
  for (const auto& [s, v] : result.frozen_defaults.values)
    fr[result.completed_network.species()[s]] = v;
  j["frozen_defaults"] = fr;
  (void)original;
  return j;
}

json admissible_json(const KineticSystem& original, const AdmissibleCompletion& result) {
  switch (result.status) {
    case AdmissibleStatus::Completed: {
      json j = completion_json(original, *result.result);
      j["status"] = "COMPLETED";
      return j;
    }
    case AdmissibleStatus::Impossible: {
      json j = report_envelope("completion");
      j["status"] = "IMPOSSIBLE";
      json cv = json::array();
      for (const auto& x : result.blocking_cycle->first) cv.push_back(x.str());
      j["blocking_cycle"] = cv;
      j["circuit_value"] = result.blocking_cycle->second;
      return j;
    }
    case AdmissibleStatus::NotDecided: {
      json j = result.result ? completion_json(original, *result.result)
                             : report_envelope("completion");
      j["status"] = "NOT_DECIDED";
      return j;
    }
  }
  return report_envelope("completion");
}

json trajectory_summary_json(const KineticSystem& sys, const Trajectory& traj) {
  json j = report_envelope("trajectory");
  j["status"] = to_string(traj.status);
  j["samples"] = traj.times.size();
  j["t_final"] = traj.times.back();
  j["final_state"] = traj.final_state();
  j["final_free_energy"] = traj.free_energy.back();
  j["final_dissipation"] = traj.dissipation.back();
  double max_drift = 0.0;
  for (double d : traj.conservation_residual) max_drift = std::max(max_drift, d);
  j["max_conservation_drift"] = max_drift;
  double max_increase = 0.0;
  for (std::size_t i = 0; i + 1 < traj.free_energy.size(); ++i)
    max_increase = std::max(max_increase, traj.free_energy[i + 1] - traj.free_energy[i]);
  j["max_free_energy_increase"] = max_increase;
  j["energy"] = traj.energy;
  if (!traj.frozen.empty()) {
    json fr = json::array();
    for (std::size_t s : traj.frozen) fr.push_back(sys.network().species()[s]);
    j["frozen_species"] = fr;
    j["final_cumulative_flux"] = traj.cumulative_flux.back();
  }
  return j;
}

}  // namespace crn::textio
