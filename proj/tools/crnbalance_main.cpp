#include <CLI11.hpp>

#include <cstdlib>
#include <limits>
#include <fstream>
#include <iostream>
#include <sstream>

#include "crn/textio.hpp"

namespace {

using crn::textio::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerdict = 2;  // successful run with a negative analysis verdict

double db_tolerance() {
  if (const char* env = std::getenv("CRNBALANCE_DB_TOL")) {
    try {
      const double v = std::stod(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid CRNBALANCE_DB_TOL\n";
  }
  return crn::kDbTolDefault;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const json& report, const std::string& out_path) {
  const std::string body = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write report file '" + out_path + "'");
    out << body;
  }
}

crn::KineticSystem load_bidirectional(const crn::textio::ParsedNetwork& parsed,
                                      const std::string& command) {
  if (!parsed.fully_bidirectional || !parsed.network.bidirectional())
    throw std::runtime_error("'" + command + "' requires a bidirectional network (use <-> lines)");
  return crn::KineticSystem(parsed.network, parsed.rates);
}

/// "A=1.0,B=2.0" against the parsed species list.
std::map<std::size_t, double> parse_assignments(const std::string& spec,
                                                const crn::ChemicalNetwork& net) {
  std::map<std::size_t, double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("expected NAME=VALUE in '" + item + "'");
    const std::string name = item.substr(0, eq);
    std::size_t id = net.n_species();
    for (std::size_t i = 0; i < net.n_species(); ++i)
      if (net.species()[i] == name) id = i;
    if (id == net.n_species()) throw std::runtime_error("unknown species '" + name + "'");
    out[id] = std::stod(item.substr(eq + 1));
  }
  return out;
}

std::vector<std::size_t> keys_of(const std::map<std::size_t, double>& m) {
  std::vector<std::size_t> k;
  for (const auto& [i, v] : m) k.push_back(i);
  return k;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crnbalance: structural and thermodynamic analysis of "
               "bidirectional mass-action reaction networks"};
  app.require_subcommand(1);

  std::string input, out_path, csv_path;
  std::string freeze_spec, init_spec;
  std::vector<std::string> constrain_specs;
  bool minimal = false;
  double t_end = 10.0, rel_tol = 1e-8, abs_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("input", input, "network file (.crn)")->required();
    cmd->add_option("--out", out_path, "write the JSON report here instead of stdout");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "structural report");
  add_common(analyze);

  CLI::App* checkdb = app.add_subcommand("check-db", "detailed balance verdict and energies");
  add_common(checkdb);

  CLI::App* reduce = app.add_subcommand("reduce", "freeze species and classify the reduction");
  add_common(reduce);
  reduce->add_option("--freeze", freeze_spec, "frozen concentrations, e.g. A=1.0,B=2.0");

  CLI::App* complete = app.add_subcommand("complete", "construct a closed completion");
  add_common(complete);
  complete->add_option("--constrain", constrain_specs,
                       "constrained reaction, e.g. \"B <-> C\" (repeatable)");
  complete->add_flag("--minimal", minimal, "only break circuit-violating cycles");

  CLI::App* simulate = app.add_subcommand("simulate", "integrate the closed dynamics");
  add_common(simulate);
  simulate->add_option("--t-end", t_end, "integration horizon")->check(CLI::PositiveNumber);
  simulate->add_option("--init", init_spec, "initial concentrations, e.g. A=2,B=0")->required();
  simulate->add_option("--rel-tol", rel_tol, "relative tolerance");
  simulate->add_option("--abs-tol", abs_tol, "absolute tolerance");
  simulate->add_option("--max-step", max_step, "largest integrator step");
  simulate->add_option("--csv", csv_path, "trajectory CSV output path");

  CLI::App* simflux = app.add_subcommand("simulate-flux", "integrate with frozen species");
  add_common(simflux);
  simflux->add_option("--t-end", t_end, "integration horizon")->check(CLI::PositiveNumber);
  simflux->add_option("--freeze", freeze_spec, "frozen concentrations, e.g. A=2.0");
  simflux->add_option("--init", init_spec, "initial concentrations of the kept species")
      ->required();
  simflux->add_option("--rel-tol", rel_tol, "relative tolerance");
  simflux->add_option("--abs-tol", abs_tol, "absolute tolerance");
  simflux->add_option("--max-step", max_step, "largest integrator step");
  simflux->add_option("--csv", csv_path, "trajectory CSV output path");

  CLI11_PARSE(app, argc, argv);
  const double tol = db_tolerance();

  try {
    const crn::textio::ParsedNetwork parsed = crn::textio::parse_network(read_file(input));

    if (analyze->parsed()) {
      emit(crn::textio::structure_json(parsed.network, crn::structure(parsed.network)),
           out_path);
      return kExitOk;
    }

    if (checkdb->parsed()) {
      const crn::KineticSystem sys = load_bidirectional(parsed, "check-db");
      const crn::DbVerdict verdict = crn::detailed_balance(sys, tol);
      emit(crn::textio::db_json(sys, verdict, crn::energy_vector(sys)), out_path);
      return verdict.balanced ? kExitOk : kExitVerdict;
    }

    if (reduce->parsed()) {
      const crn::KineticSystem sys = load_bidirectional(parsed, "reduce");
      std::map<std::size_t, double> frozen = parsed.frozen;
      for (const auto& [id, v] : parse_assignments(freeze_spec, parsed.network))
        frozen[id] = v;
      if (frozen.empty())
        throw std::runtime_error("reduce needs --freeze or frozen: lines in the input");
      const crn::ReductionMap rmap = crn::reduce_network(parsed.network, keys_of(frozen));
      const crn::FrozenConcentrations n_u{frozen};
      const crn::DbStabilityReport rep = crn::db_stability_report(sys, rmap, n_u, tol);
      emit(crn::textio::reduction_json(sys, rmap, n_u, rep), out_path);
      return rep.verdict == crn::DbStability::NotDb ? kExitVerdict : kExitOk;
    }

    if (complete->parsed()) {
      const crn::KineticSystem sys = load_bidirectional(parsed, "complete");
      std::vector<std::size_t> constrained = parsed.constrained;
      for (const std::string& spec : constrain_specs) {
        const crn::textio::ParsedNetwork ref = crn::textio::parse_network(
            crn::textio::serialize_network(parsed) + "constrained: " + spec + "\n");
        for (std::size_t idx : ref.constrained)
          if (std::find(constrained.begin(), constrained.end(), idx) == constrained.end())
            constrained.push_back(idx);
      }
      if (constrained.empty()) {
        const crn::CompletionResult res = crn::complete_closed(sys, minimal, tol);
        emit(crn::textio::completion_json(sys, res), out_path);
        return res.certificate.all_green() ? kExitOk : kExitVerdict;
      }
      const crn::AdmissibleCompletion res =
          crn::complete_admissible(sys, crn::ConstraintSet{constrained}, minimal, tol);
      emit(crn::textio::admissible_json(sys, res), out_path);
      return res.status == crn::AdmissibleStatus::Completed ? kExitOk : kExitVerdict;
    }

    if (simulate->parsed() || simflux->parsed()) {
      const crn::KineticSystem sys = load_bidirectional(
          parsed, simulate->parsed() ? "simulate" : "simulate-flux");
      crn::SimulationConfig cfg;
      cfg.t_end = t_end;
      cfg.rel_tol = rel_tol;
      cfg.abs_tol = abs_tol;
      cfg.max_step = max_step;
      const std::map<std::size_t, double> init = parse_assignments(init_spec, parsed.network);

      crn::Trajectory traj;
      if (simulate->parsed()) {
        std::vector<double> n0(sys.n_species(), 0.0);
        for (const auto& [id, v] : init) n0[id] = v;
        traj = crn::integrate(sys, n0, cfg);
      } else {
        std::map<std::size_t, double> frozen = parsed.frozen;
        for (const auto& [id, v] : parse_assignments(freeze_spec, parsed.network))
          frozen[id] = v;
        if (frozen.empty())
          throw std::runtime_error("simulate-flux needs --freeze or frozen: lines");
        const std::vector<std::size_t> u = keys_of(frozen);
        std::vector<double> n0_v;
        for (std::size_t i = 0; i < sys.n_species(); ++i) {
          if (frozen.count(i)) continue;
          const auto it = init.find(i);
          n0_v.push_back(it == init.end() ? 0.0 : it->second);
        }
        traj = crn::integrate_with_fluxes(sys, u, crn::FrozenConcentrations{frozen}, n0_v, cfg);
      }

      if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw std::runtime_error("cannot write CSV file '" + csv_path + "'");
        crn::write_csv(csv, traj, sys.network().species());
      }
      json summary = crn::textio::trajectory_summary_json(sys, traj);
      if (simflux->parsed()) {
        // Free-energy balance residuals when the reduction satisfies the
        // decomposition hypotheses.
        try {
          const crn::ReductionMap rmap = crn::reduce_network(parsed.network, traj.frozen);
          std::map<std::size_t, double> frozen_map;
          for (std::size_t s : traj.frozen) frozen_map[s] = traj.states.front()[s];
          const auto decomposition =
              crn::energy_decomposition(sys, rmap, crn::FrozenConcentrations{frozen_map}, traj);
          double max_residual = 0.0;
          for (const auto& smp : decomposition)
            max_residual = std::max(max_residual, smp.residual);
          summary["decomposition_max_residual"] = max_residual;
          summary["decomposition_samples"] = decomposition.size();
        } catch (const std::invalid_argument& e) {
          summary["decomposition_skipped"] = e.what();
        }
      }
      emit(summary, out_path);
      return traj.status == crn::IntegrationStatus::StiffFailure ? kExitVerdict : kExitOk;
    }
  } catch (const crn::textio::ParseError& e) {
    std::cerr << "error: " << input << ": " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
