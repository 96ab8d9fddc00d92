#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crn/textio.hpp"

namespace py = pybind11;
using crn::textio::json;

namespace {

py::object json_to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<long long>());
    case json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& item : j) out.append(json_to_py(item));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (auto it = j.begin(); it != j.end(); ++it)
        out[py::str(it.key())] = json_to_py(it.value());
      return out;
    }
    default: return py::none();
  }
}

std::map<std::size_t, double> to_species_map(const crn::ChemicalNetwork& net,
                                             const py::dict& values) {
  std::map<std::size_t, double> out;
  for (const auto& item : values) {
    const std::string name = py::cast<std::string>(item.first);
    std::size_t id = net.n_species();
    for (std::size_t i = 0; i < net.n_species(); ++i)
      if (net.species()[i] == name) id = i;
    if (id == net.n_species()) throw std::invalid_argument("unknown species '" + name + "'");
    out[id] = py::cast<double>(item.second);
  }
  return out;
}

/// Thin handle over a parsed network, exposing the analyses as dicts.
class System {
 public:
  explicit System(const std::string& text) : parsed_(crn::textio::parse_network(text)) {}

  std::vector<std::string> species() const { return parsed_.network.species(); }

  py::object structure() const {
    return json_to_py(crn::textio::structure_json(parsed_.network,
                                                  crn::structure(parsed_.network)));
  }

  py::object check_db(double tol) const {
    const crn::KineticSystem sys = kinetic();
    return json_to_py(
        crn::textio::db_json(sys, crn::detailed_balance(sys, tol), crn::energy_vector(sys)));
  }

  py::object reduce(const py::dict& freeze, double tol) const {
    const crn::KineticSystem sys = kinetic();
    const auto frozen = to_species_map(parsed_.network, freeze);
    std::vector<std::size_t> u;
    for (const auto& [i, v] : frozen) u.push_back(i);
    const crn::ReductionMap rmap = crn::reduce_network(parsed_.network, u);
    const crn::FrozenConcentrations n_u{frozen};
    return json_to_py(crn::textio::reduction_json(
        sys, rmap, n_u, crn::db_stability_report(sys, rmap, n_u, tol)));
  }

  py::object complete(const std::vector<std::string>& constrained, bool minimal,
                      double tol) const {
    const crn::KineticSystem sys = kinetic();
    std::vector<std::size_t> indices = parsed_.constrained;
    if (!constrained.empty()) {
      std::string text = crn::textio::serialize_network(parsed_);
      for (const auto& line : constrained) text += "constrained: " + line + "\n";
      indices = crn::textio::parse_network(text).constrained;
    }
    if (indices.empty())
      return json_to_py(crn::textio::completion_json(sys, crn::complete_closed(sys, minimal, tol)));
    return json_to_py(crn::textio::admissible_json(
        sys, crn::complete_admissible(sys, crn::ConstraintSet{indices}, minimal, tol)));
  }

  py::object simulate(double t_end, const py::dict& init, double rel_tol,
                      double abs_tol) const {
    const crn::KineticSystem sys = kinetic();
    crn::SimulationConfig cfg;
    cfg.t_end = t_end;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    std::vector<double> n0(sys.n_species(), 0.0);
    for (const auto& [i, v] : to_species_map(parsed_.network, init)) n0[i] = v;
    return trajectory_dict(sys, crn::integrate(sys, n0, cfg));
  }

  py::object simulate_flux(double t_end, const py::dict& freeze, const py::dict& init,
                           double rel_tol, double abs_tol) const {
    const crn::KineticSystem sys = kinetic();
    crn::SimulationConfig cfg;
    cfg.t_end = t_end;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = abs_tol;
    const auto frozen = to_species_map(parsed_.network, freeze);
    std::vector<std::size_t> u;
    for (const auto& [i, v] : frozen) u.push_back(i);
    const auto init_map = to_species_map(parsed_.network, init);
    std::vector<double> n0_v;
    for (std::size_t i = 0; i < sys.n_species(); ++i) {
      if (frozen.count(i)) continue;
      const auto it = init_map.find(i);
      n0_v.push_back(it == init_map.end() ? 0.0 : it->second);
    }
    return trajectory_dict(
        sys, crn::integrate_with_fluxes(sys, u, crn::FrozenConcentrations{frozen}, n0_v, cfg));
  }

  std::vector<double> mass_action_rhs(const std::vector<double>& n) const {
    return crn::mass_action_rhs(kinetic(), n);
  }

 private:
  crn::KineticSystem kinetic() const {
    return crn::KineticSystem(parsed_.network, parsed_.rates);
  }

  py::object trajectory_dict(const crn::KineticSystem& sys, const crn::Trajectory& traj) const {
    json j = crn::textio::trajectory_summary_json(sys, traj);
    j["times"] = traj.times;
    j["states"] = traj.states;
    j["free_energy"] = traj.free_energy;
    j["dissipation"] = traj.dissipation;
    return json_to_py(j);
  }

  crn::textio::ParsedNetwork parsed_;
};

std::vector<std::vector<std::string>> nullspace_py(
    const std::vector<std::vector<std::string>>& rows) {
  std::vector<crn::RatVec> rat_rows;
  for (const auto& row : rows) {
    crn::RatVec r;
    for (const auto& entry : row) r.emplace_back(entry);
    rat_rows.push_back(std::move(r));
  }
  const crn::ratlin::SubspaceBasis basis =
      crn::ratlin::nullspace(crn::ratlin::RationalMatrix::from_rows(rat_rows));
  std::vector<std::vector<std::string>> out;
  for (const auto& v : basis.vectors) {
    std::vector<std::string> row;
    for (const auto& x : v) row.push_back(x.str());
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Detailed-balance analysis of bidirectional mass-action reaction networks";

  py::class_<System>(m, "System")
      .def(py::init<const std::string&>(), py::arg("text"))
      .def_property_readonly("species", &System::species)
      .def("structure", &System::structure)
      .def("check_db", &System::check_db, py::arg("tol") = crn::kDbTolDefault)
      .def("reduce", &System::reduce, py::arg("freeze"), py::arg("tol") = crn::kDbTolDefault)
      .def("complete", &System::complete, py::arg("constrained") = std::vector<std::string>{},
           py::arg("minimal") = false, py::arg("tol") = crn::kDbTolDefault)
      .def("simulate", &System::simulate, py::arg("t_end"), py::arg("init"),
           py::arg("rel_tol") = 1e-8, py::arg("abs_tol") = 1e-10)
      .def("simulate_flux", &System::simulate_flux, py::arg("t_end"), py::arg("freeze"),
           py::arg("init"), py::arg("rel_tol") = 1e-8, py::arg("abs_tol") = 1e-10)
      .def("mass_action_rhs", &System::mass_action_rhs, py::arg("n"));

  m.def("nullspace", &nullspace_py, py::arg("rows"),
        "Exact kernel of a rational matrix; entries and results as 'p/q' strings.");
}
