#include "loopfield/json_io.hpp"

#include <fstream>

namespace loopfield {

namespace {

json edge_to_json(const EdgeId& e, double w, bool with_weight) {
  json j{{"kind", e.kind == EdgeKind::H ? "h" : "v"}, {"i", e.i}, {"j", e.j}};
  if (with_weight) j["w"] = w;
  return j;
}

EdgeId edge_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "h" && kind != "v") throw std::runtime_error("edge: kind must be \"h\" or \"v\"");
  return {kind == "h" ? EdgeKind::H : EdgeKind::V, j.at("i").get<int>(), j.at("j").get<int>()};
}

}  // namespace

json to_json(const Grid& g) {
  return {{"nx", g.nx}, {"ny", g.ny}, {"h", g.h}, {"origin", {g.origin[0], g.origin[1]}}};
}

Grid grid_from_json(const json& j) {
  return Grid(j.at("nx").get<int>(), j.at("ny").get<int>(), j.at("h").get<double>(),
              {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()});
}

json to_json(const PixelSet& p) {
  return {{"grid", to_json(p.grid)}, {"cells", p.cells}};
}

PixelSet pixelset_from_json(const json& j) {
  return PixelSet(grid_from_json(j.at("grid")), j.at("cells").get<std::vector<int>>());
}

json to_json(const OrientedLoop& loop) {
  json verts = json::array();
  for (const Vertex& v : loop.vertices) verts.push_back({v.i, v.j});
  return {{"vertices", verts}, {"orientation", loop.orientation == Orientation::CCW ? "ccw" : "cw"}};
}

OrientedLoop loop_from_json(const json& j) {
  OrientedLoop loop;
  for (const auto& v : j.at("vertices"))
    loop.vertices.push_back({v.at(0).get<int>(), v.at(1).get<int>()});
  const std::string o = j.at("orientation").get<std::string>();
  if (o != "ccw" && o != "cw") throw std::runtime_error("loop: orientation must be ccw or cw");
  loop.orientation = o == "ccw" ? Orientation::CCW : Orientation::CW;
  return loop;
}

json to_json(const EdgeMeasure& m) {
  json edges = json::array();
  for (const auto& [e, w] : m.weights) edges.push_back(edge_to_json(e, w, true));
  return {{"grid", to_json(m.grid)}, {"edges", edges}};
}

EdgeMeasure edge_measure_from_json(const json& j) {
  EdgeMeasure m(grid_from_json(j.at("grid")));
  for (const auto& e : j.at("edges")) m.add_weight(edge_from_json(e), e.at("w").get<double>());
  return m;
}

json to_json(const DipoleField& d) {
  json atoms = json::array();
  for (const Dipole& a : d.atoms)
    atoms.push_back({{"x", a.position[0]},
                     {"y", a.position[1]},
                     {"m", {a.moment[0], a.moment[1], a.moment[2]}}});
  return {{"atoms", atoms}};
}

DipoleField dipole_field_from_json(const json& j) {
  std::vector<Dipole> atoms;
  for (const auto& a : j.at("atoms"))
    atoms.push_back({{a.at("x").get<double>(), a.at("y").get<double>()},
                     {a.at("m").at(0).get<double>(), a.at("m").at(1).get<double>(),
                      a.at("m").at(2).get<double>()}});
  return DipoleField(std::move(atoms));
}

json to_json(const Magnetization& m) {
  return {{"edge_part", to_json(m.edge_part)}, {"dipole_part", to_json(m.dipole_part)}};
}

Magnetization magnetization_from_json(const json& j) {
  return {edge_measure_from_json(j.at("edge_part")), dipole_field_from_json(j.at("dipole_part"))};
}

Magnetization magnetization_from_measure_file(const json& j) {
  if (j.contains("edge_part")) return magnetization_from_json(j);
  return {edge_measure_from_json(j), DipoleField{}};
}

json to_json(const CellFunction& phi) {
  json cells = json::array();
  for (int c = 0; c < phi.grid.cell_count(); ++c) {
    const double v = phi.values[static_cast<size_t>(c)];
    if (v == 0.0) continue;
    auto [i, jj] = phi.grid.cell_ij(c);
    cells.push_back({{"i", i}, {"j", jj}, {"v", v}});
  }
  return {{"grid", to_json(phi.grid)}, {"cells", cells}};
}

CellFunction cell_function_from_json(const json& j) {
  CellFunction phi(grid_from_json(j.at("grid")));
  for (const auto& c : j.at("cells"))
    phi.at(c.at("i").get<int>(), c.at("j").get<int>()) = c.at("v").get<double>();
  return phi;
}

json to_json(const LoopDecomposition& d) {
  json levels = json::array();
  for (const auto& lvl : d.levels) {
    json loops = json::array();
    for (const auto& lp : lvl.loops) loops.push_back(to_json(lp));
    levels.push_back(
        {{"t_lo", lvl.t_lo}, {"t_hi", lvl.t_hi}, {"loops", loops}, {"masses", lvl.masses}});
  }
  return {{"grid", to_json(d.grid)}, {"levels", levels}};
}

LoopDecomposition decomposition_from_json(const json& j) {
  LoopDecomposition d;
  d.grid = grid_from_json(j.at("grid"));
  for (const auto& l : j.at("levels")) {
    DecompositionLevel lvl;
    lvl.t_lo = l.at("t_lo").get<double>();
    lvl.t_hi = l.at("t_hi").get<double>();
    for (const auto& lp : l.at("loops")) lvl.loops.push_back(loop_from_json(lp));
    lvl.masses = l.at("masses").get<std::vector<double>>();
    if (lvl.masses.size() != lvl.loops.size())
      throw std::runtime_error("decomposition: masses/loops length mismatch");
    d.levels.push_back(std::move(lvl));
  }
  return d;
}

json to_json(const MeasurementSetup& s) {
  json pts = json::array();
  for (const Vec3& q : s.points) pts.push_back({q.x, q.y, q.z});
  return {{"points", pts},
          {"v", {s.direction.x, s.direction.y, s.direction.z}},
          {"weights", s.weights},
          {"mu0", s.mu0}};
}

MeasurementSetup setup_from_json(const json& j) {
  std::vector<Vec3> pts;
  for (const auto& p : j.at("points"))
    pts.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  const Vec3 v{j.at("v").at(0).get<double>(), j.at("v").at(1).get<double>(),
               j.at("v").at(2).get<double>()};
  return MeasurementSetup(std::move(pts), v, j.at("weights").get<std::vector<double>>(),
                          j.value("mu0", 1.0));
}

json to_json(const Reading& r) { return {{"values", r.values}}; }

Reading reading_from_json(const json& j) {
  return {j.at("values").get<std::vector<double>>()};
}

json to_json(const EdgeSupport& s) {
  json edges = json::array();
  for (const EdgeId& e : s.edges) edges.push_back(edge_to_json(e, 0.0, false));
  return {{"grid", to_json(s.grid)}, {"edges", edges}};
}

EdgeSupport support_from_json(const json& j) {
  std::vector<EdgeId> edges;
  for (const auto& e : j.at("edges")) edges.push_back(edge_from_json(e));
  return EdgeSupport(grid_from_json(j.at("grid")), std::move(edges));
}

json to_json(const SolveOptions& o) {
  return {{"lambda", o.lambda},
          {"max_iters", o.max_iters},
          {"tol", o.tol},
          {"restarts", o.restarts},
          {"seed", o.seed}};
}

SolveOptions solve_options_from_json(const json& j) {
  SolveOptions o;
  o.lambda = j.at("lambda").get<double>();
  o.max_iters = j.value("max_iters", o.max_iters);
  o.tol = j.value("tol", o.tol);
  o.restarts = j.value("restarts", o.restarts);
  o.seed = j.value("seed", o.seed);
  o.validate();
  return o;
}

json to_json(const CertReport& c) {
  return {{"max_offsupport", c.max_offsupport},
          {"max_onsupport_gap", c.max_onsupport_gap},
          {"passed", c.passed},
          {"tol", c.tol}};
}

json to_json(const Solution& s) {
  json w = json::object();
  for (size_t k = 0; k < s.support.edges.size(); ++k)
    w[s.support.edges[k].token()] = s.weights[static_cast<Eigen::Index>(k)];
  return {{"grid", to_json(s.support.grid)},
          {"weights", w},
          {"objective", s.objective},
          {"residual", to_json(s.residual)},
          {"certificate", to_json(s.certificate)},
          {"iterations", s.iterations},
          {"converged", s.converged}};
}

json to_json(const KernelReport& k) {
  return {{"singular_values", k.singular_values},
          {"nullity", k.nullity},
          {"cycle_count", k.cycle_count},
          {"sufficient", k.sufficient},
          {"max_basis_reading", k.max_basis_reading},
          {"threshold", k.threshold}};
}

json to_json(const MinimalityReport& m) {
  json witness = json::array();
  for (const EdgeId& e : m.witness) witness.push_back(edge_to_json(e, 0.0, false));
  return {{"verdict", to_string(m.verdict)},
          {"witness", witness},
          {"cycles_checked", m.cycles_checked}};
}

json to_json(const Ep1Report& r) {
  return {{"min_tv", r.min_tv},
          {"tv_mu0", r.tv_mu0},
          {"best_coeffs", r.best_coeffs},
          {"unique_point", r.unique_point},
          {"argmin_kind", r.argmin_kind}};
}

json to_json(const VariationalReport& r) {
  return {{"min_pairing", r.min_pairing},
          {"has_witness", r.has_witness},
          {"witness", to_json(r.witness)},
          {"n_tested", r.n_tested}};
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void save_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

}  // namespace loopfield
