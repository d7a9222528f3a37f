#include "loopfield/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "loopfield/decomposition.hpp"

namespace loopfield {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double weighted_residual_norm(const MeasurementSetup& s, const Reading& r) {
  double acc = 0.0;
  for (size_t q = 0; q < r.values.size(); ++q) acc += s.weights[q] * r.values[q] * r.values[q];
  return std::sqrt(acc);
}

double adjoint_sup_norm(const Reading& f, const MeasurementSetup& s, const EdgeSupport& support) {
  double m = 0.0;
  for (const auto& [e, v] : adjoint_edges(f, s, support)) m = std::max(m, std::abs(v));
  return m;
}

struct UnionFind {
  std::vector<int> up;
  explicit UnionFind(int n) : up(static_cast<size_t>(n)) {
    for (int i = 0; i < n; ++i) up[static_cast<size_t>(i)] = i;
  }
  int find(int x) {
    while (up[static_cast<size_t>(x)] != x) x = up[static_cast<size_t>(x)] = up[static_cast<size_t>(up[static_cast<size_t>(x)])];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    up[static_cast<size_t>(a)] = b;
    return true;
  }
};

int vertex_id(const Grid& g, const Vertex& v) { return v.j * (g.nx + 1) + v.i; }

std::vector<EdgeId> all_grid_edges(const Grid& g) {
  std::vector<EdgeId> edges;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) edges.push_back({EdgeKind::H, i, j});
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) edges.push_back({EdgeKind::V, i, j});
  return edges;
}

json path_diagnostics(const MeasurementSetup& setup, const std::vector<double>& schedule,
                      const std::vector<Solution>& path, const EdgeMeasure* reference) {
  json rows = json::array();
  for (size_t k = 0; k < path.size(); ++k) {
    const Solution& sol = path[k];
    json row{{"lambda", schedule[k]},
             {"objective", sol.objective},
             {"tv", tv_norm(sol.as_measure())},
             {"residual_norm", weighted_residual_norm(setup, sol.residual)},
             {"max_offsupport", sol.certificate.max_offsupport},
             {"max_onsupport_gap", sol.certificate.max_onsupport_gap}};
    if (reference) {
      EdgeMeasure diff = sol.as_measure();
      diff.add(*reference, -1.0);
      row["ref_tv_distance"] = tv_norm(diff);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_path_csv(const json& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const bool with_ref = !rows.empty() && rows.front().contains("ref_tv_distance");
  out << "lambda,objective,tv,residual_norm,max_offsupport,max_onsupport_gap";
  if (with_ref) out << ",ref_tv_distance";
  out << "\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.at("lambda").get<double>() << "," << r.at("objective").get<double>() << ","
        << r.at("tv").get<double>() << "," << r.at("residual_norm").get<double>() << ","
        << r.at("max_offsupport").get<double>() << "," << r.at("max_onsupport_gap").get<double>();
    if (with_ref) out << "," << r.at("ref_tv_distance").get<double>();
    out << "\n";
  }
}

}  // namespace

bool ExperimentReport::passed() const {
  for (const CheckLine& c : checks)
    if (!c.passed) return false;
  return true;
}

void ExperimentReport::add(const std::string& check, bool ok, const std::string& detail) {
  checks.push_back({check, ok, detail});
}

UnitSquareFixture make_unit_square() {
  UnitSquareFixture fx;
  fx.grid = Grid(1, 1, 1.0);
  fx.support = EdgeSupport(fx.grid, all_grid_edges(fx.grid));
  fx.mu0 = EdgeMeasure(fx.grid);
  fx.mu0.add_weight({EdgeKind::H, 0, 0}, 1.0);   // bottom, left to right
  fx.mu0.add_weight({EdgeKind::H, 0, 1}, -1.0);  // top, right to left
  fx.mu1 = EdgeMeasure(fx.grid);
  fx.mu1.add_weight({EdgeKind::V, 1, 0}, -1.0);  // right, top to bottom
  fx.mu1.add_weight({EdgeKind::V, 0, 0}, 1.0);   // left, bottom to top
  // Quarter-turn-symmetric point lattice above the square; unit weights keep
  // the operator scale O(1) so the pinned lambda schedule bites.
  fx.setup = MeasurementSetup::plane_grid(5, 5, 0.0, 1.0, 0.0, 1.0, 0.5, {0.0, 0.0, 1.0}, kFourPi,
                                          25.0);
  return fx;
}

SegmentsFixture make_separated_segments(std::uint64_t seed) {
  SegmentsFixture fx;
  fx.grid = Grid(14, 1, 0.25);
  std::vector<EdgeId> edges;
  for (int i = 0; i < 14; ++i) {
    edges.push_back({EdgeKind::H, i, 0});
    edges.push_back({EdgeKind::H, i, 1});
  }
  edges.push_back({EdgeKind::V, 0, 0});
  edges.push_back({EdgeKind::V, 7, 0});
  edges.push_back({EdgeKind::V, 14, 0});
  fx.support = EdgeSupport(fx.grid, std::move(edges));

  // Unit-speed flow along two collinear unit segments, gap 1.5.
  fx.mu_edges = EdgeMeasure(fx.grid);
  for (int i = 0; i < 4; ++i) fx.mu_edges.add_weight({EdgeKind::H, i, 0}, fx.grid.h);
  for (int i = 10; i < 14; ++i) fx.mu_edges.add_weight({EdgeKind::H, i, 0}, fx.grid.h);
  fx.family = SegmentFamily({{{0.0, 0.0}, {1.0, 0.0}}, {{2.5, 0.0}, {3.5, 0.0}}});

  Rng rng(seed);
  std::vector<Dipole> atoms;
  for (int k = 0; k < 3; ++k)
    atoms.push_back({{rng.uniform(0.2, 3.3), rng.uniform(-1.4, -0.6)},
                     {rng.normal(), rng.normal(), rng.normal()}});
  fx.dipoles = DipoleField(std::move(atoms));

  fx.setup = MeasurementSetup::plane_grid(12, 6, -0.3, 3.8, -0.6, 0.85, 0.3, {0.0, 0.0, 1.0},
                                          kFourPi * 10.0, 72.0);
  return fx;
}

CellFunction random_cell_function(const Grid& g, Rng& rng, int vmin, int vmax, bool blobs) {
  CellFunction phi(g);
  if (!blobs) {
    for (double& v : phi.values) v = rng.uniform_int(vmin, vmax);
    return phi;
  }
  for (int rect = 0; rect < 6; ++rect) {
    const int i0 = rng.uniform_int(0, g.nx - 1), j0 = rng.uniform_int(0, g.ny - 1);
    const int i1 = rng.uniform_int(i0, g.nx - 1), j1 = rng.uniform_int(j0, g.ny - 1);
    const int amp = rng.uniform_int(vmin, vmax);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) phi.at(i, j) += amp;
  }
  return phi;
}

EdgeSupport random_tree_support(const Grid& g, Rng& rng) {
  std::vector<EdgeId> edges = all_grid_edges(g);
  for (size_t k = edges.size(); k > 1; --k)
    std::swap(edges[k - 1], edges[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(k) - 1))]);
  UnionFind uf(g.vertex_count());
  std::vector<EdgeId> tree;
  for (const EdgeId& e : edges)
    if (uf.unite(vertex_id(g, e.tail()), vertex_id(g, e.head()))) tree.push_back(e);
  return EdgeSupport(g, std::move(tree));
}

EdgeSupport random_cyclic_support(const Grid& g, Rng& rng, int cycles, int max_edges) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    EdgeSupport tree = random_tree_support(g, rng);
    std::set<EdgeId> chosen(tree.edges.begin(), tree.edges.end());

    // prune random leaves down to the edge budget
    const int target_tree = std::max(4, max_edges - cycles);
    while (static_cast<int>(chosen.size()) > target_tree) {
      std::map<Vertex, int> degree;
      for (const EdgeId& e : chosen) {
        ++degree[e.tail()];
        ++degree[e.head()];
      }
      std::vector<EdgeId> leaves;
      for (const EdgeId& e : chosen)
        if (degree[e.tail()] == 1 || degree[e.head()] == 1) leaves.push_back(e);
      if (leaves.empty()) break;
      chosen.erase(leaves[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(leaves.size()) - 1))]);
    }

    std::set<Vertex> verts;
    for (const EdgeId& e : chosen) {
      verts.insert(e.tail());
      verts.insert(e.head());
    }
    std::vector<EdgeId> chords;
    for (const EdgeId& e : all_grid_edges(g))
      if (!chosen.count(e) && verts.count(e.tail()) && verts.count(e.head())) chords.push_back(e);
    for (int c = 0; c < cycles && !chords.empty(); ++c) {
      const size_t pick = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(chords.size()) - 1));
      chosen.insert(chords[pick]);
      chords.erase(chords.begin() + static_cast<long>(pick));
    }
    EdgeSupport support(g, {chosen.begin(), chosen.end()});
    if (static_cast<int>(silent_basis(support).size()) == cycles &&
        support.size() <= max_edges)
      return support;
  }
  throw std::runtime_error("random_cyclic_support: could not build requested support");
}

MeasurementSetup standard_setup_for(const EdgeSupport& support, int points_per_axis, double height,
                                    double mu0_scale) {
  const Grid& g = support.grid;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const EdgeId& e : support.edges) {
    for (const Vertex& v : {e.tail(), e.head()}) {
      const auto xy = g.vertex_xy(v.i, v.j);
      xmin = std::min(xmin, xy[0]);
      xmax = std::max(xmax, xy[0]);
      ymin = std::min(ymin, xy[1]);
      ymax = std::max(ymax, xy[1]);
    }
  }
  const double pad = 0.5 * g.h;
  return MeasurementSetup::plane_grid(points_per_axis, points_per_axis, xmin - pad, xmax + pad,
                                      ymin - pad, ymax + pad, height, {0.0, 0.0, 1.0},
                                      kFourPi * mu0_scale,
                                      static_cast<double>(points_per_axis * points_per_axis));
}

CheckLine verify_decomposition(const EdgeMeasure& nu, const LoopDecomposition& d) {
  CheckLine line{"decomposition structure", true, ""};
  auto fail = [&](const std::string& why) {
    line.passed = false;
    if (!line.detail.empty()) line.detail += "; ";
    line.detail += why;
  };

  std::map<EdgeId, double> mass;  // sum of level thickness per edge
  std::map<EdgeId, int> direction;
  for (const auto& lvl : d.levels) {
    std::set<EdgeId> level_edges;
    const double dt = lvl.t_hi - lvl.t_lo;
    for (size_t n = 0; n < lvl.loops.size(); ++n) {
      const OrientedLoop& loop = lvl.loops[n];
      if (!loop.is_simple()) fail("loop not simple");
      if (std::abs(lvl.masses[n] - dt * loop.length(d.grid)) > 1e-12 * std::max(1.0, lvl.masses[n]))
        fail("mass != dt * length");
      const size_t m = loop.vertices.size();
      for (size_t k = 0; k < m; ++k) {
        int sgn;
        const EdgeId e = edge_between(loop.vertices[k], loop.vertices[(k + 1) % m], sgn);
        if (!level_edges.insert(e).second) fail("loops overlap within a level");
        mass[e] += dt;
        auto [it, fresh] = direction.emplace(e, sgn);
        if (!fresh && it->second != sgn) fail("inconsistent traversal direction across levels");
      }
    }
  }
  for (const auto& [e, m] : mass) {
    const double w = nu.weight(e);
    if (m != std::abs(w)) fail("per-edge mass identity broken at " + e.token());
    if ((w > 0 ? 1 : -1) != direction[e]) fail("traversal direction disagrees with sign at " + e.token());
  }
  for (const auto& [e, w] : nu.weights)
    if (!mass.count(e)) fail("support edge missing from decomposition: " + e.token());
  return line;
}

ExperimentReport run_unit_square(std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "unit_square";
  const UnitSquareFixture fx = make_unit_square();

  const double tv0 = tv_norm(fx.mu0), tv1 = tv_norm(fx.mu1);
  rep.add("tv(mu0) == tv(mu1) == 2", tv0 == 2.0 && tv1 == 2.0, fmt(tv0) + ", " + fmt(tv1));

  const Reading f0 = forward_edges(fx.mu0, fx.setup);
  const Reading f1 = forward_edges(fx.mu1, fx.setup);
  double dmax = 0.0;
  for (size_t q = 0; q < f0.values.size(); ++q)
    dmax = std::max(dmax, std::abs(f0.values[q] - f1.values[q]));
  const double fscale = std::max(1.0, max_abs(f0.values));
  rep.add("A(mu0) == A(mu1)", dmax <= 1e-14 * fscale, "max |diff| = " + fmt(dmax));

  const MinimalityReport cert =
      certify_tv_minimal({fx.mu0, DipoleField{}}, fx.support, CertifyMode::Exhaustive);
  rep.add("mu0 minimal, not strict", cert.verdict == MinimalityVerdict::Minimal,
          to_string(cert.verdict));

  const Ep1Report ep1 = ep1_oracle(fx.mu0, fx.support, 41);
  rep.add("ep1 min tv == 2 on a segment of minimizers",
          std::abs(ep1.min_tv - 2.0) <= 1e-9 && !ep1.unique_point,
          "min " + fmt(ep1.min_tv) + ", argmin " + ep1.argmin_kind);

  const std::vector<double> schedule{1.0, 0.3, 0.1, 0.03, 0.01};
  SolveOptions base;
  base.tol = 1e-10;
  base.max_iters = 50000;
  base.seed = seed;
  const std::vector<Solution> path = lambda_path(f0, fx.setup, fx.support, schedule, nullptr, base);
  const Solution& terminal = path.back();
  double worst = 0.0;
  for (Eigen::Index e = 0; e < terminal.weights.size(); ++e)
    worst = std::max(worst, std::abs(std::abs(terminal.weights[e]) - 0.5));
  bool all_cert = true;
  for (const Solution& s : path) all_cert = all_cert && s.converged;
  rep.add("lambda-path terminal weights -> 1/2", worst <= 1e-3 && all_cert,
          "max | |w| - 1/2 | = " + fmt(worst));

  // Symmetric-noise variant: noise invariant under the quarter turn of the
  // 5x5 point lattice; same limit, recorded as an artifact.
  Rng rng(seed);
  Reading noise;
  noise.values.assign(25, 0.0);
  std::vector<char> done(25, 0);
  const double amp = 1e-3 * max_abs(f0.values);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) {
      const int idx = j * 5 + i;
      if (done[static_cast<size_t>(idx)]) continue;
      const double val = amp * rng.normal();
      int ci = i, cj = j;
      for (int r = 0; r < 4; ++r) {
        const int id2 = cj * 5 + ci;
        noise.values[static_cast<size_t>(id2)] = val;
        done[static_cast<size_t>(id2)] = 1;
        const int ni = 4 - cj, nj = ci;  // quarter turn about the lattice center
        ci = ni;
        cj = nj;
      }
    }
  const std::vector<Solution> noisy_path =
      lambda_path(f0, fx.setup, fx.support, schedule, &noise, base);
  double worst_noisy = 0.0;
  for (Eigen::Index e = 0; e < noisy_path.back().weights.size(); ++e)
    worst_noisy = std::max(worst_noisy, std::abs(std::abs(noisy_path.back().weights[e]) - 0.5));
  rep.add("symmetric-noise path stays near (mu0+mu1)/2", worst_noisy <= 5e-3,
          "max | |w| - 1/2 | = " + fmt(worst_noisy));

  rep.artifacts["mu0"] = to_json(fx.mu0);
  rep.artifacts["mu1"] = to_json(fx.mu1);
  rep.artifacts["setup"] = to_json(fx.setup);
  rep.artifacts["ep1"] = to_json(ep1);
  rep.artifacts["path"] = path_diagnostics(fx.setup, schedule, path, nullptr);
  rep.artifacts["terminal_solution"] = to_json(terminal);
  rep.artifacts["noisy_terminal_solution"] = to_json(noisy_path.back());
  return rep;
}

ExperimentReport run_separated_segments(std::uint64_t seed) {
  ExperimentReport rep;
  rep.name = "separated_segments";
  const SegmentsFixture fx = make_separated_segments(seed);

  const SeparationReport sep = segment_separation_check(fx.family, true);
  rep.add("segments strictly separated", sep.all_ok);

  const Magnetization mu_full{fx.mu_edges, fx.dipoles};
  const MinimalityReport cert = certify_tv_minimal(mu_full, fx.support, CertifyMode::Exhaustive);
  rep.add("certified strict with dipoles present", cert.verdict == MinimalityVerdict::Strict,
          to_string(cert.verdict) + " over " + std::to_string(cert.cycles_checked) + " cycles");

  const VariationalReport varrep = variational_certify(mu_full, fx.support, 200, seed);
  rep.add("variational pairing nonnegative", varrep.min_pairing >= -1e-12,
          "min pairing " + fmt(varrep.min_pairing));

  const Ep1Report ep1 = ep1_oracle(fx.mu_edges, fx.support, 41);
  rep.add("ep1 oracle: unique minimizer at mu0",
          std::abs(ep1.min_tv - tv_norm(fx.mu_edges)) <= 1e-9 && ep1.unique_point,
          "min " + fmt(ep1.min_tv) + ", argmin " + ep1.argmin_kind);

  const Reading f = forward_edges(fx.mu_edges, fx.setup);
  const std::vector<double> schedule{1.0, 0.3, 0.1, 0.03, 0.01};
  SolveOptions base;
  base.tol = 1e-10;
  base.max_iters = 60000;
  base.seed = seed;
  const std::vector<Solution> path = lambda_path(f, fx.setup, fx.support, schedule, nullptr, base);
  EdgeMeasure diff = path.back().as_measure();
  diff.add(fx.mu_edges, -1.0);
  const double dist = tv_norm(diff);
  rep.add("lambda-path terminal recovers mu0 within 1e-3 TV", dist <= 1e-3,
          "tv distance " + fmt(dist));

  rep.artifacts["mu_edges"] = to_json(fx.mu_edges);
  rep.artifacts["dipoles"] = to_json(fx.dipoles);
  rep.artifacts["setup"] = to_json(fx.setup);
  rep.artifacts["certify"] = to_json(cert);
  rep.artifacts["variational"] = to_json(varrep);
  rep.artifacts["path"] = path_diagnostics(fx.setup, schedule, path, &fx.mu_edges);
  rep.artifacts["terminal_solution"] = to_json(path.back());
  return rep;
}

ExperimentReport run_tree_like(std::uint64_t seed, int instances) {
  ExperimentReport rep;
  rep.name = "tree_like";
  const Grid grid(6, 6, 1.0);
  int basis_ok = 0, nullity_ok = 0, recover_ok = 0;
  double worst_dist = 0.0;
  for (int k = 0; k < instances; ++k) {
    Rng rng(seed + static_cast<std::uint64_t>(k) * 7919);
    const EdgeSupport tree = random_tree_support(grid, rng);
    if (treelike_check(tree) && silent_basis(tree).empty()) ++basis_ok;

    const MeasurementSetup setup = standard_setup_for(tree, 10, 0.5, 10.0);
    const KernelReport kr = kernel_dimension_check(setup, tree, 1e-8);
    if (kr.nullity == 0 && kr.sufficient) ++nullity_ok;

    EdgeMeasure truth(grid);
    std::set<int> picked;
    while (static_cast<int>(picked.size()) < 6)
      picked.insert(rng.uniform_int(0, tree.size() - 1));
    for (int idx : picked) {
      const double w = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 2.0);
      truth.add_weight(tree.edges[static_cast<size_t>(idx)], w);
    }
    const Reading f = forward_edges(truth, setup);
    SolveOptions opts;
    opts.lambda = 1e-3;
    opts.tol = 1e-8;
    opts.max_iters = 60000;
    const Solution sol = solve_ep2(f, setup, tree, opts);
    EdgeMeasure diff = sol.as_measure();
    diff.add(truth, -1.0);
    const double dist = tv_norm(diff);
    worst_dist = std::max(worst_dist, dist);
    const bool cert_ok = sol.certificate.max_offsupport <= 1.0 + 1e-6 &&
                         sol.certificate.max_onsupport_gap <= 1e-6;
    if (dist <= 1e-3 && cert_ok) ++recover_ok;
  }
  rep.add("silent basis empty on all trees", basis_ok == instances,
          std::to_string(basis_ok) + "/" + std::to_string(instances));
  rep.add("SVD nullity 0 on all trees", nullity_ok == instances,
          std::to_string(nullity_ok) + "/" + std::to_string(instances));
  rep.add("EP-2 recovery within 1e-3 TV", recover_ok == instances,
          "worst tv distance " + fmt(worst_dist));
  rep.artifacts["instances"] = instances;
  rep.artifacts["worst_tv_distance"] = worst_dist;
  return rep;
}

ExperimentReport run_coarea_fuzz(std::uint64_t seed, int count) {
  ExperimentReport rep;
  rep.name = "coarea_fuzz";
  const Grid grid(64, 64, 1.0);
  Rng rng(seed);
  int coarea_ok = 0, roundtrip_ok = 0, structure_ok = 0, stream_ok = 0;
  for (int n = 0; n < count; ++n) {
    const CellFunction phi = random_cell_function(grid, rng, -3, 4, n % 2 == 1);
    const EdgeMeasure nu = rotated_gradient(phi);
    const double tv = tv_norm(nu);
    double checksum = 0.0;
    for (const CoareaBand& band : coarea_profile(phi))
      checksum += (band.t_hi - band.t_lo) * band.perimeter;
    if (std::abs(tv - checksum) <= 1e-12 * std::max(1.0, tv)) ++coarea_ok;

    const LoopDecomposition d = decompose(nu);
    if (reconstruct(d) == nu) ++roundtrip_ok;
    if (verify_decomposition(nu, d).passed) ++structure_ok;
    if (stream_function(nu) == phi) ++stream_ok;
  }
  const std::string total = "/" + std::to_string(count);
  rep.add("exact co-area identity", coarea_ok == count, std::to_string(coarea_ok) + total);
  rep.add("decompose/reconstruct round trip", roundtrip_ok == count,
          std::to_string(roundtrip_ok) + total);
  rep.add("per-edge masses, simplicity, orientation", structure_ok == count,
          std::to_string(structure_ok) + total);
  rep.add("stream function round trip", stream_ok == count, std::to_string(stream_ok) + total);
  rep.artifacts["count"] = count;
  return rep;
}

ExperimentReport run_uniqueness_multistart(std::uint64_t seed, int instances, int starts) {
  ExperimentReport rep;
  rep.name = "uniqueness_multistart";
  const Grid grid(6, 6, 1.0);
  int agree_ok = 0, cert_ok = 0, cases = 0;
  double worst_spread = 0.0;
  for (int inst = 0; inst < instances; ++inst) {
    Rng rng(seed + static_cast<std::uint64_t>(inst) * 104729);
    const EdgeSupport support = random_cyclic_support(grid, rng, 3, 55);
    const MeasurementSetup setup = standard_setup_for(support, 11, 0.5, 10.0);

    Reading f;
    f.values.resize(static_cast<size_t>(setup.size()));
    for (double& v : f.values) v = rng.normal();
    const double a0 = adjoint_sup_norm(f, setup, support);
    for (double& v : f.values) v /= 2.0 * a0;  // normalizes the zero-solution threshold to 1

    for (double lambda : {0.1, 0.01}) {
      ++cases;
      SolveOptions opts;
      opts.lambda = lambda;
      opts.tol = 1e-9;
      opts.max_iters = 80000;
      const double scale = adjoint_sup_norm(f, setup, support) / lambda;
      std::vector<Solution> sols;
      for (int s = 0; s < starts; ++s) {
        Eigen::VectorXd w0 = Eigen::VectorXd::Zero(support.size());
        if (s > 0)
          for (Eigen::Index e = 0; e < w0.size(); ++e) w0[e] = scale * rng.normal();
        sols.push_back(solve_ep2_from(f, setup, support, opts, w0));
      }
      double spread = 0.0;
      for (size_t a = 0; a < sols.size(); ++a)
        for (size_t b = a + 1; b < sols.size(); ++b)
          spread = std::max(spread,
                            (sols[a].weights - sols[b].weights).lpNorm<Eigen::Infinity>());
      worst_spread = std::max(worst_spread, spread);
      if (spread <= 1e-6) ++agree_ok;
      bool all_cert = true;
      for (const Solution& s : sols)
        all_cert = all_cert && s.certificate.max_offsupport <= 1.0 + 1e-6 &&
                   s.certificate.max_onsupport_gap <= 1e-6;
      if (all_cert) ++cert_ok;
    }
  }
  rep.add("multi-start solutions agree within 1e-6", agree_ok == cases,
          "worst spread " + fmt(worst_spread));
  rep.add("all certificates pass at tol 1e-6", cert_ok == cases,
          std::to_string(cert_ok) + "/" + std::to_string(cases));
  rep.artifacts["instances"] = instances;
  rep.artifacts["starts"] = starts;
  rep.artifacts["worst_spread"] = worst_spread;
  return rep;
}

ExperimentReport run_experiment(const std::string& name, std::uint64_t seed,
                                const std::string& out_dir) {
  ExperimentReport rep;
  if (name == "unit_square")
    rep = run_unit_square(seed);
  else if (name == "separated_segments")
    rep = run_separated_segments(seed);
  else if (name == "tree_like")
    rep = run_tree_like(seed);
  else if (name == "coarea_fuzz")
    rep = run_coarea_fuzz(seed);
  else if (name == "uniqueness_multistart")
    rep = run_uniqueness_multistart(seed);
  else
    throw std::invalid_argument("unknown experiment: " + name);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    json checks = json::array();
    for (const CheckLine& c : rep.checks)
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    save_json(json{{"name", rep.name}, {"passed", rep.passed()}, {"checks", checks}},
              out_dir + "/report.json");
    save_json(rep.artifacts, out_dir + "/artifacts.json");
    if (rep.artifacts.contains("path"))
      write_path_csv(rep.artifacts["path"], out_dir + "/path.csv");
  }
  return rep;
}

}  // namespace loopfield
