#include "loopfield/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace loopfield {

double LoopDecomposition::total_mass() const {
  double m = 0.0;
  for (const auto& lvl : levels)
    for (double x : lvl.masses) m += x;
  return m;
}

EdgeMeasure rotated_gradient(const CellFunction& phi) {
  const Grid& g = phi.grid;
  EdgeMeasure m(g);
  // Horizontal edge (i,j): jump from the cell below to the cell above.
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const double w = (phi.value(i, j) - phi.value(i, j - 1)) * g.h;
      if (w != 0.0) m.add_weight({EdgeKind::H, i, j}, w);
    }
  // Vertical edge (i,j): jump from the right cell to the left cell.
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const double w = (phi.value(i - 1, j) - phi.value(i, j)) * g.h;
      if (w != 0.0) m.add_weight({EdgeKind::V, i, j}, w);
    }
  return m;
}

CellFunction stream_function(const EdgeMeasure& nu, double div_tol) {
  require_divergence_free(nu, div_tol);
  const Grid& g = nu.grid;
  CellFunction phi(g);
  // Integrate the horizontal jumps upward, column by column, from the
  // exterior value 0 below the grid. Divergence-freeness makes the result
  // independent of the integration path.
  for (int i = 0; i < g.nx; ++i) {
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      acc += nu.weight({EdgeKind::H, i, j}) / g.h;
      phi.at(i, j) = acc;
    }
  }
  return phi;
}

PixelSet suplevel_set(const CellFunction& phi, double t) {
  std::vector<int> cells;
  for (int c = 0; c < phi.grid.cell_count(); ++c)
    if (phi.values[static_cast<size_t>(c)] > t) cells.push_back(c);
  return PixelSet(phi.grid, std::move(cells));
}

double suplevel_perimeter(const CellFunction& phi, double t) {
  const Grid& g = phi.grid;
  long long edges = 0;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if ((phi.value(i, j) > t) != (phi.value(i, j - 1) > t)) ++edges;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      if ((phi.value(i - 1, j) > t) != (phi.value(i, j) > t)) ++edges;
  return g.h * static_cast<double>(edges);
}

namespace {

std::vector<double> distinct_values_with_zero(const CellFunction& phi) {
  std::set<double> vals(phi.values.begin(), phi.values.end());
  vals.insert(0.0);
  return {vals.begin(), vals.end()};
}

}  // namespace

std::vector<CoareaBand> coarea_profile(const CellFunction& phi) {
  const std::vector<double> vals = distinct_values_with_zero(phi);
  std::vector<CoareaBand> bands;
  for (size_t k = 0; k + 1 < vals.size(); ++k) {
    const double t = vals[k] + (vals[k + 1] - vals[k]) / 2.0;
    bands.push_back({vals[k], vals[k + 1], suplevel_perimeter(phi, t)});
  }
  return bands;
}

LoopDecomposition decompose(const EdgeMeasure& nu, double div_tol) {
  const CellFunction phi = stream_function(nu, div_tol);
  const Grid& g = nu.grid;
  LoopDecomposition d;
  d.grid = g;
  const std::vector<double> vals = distinct_values_with_zero(phi);
  for (size_t k = 0; k + 1 < vals.size(); ++k) {
    const double t_lo = vals[k], t_hi = vals[k + 1];
    const double t = t_lo + (t_hi - t_lo) / 2.0;
    DecompositionLevel lvl;
    lvl.t_lo = t_lo;
    lvl.t_hi = t_hi;

    std::vector<OrientedLoop> loops;
    if (t > 0.0) {
      BoundaryCurves bc = boundary_curves(suplevel_set(phi, t));
      loops = std::move(bc.outer);
      loops.insert(loops.end(), bc.holes.begin(), bc.holes.end());
    } else {
      // The suplevel set is unbounded here; its boundary is that of the
      // bounded sublevel complement, traversed the opposite way.
      std::vector<int> cells;
      for (int c = 0; c < g.cell_count(); ++c)
        if (phi.values[static_cast<size_t>(c)] <= t) cells.push_back(c);
      BoundaryCurves bc = boundary_curves(PixelSet(g, std::move(cells)));
      for (auto& lp : bc.outer) loops.push_back(lp.reversed());
      for (auto& lp : bc.holes) loops.push_back(lp.reversed());
      for (auto& lp : loops) lp.canonicalize();
    }
    // Canonical order: enclosed area descending, then smallest start vertex.
    std::stable_sort(loops.begin(), loops.end(), [](const OrientedLoop& a, const OrientedLoop& b) {
      const long long aa = std::llabs(a.signed_area2()), ab = std::llabs(b.signed_area2());
      if (aa != ab) return aa > ab;
      return a.vertices.front() < b.vertices.front();
    });
    if (loops.empty()) continue;
    for (auto& lp : loops) lvl.masses.push_back((t_hi - t_lo) * lp.length(g));
    lvl.loops = std::move(loops);
    d.levels.push_back(std::move(lvl));
  }
  return d;
}

EdgeMeasure reconstruct(const LoopDecomposition& d) {
  EdgeMeasure m(d.grid);
  for (const auto& lvl : d.levels)
    for (const auto& loop : lvl.loops) m.add(edge_measure_from_loop(d.grid, loop, lvl.t_hi - lvl.t_lo));
  return m;
}

std::vector<RepresentingAtom> representing_measure(const LoopDecomposition& d) {
  std::vector<RepresentingAtom> atoms;
  for (const auto& lvl : d.levels)
    for (size_t n = 0; n < lvl.loops.size(); ++n) {
      if (lvl.loops[n].edge_count() == 0) continue;  // degenerate loops carry no atom
      atoms.push_back({lvl.masses[n], lvl.loops[n], 1.0});
    }
  return atoms;
}

}  // namespace loopfield
