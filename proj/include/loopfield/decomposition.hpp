#pragma once

// Rotated gradients of cell functions, suplevel sets, the exact discrete
// co-area identity, and the loop decomposition of divergence-free edge
// measures into weighted oriented Jordan curves.

#include <vector>

#include "loopfield/measures.hpp"

namespace loopfield {

// Scalar value per cell, implicitly 0 outside the grid. Stored dense.
struct CellFunction {
  Grid grid;
  std::vector<double> values;  // size nx*ny, indexed by cell id

  CellFunction() = default;
  explicit CellFunction(const Grid& g) : grid(g), values(static_cast<size_t>(g.cell_count()), 0.0) {}

  double value(int i, int j) const {  // exterior reads as 0
    return grid.cell_in_range(i, j) ? values[static_cast<size_t>(grid.cell_id(i, j))] : 0.0;
  }
  double& at(int i, int j) { return values[static_cast<size_t>(grid.cell_id(i, j))]; }

  bool operator==(const CellFunction&) const = default;
};

struct DecompositionLevel {
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::vector<OrientedLoop> loops;
  std::vector<double> masses;  // per loop: (t_hi - t_lo) * length
};

// Theorem-style representation of a divergence-free edge measure: levels
// between consecutive values of the stream function, each carrying
// edge-disjoint oriented loops.
struct LoopDecomposition {
  Grid grid;
  std::vector<DecompositionLevel> levels;

  double total_mass() const;
};

// One atom of the representing measure rho: a unit-TV loop measure R_gamma /
// length(gamma) weighted by length * level thickness.
struct RepresentingAtom {
  double mass = 0.0;
  OrientedLoop loop;
  double normalized_tv = 1.0;
};

// Edge measure circulating counterclockwise around the suplevel sets of phi;
// exactly divergence-free by construction.
EdgeMeasure rotated_gradient(const CellFunction& phi);

// Inverse of rotated_gradient normalized to 0 on the unbounded exterior;
// throws divergence_error when nu has a source.
CellFunction stream_function(const EdgeMeasure& nu, double div_tol = 1e-12);

// Cells where phi > t.
PixelSet suplevel_set(const CellFunction& phi, double t);

struct CoareaBand {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double perimeter = 0.0;  // of the (constant) suplevel set on this band
};

// Bands between consecutive distinct values of phi (0 included); the sum of
// band width times perimeter reproduces tv_norm(rotated_gradient(phi)).
std::vector<CoareaBand> coarea_profile(const CellFunction& phi);

// Perimeter of {phi > t} as a subset of the plane (exterior value 0), valid
// for any t including negative thresholds where the suplevel set is unbounded.
double suplevel_perimeter(const CellFunction& phi, double t);

LoopDecomposition decompose(const EdgeMeasure& nu, double div_tol = 1e-12);

// Sum of (level thickness) * R_gamma over all loops; exact inverse of
// decompose.
EdgeMeasure reconstruct(const LoopDecomposition& d);

// The discrete representing measure: one atom per nondegenerate loop, with
// total mass equal to the TV of the decomposed measure.
std::vector<RepresentingAtom> representing_measure(const LoopDecomposition& d);

}  // namespace loopfield
