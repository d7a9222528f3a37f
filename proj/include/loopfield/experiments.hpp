#pragma once

// End-to-end scenario runners behind `loopfield experiment` and the
// acceptance suite, plus the seeded instance generators they share.

#include <cstdint>
#include <string>

#include "loopfield/json_io.hpp"
#include "loopfield/rng.hpp"

namespace loopfield {

struct CheckLine {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentReport {
  std::string name;
  std::vector<CheckLine> checks;
  json artifacts = json::object();

  bool passed() const;
  void add(const std::string& check, bool ok, const std::string& detail = "");
};

// The unit-square configuration: one cell, four support edges, the two
// horizontal/vertical two-edge measures with equal fields, and a
// quarter-turn-symmetric measurement grid.
struct UnitSquareFixture {
  Grid grid;
  EdgeSupport support;
  EdgeMeasure mu0;
  EdgeMeasure mu1;
  MeasurementSetup setup;
};
UnitSquareFixture make_unit_square();

// Two collinear unit segments at gap 1.5 on a ladder support, plus seeded
// off-segment dipoles.
struct SegmentsFixture {
  Grid grid;
  EdgeSupport support;
  EdgeMeasure mu_edges;
  DipoleField dipoles;
  SegmentFamily family;
  MeasurementSetup setup;
};
SegmentsFixture make_separated_segments(std::uint64_t seed);

CellFunction random_cell_function(const Grid& g, Rng& rng, int vmin, int vmax, bool blobs);

// Random spanning tree of the full grid graph (randomized Kruskal).
EdgeSupport random_tree_support(const Grid& g, Rng& rng);

// Connected support with the requested number of independent cycles, at most
// max_edges edges.
EdgeSupport random_cyclic_support(const Grid& g, Rng& rng, int cycles, int max_edges);

MeasurementSetup standard_setup_for(const EdgeSupport& support, int points_per_axis, double height,
                                    double mu0_scale);

// Structural audit of a decomposition against its source measure: per-edge
// mass identity, loop simplicity, per-level edge-disjointness and
// sign-consistent traversal.
CheckLine verify_decomposition(const EdgeMeasure& nu, const LoopDecomposition& d);

ExperimentReport run_unit_square(std::uint64_t seed);
ExperimentReport run_separated_segments(std::uint64_t seed);
ExperimentReport run_tree_like(std::uint64_t seed, int instances = 20);
ExperimentReport run_coarea_fuzz(std::uint64_t seed, int count = 200);
ExperimentReport run_uniqueness_multistart(std::uint64_t seed, int instances = 5,
                                           int starts = 10);

// Dispatch by scenario name; writes artifact files when out_dir is nonempty.
ExperimentReport run_experiment(const std::string& name, std::uint64_t seed,
                                const std::string& out_dir);

}  // namespace loopfield
