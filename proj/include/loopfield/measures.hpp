#pragma once

// Discrete planar vector measures: edge-supported tangential measures,
// point-dipole fields, their total variation, divergence, polar
// decomposition and the variational pairing against silent directions.

#include <map>
#include <vector>

#include "loopfield/geometry.hpp"

namespace loopfield {

// Tangential measure supported on grid edges. Each weight is the full signed
// mass of the edge (density times h), signed along the canonical direction:
// +x for H edges, +y for V edges. Zero weights are never stored.
struct EdgeMeasure {
  Grid grid;
  std::map<EdgeId, double> weights;

  EdgeMeasure() = default;
  explicit EdgeMeasure(const Grid& g) : grid(g) {}

  double weight(const EdgeId& e) const {
    auto it = weights.find(e);
    return it == weights.end() ? 0.0 : it->second;
  }
  void add_weight(const EdgeId& e, double w);  // accumulates, erasing exact zeros
  void scale(double c);
  void add(const EdgeMeasure& other, double c = 1.0);

  bool operator==(const EdgeMeasure&) const = default;
};

struct Dipole {
  std::array<double, 2> position{0.0, 0.0};
  std::array<double, 3> moment{0.0, 0.0, 0.0};
  bool operator==(const Dipole&) const = default;
};

// Finitely many point dipoles with distinct positions; the purely
// 1-unrectifiable part of a magnetization.
struct DipoleField {
  std::vector<Dipole> atoms;

  DipoleField() = default;
  explicit DipoleField(std::vector<Dipole> atoms_);
  bool operator==(const DipoleField&) const = default;
};

// Edge part plus dipole part; the two are mutually singular, so TV adds.
struct Magnetization {
  EdgeMeasure edge_part;
  DipoleField dipole_part;
  bool operator==(const Magnetization&) const = default;
};

struct VertexFunction {
  Grid grid;
  std::map<Vertex, double> values;

  double value(const Vertex& v) const {
    auto it = values.find(v);
    return it == values.end() ? 0.0 : it->second;
  }
};

// Thrown where an operation requires a divergence-free measure.
struct divergence_error : std::runtime_error {
  Vertex vertex;
  double value;
  divergence_error(const Vertex& v, double val);
};

// weight * R_gamma for a closed lattice walk: each traversed edge picks up
// +-weight*h by traversal direction; opposite traversals cancel exactly.
EdgeMeasure edge_measure_from_walk(const Grid& g, const std::vector<Vertex>& walk, double weight);
EdgeMeasure edge_measure_from_loop(const Grid& g, const OrientedLoop& loop, double weight);

double tv_norm(const EdgeMeasure& m);
double tv_norm(const DipoleField& d);
double tv_norm(const Magnetization& m);

// Sum of signed weights of incident edges per vertex, outflow positive.
// Identically zero exactly when the measure is silent-eligible.
VertexFunction divergence(const EdgeMeasure& m);

// True when max vertex imbalance is below tol (absolute, scaled by max |w|);
// otherwise reports the worst vertex.
bool is_divergence_free(const EdgeMeasure& m, Vertex* offender = nullptr,
                        double* imbalance = nullptr, double tol = 1e-12);
void require_divergence_free(const EdgeMeasure& m, double tol = 1e-12);

// Discrete polar decomposition direction: sign(w_e) on the support.
std::map<EdgeId, int> unit_direction(const EdgeMeasure& m);

// The field w^nu_mu on supp(nu): sign of mu's edge weight where nonzero,
// else the direction of nu. Dipole atoms never contribute.
std::map<EdgeId, int> w_field(const Magnetization& mu, const EdgeMeasure& nu);

// Integral of w^nu_mu against nu; nonnegative for every silent nu exactly
// when mu has minimal total variation in its equivalence class.
double variational_pairing(const Magnetization& mu, const EdgeMeasure& nu, double div_tol = 1e-12);

}  // namespace loopfield
