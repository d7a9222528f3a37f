#pragma once

// Forward magnetic-field operator for single-direction measurements above a
// planar source, its adjoint, and dense operator assembly. Edge readings use
// the exact per-segment antiderivative, so closed loops are exactly silent.

#include <Eigen/Dense>

#include "loopfield/measures.hpp"

namespace loopfield {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double c) const { return {c * x, c * y, c * z}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  bool operator==(const Vec3&) const = default;
};

// Measurement points q (with q.z != 0), a common unit direction v, and
// positive quadrature weights discretizing the measure rho on Q.
struct MeasurementSetup {
  std::vector<Vec3> points;
  Vec3 direction{0.0, 0.0, 1.0};
  std::vector<double> weights;
  double mu0 = 1.0;

  MeasurementSetup() = default;
  MeasurementSetup(std::vector<Vec3> points_, const Vec3& direction_, std::vector<double> weights_,
                   double mu0_ = 1.0);

  int size() const { return static_cast<int>(points.size()); }

  // nx-by-ny point lattice on [x0,x1]x[y0,y1] at height z, uniform weights
  // summing to the rectangle area (or to total_weight when given).
  static MeasurementSetup plane_grid(int nx, int ny, double x0, double x1, double y0, double y1,
                                     double z, const Vec3& v = {0.0, 0.0, 1.0}, double mu0 = 1.0,
                                     double total_weight = -1.0);
};

// One scalar per measurement point: the field component along v.
struct Reading {
  std::vector<double> values;
  bool operator==(const Reading&) const = default;
};

// Ordered set of grid edges; the unknowns of the inverse problem and the
// columns of the assembled operator.
struct EdgeSupport {
  Grid grid;
  std::vector<EdgeId> edges;  // sorted, unique

  EdgeSupport() = default;
  EdgeSupport(const Grid& g, std::vector<EdgeId> edges_);

  int size() const { return static_cast<int>(edges.size()); }
  int index_of(const EdgeId& e) const;  // -1 when absent
};

// K_v(x) = v/|x|^3 - 3x (v.x)/|x|^5, the gradient of v.x/|x|^3.
Vec3 kernel_Kv(const Vec3& x, const Vec3& v);

// Antiderivative along segments: F(z) = v.z/|z|^3.
double kernel_potential(const Vec3& z, const Vec3& v);

Reading forward_dipoles(const DipoleField& d, const MeasurementSetup& s);
Reading forward_edges(const EdgeMeasure& m, const MeasurementSetup& s);
Reading forward(const Magnetization& m, const MeasurementSetup& s);

// Reading at `point` of the unit measure on edge e (mass 1, canonical sign).
double unit_edge_reading(const Grid& g, const EdgeId& e, const Vec3& point, const Vec3& v,
                         double mu0);

// Transpose of the forward map with rho-weights: edge targets get
// sum_q w_q psi_q d(reading_q)/d(w_e); dipole targets the moment gradient.
std::map<EdgeId, double> adjoint_edges(const Reading& psi, const MeasurementSetup& s,
                                       const EdgeSupport& targets);
std::vector<std::array<double, 3>> adjoint_dipoles(const Reading& psi, const MeasurementSetup& s,
                                                   const std::vector<std::array<double, 2>>& positions);

// Dense |Q| x |edges| matrix; rows are scaled by sqrt(rho-weights) so plain
// Euclidean least squares equals the rho-weighted norm. Columns may be
// assembled in parallel (LOOPFIELD_THREADS caps the width) deterministically.
Eigen::MatrixXd operator_matrix(const MeasurementSetup& s, const EdgeSupport& support);

Eigen::VectorXd scaled_reading(const MeasurementSetup& s, const Reading& f);

// Scalar magnetic potential of a dipole field at x (off the atoms).
double scalar_potential(const DipoleField& d, const Vec3& x);

// Column-major doubles to <base>.bin plus a JSON sidecar <base>.json with
// {rows, cols, edge_index}.
void write_operator_matrix(const Eigen::MatrixXd& m, const EdgeSupport& support,
                           const std::string& base_path);

}  // namespace loopfield
