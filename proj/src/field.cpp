#include "loopfield/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <thread>

namespace loopfield {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// Edge endpoints embedded in the source plane z = 0.
std::pair<Vec3, Vec3> edge_endpoints_3d(const Grid& g, const EdgeId& e) {
  const auto a = g.vertex_xy(e.tail().i, e.tail().j);
  const auto b = g.vertex_xy(e.head().i, e.head().j);
  return {{a[0], a[1], 0.0}, {b[0], b[1], 0.0}};
}

int env_thread_cap() {
  if (const char* s = std::getenv("LOOPFIELD_THREADS")) {
    const int n = std::atoi(s);
    if (n >= 1) return n;
  }
  return 4;
}

}  // namespace

MeasurementSetup::MeasurementSetup(std::vector<Vec3> points_, const Vec3& direction_,
                                   std::vector<double> weights_, double mu0_)
    : points(std::move(points_)), direction(direction_), weights(std::move(weights_)), mu0(mu0_) {
  if (points.empty()) throw std::invalid_argument("MeasurementSetup: no measurement points");
  if (weights.size() != points.size())
    throw std::invalid_argument("MeasurementSetup: weights/points length mismatch");
  const double n = direction.norm();
  if (!(n > 0.0)) throw std::invalid_argument("MeasurementSetup: zero direction vector");
  direction = direction * (1.0 / n);
  for (const Vec3& q : points)
    if (q.z == 0.0)
      throw std::invalid_argument("MeasurementSetup: measurement point lies in the source plane");
  for (double w : weights)
    if (!(w > 0.0)) throw std::invalid_argument("MeasurementSetup: weights must be positive");
}

MeasurementSetup MeasurementSetup::plane_grid(int nx, int ny, double x0, double x1, double y0,
                                              double y1, double z, const Vec3& v, double mu0,
                                              double total_weight) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("plane_grid: need at least one point per axis");
  std::vector<Vec3> pts;
  pts.reserve(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double fx = nx > 1 ? static_cast<double>(i) / (nx - 1) : 0.5;
      const double fy = ny > 1 ? static_cast<double>(j) / (ny - 1) : 0.5;
      pts.push_back({x0 + fx * (x1 - x0), y0 + fy * (y1 - y0), z});
    }
  double total = total_weight;
  if (total <= 0.0) {
    total = (x1 - x0) * (y1 - y0);  // nominal area of Q
    if (total <= 0.0) total = 1.0;
  }
  std::vector<double> w(pts.size(), total / static_cast<double>(pts.size()));
  return MeasurementSetup(std::move(pts), v, std::move(w), mu0);
}

EdgeSupport::EdgeSupport(const Grid& g, std::vector<EdgeId> edges_) : grid(g), edges(std::move(edges_)) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (const EdgeId& e : edges)
    if (!edge_in_grid(g, e)) throw std::out_of_range("EdgeSupport: edge outside grid");
}

int EdgeSupport::index_of(const EdgeId& e) const {
  auto it = std::lower_bound(edges.begin(), edges.end(), e);
  if (it == edges.end() || !(*it == e)) return -1;
  return static_cast<int>(it - edges.begin());
}

Vec3 kernel_Kv(const Vec3& x, const Vec3& v) {
  const double r2 = x.dot(x);
  if (r2 == 0.0) throw std::domain_error("kernel_Kv: evaluation at the singularity x = 0");
  const double r = std::sqrt(r2);
  const double r3 = r * r2;
  const double r5 = r3 * r2;
  return v * (1.0 / r3) - x * (3.0 * v.dot(x) / r5);
}

double kernel_potential(const Vec3& z, const Vec3& v) {
  const double r2 = z.dot(z);
  if (r2 == 0.0) throw std::domain_error("kernel_potential: evaluation at the singularity");
  return v.dot(z) / (r2 * std::sqrt(r2));
}

Reading forward_dipoles(const DipoleField& d, const MeasurementSetup& s) {
  Reading out;
  out.values.assign(s.points.size(), 0.0);
  const double c = -s.mu0 / kFourPi;
  for (size_t q = 0; q < s.points.size(); ++q) {
    double acc = 0.0;
    for (const Dipole& a : d.atoms) {
      const Vec3 rel = s.points[q] - Vec3{a.position[0], a.position[1], 0.0};
      if (rel.dot(rel) == 0.0)
        throw std::domain_error("forward_dipoles: atom coincides with a measurement point");
      const Vec3 k = kernel_Kv(rel, s.direction);
      acc += k.x * a.moment[0] + k.y * a.moment[1] + k.z * a.moment[2];
    }
    out.values[q] = c * acc;
  }
  return out;
}

double unit_edge_reading(const Grid& g, const EdgeId& e, const Vec3& point, const Vec3& v,
                         double mu0) {
  const auto [p, q] = edge_endpoints_3d(g, e);
  const double fp = kernel_potential(point - p, v);
  const double fq = kernel_potential(point - q, v);
  return -(mu0 / kFourPi) * (fp - fq) / g.h;
}

Reading forward_edges(const EdgeMeasure& m, const MeasurementSetup& s) {
  Reading out;
  out.values.assign(s.points.size(), 0.0);
  for (const auto& [e, w] : m.weights) {
    const auto [p, q] = edge_endpoints_3d(m.grid, e);
    const double c = -(s.mu0 / kFourPi) * w / m.grid.h;
    for (size_t k = 0; k < s.points.size(); ++k) {
      const double fp = kernel_potential(s.points[k] - p, s.direction);
      const double fq = kernel_potential(s.points[k] - q, s.direction);
      out.values[k] += c * (fp - fq);
    }
  }
  return out;
}

Reading forward(const Magnetization& m, const MeasurementSetup& s) {
  Reading a = forward_edges(m.edge_part, s);
  const Reading b = forward_dipoles(m.dipole_part, s);
  for (size_t k = 0; k < a.values.size(); ++k) a.values[k] += b.values[k];
  return a;
}

std::map<EdgeId, double> adjoint_edges(const Reading& psi, const MeasurementSetup& s,
                                       const EdgeSupport& targets) {
  if (psi.values.size() != s.points.size())
    throw std::invalid_argument("adjoint_edges: reading length mismatch");
  std::map<EdgeId, double> out;
  for (const EdgeId& e : targets.edges) {
    double acc = 0.0;
    for (size_t q = 0; q < s.points.size(); ++q)
      acc += s.weights[q] * psi.values[q] *
             unit_edge_reading(targets.grid, e, s.points[q], s.direction, s.mu0);
    out[e] = acc;
  }
  return out;
}

std::vector<std::array<double, 3>> adjoint_dipoles(
    const Reading& psi, const MeasurementSetup& s,
    const std::vector<std::array<double, 2>>& positions) {
  if (psi.values.size() != s.points.size())
    throw std::invalid_argument("adjoint_dipoles: reading length mismatch");
  std::vector<std::array<double, 3>> out(positions.size(), {0.0, 0.0, 0.0});
  const double c = -s.mu0 / kFourPi;
  for (size_t a = 0; a < positions.size(); ++a) {
    for (size_t q = 0; q < s.points.size(); ++q) {
      const Vec3 rel = s.points[q] - Vec3{positions[a][0], positions[a][1], 0.0};
      const Vec3 k = kernel_Kv(rel, s.direction) * (c * s.weights[q] * psi.values[q]);
      out[a][0] += k.x;
      out[a][1] += k.y;
      out[a][2] += k.z;
    }
  }
  return out;
}

Eigen::MatrixXd operator_matrix(const MeasurementSetup& s, const EdgeSupport& support) {
  const auto rows = static_cast<Eigen::Index>(s.points.size());
  const auto cols = static_cast<Eigen::Index>(support.edges.size());
  if (rows > 10000 || cols > 10000)
    throw std::invalid_argument("operator_matrix: size guard exceeded (desk scale is <= 1e4)");
  Eigen::MatrixXd M(rows, cols);
  std::vector<double> sqw(s.points.size());
  for (size_t q = 0; q < s.points.size(); ++q) sqw[q] = std::sqrt(s.weights[q]);

  auto fill_column = [&](Eigen::Index c) {
    const EdgeId e = support.edges[static_cast<size_t>(c)];
    for (Eigen::Index r = 0; r < rows; ++r)
      M(r, c) = sqw[static_cast<size_t>(r)] *
                unit_edge_reading(support.grid, e, s.points[static_cast<size_t>(r)], s.direction,
                                  s.mu0);
  };

  const int want = std::min<int>({env_thread_cap(),
                                  static_cast<int>(std::max(1u, std::thread::hardware_concurrency())),
                                  static_cast<int>(cols)});
  if (want <= 1 || cols < 32) {
    for (Eigen::Index c = 0; c < cols; ++c) fill_column(c);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < want; ++t)
      pool.emplace_back([&, t] {
        for (Eigen::Index c = t; c < cols; c += want) fill_column(c);
      });
    for (auto& th : pool) th.join();
  }
  return M;
}

Eigen::VectorXd scaled_reading(const MeasurementSetup& s, const Reading& f) {
  if (f.values.size() != s.points.size())
    throw std::invalid_argument("scaled_reading: reading length mismatch");
  Eigen::VectorXd v(static_cast<Eigen::Index>(f.values.size()));
  for (size_t q = 0; q < f.values.size(); ++q)
    v[static_cast<Eigen::Index>(q)] = std::sqrt(s.weights[q]) * f.values[q];
  return v;
}

double scalar_potential(const DipoleField& d, const Vec3& x) {
  double acc = 0.0;
  for (const Dipole& a : d.atoms) {
    const Vec3 rel = x - Vec3{a.position[0], a.position[1], 0.0};
    const double r2 = rel.dot(rel);
    if (r2 == 0.0) throw std::domain_error("scalar_potential: evaluation at an atom");
    const double r3 = r2 * std::sqrt(r2);
    acc += (rel.x * a.moment[0] + rel.y * a.moment[1] + rel.z * a.moment[2]) / r3;
  }
  return acc / kFourPi;
}

void write_operator_matrix(const Eigen::MatrixXd& m, const EdgeSupport& support,
                           const std::string& base_path) {
  std::ofstream bin(base_path + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("write_operator_matrix: cannot open " + base_path + ".bin");
  // Eigen default storage is column-major, matching the declared format.
  bin.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
  std::ofstream side(base_path + ".json");
  if (!side) throw std::runtime_error("write_operator_matrix: cannot open " + base_path + ".json");
  side << "{\"rows\": " << m.rows() << ", \"cols\": " << m.cols() << ", \"edge_index\": [";
  for (size_t k = 0; k < support.edges.size(); ++k) {
    if (k) side << ", ";
    side << '"' << support.edges[k].token() << '"';
  }
  side << "]}\n";
}

}  // namespace loopfield
