#include "loopfield/measures.hpp"

#include <algorithm>
#include <cmath>

namespace loopfield {

void EdgeMeasure::add_weight(const EdgeId& e, double w) {
  if (w == 0.0) return;
  if (!edge_in_grid(grid, e)) throw std::out_of_range("EdgeMeasure: edge outside grid");
  auto [it, inserted] = weights.emplace(e, w);
  if (!inserted) {
    it->second += w;
    if (it->second == 0.0) weights.erase(it);
  }
}

void EdgeMeasure::scale(double c) {
  if (c == 0.0) {
    weights.clear();
    return;
  }
  for (auto& [e, w] : weights) w *= c;
}

void EdgeMeasure::add(const EdgeMeasure& other, double c) {
  if (!(other.grid == grid)) throw std::invalid_argument("EdgeMeasure::add: grid mismatch");
  for (const auto& [e, w] : other.weights) add_weight(e, c * w);
}

DipoleField::DipoleField(std::vector<Dipole> atoms_) : atoms(std::move(atoms_)) {
  for (size_t a = 0; a < atoms.size(); ++a)
    for (size_t b = a + 1; b < atoms.size(); ++b)
      if (atoms[a].position == atoms[b].position)
        throw std::invalid_argument("DipoleField: duplicate atom position");
}

divergence_error::divergence_error(const Vertex& v, double val)
    : std::runtime_error("measure is not divergence-free at vertex (" + std::to_string(v.i) +
                         "," + std::to_string(v.j) + "), imbalance " + std::to_string(val)),
      vertex(v),
      value(val) {}

EdgeMeasure edge_measure_from_walk(const Grid& g, const std::vector<Vertex>& walk, double weight) {
  EdgeMeasure m(g);
  if (walk.empty() || weight == 0.0) return m;  // degenerate walks carry zero measure
  const size_t n = walk.size();
  for (size_t k = 0; k < n; ++k) {
    int sign = 0;
    const EdgeId e = edge_between(walk[k], walk[(k + 1) % n], sign);
    m.add_weight(e, sign * weight * g.h);
  }
  return m;
}

EdgeMeasure edge_measure_from_loop(const Grid& g, const OrientedLoop& loop, double weight) {
  return edge_measure_from_walk(g, loop.vertices, weight);
}

double tv_norm(const EdgeMeasure& m) {
  double tv = 0.0;
  for (const auto& [e, w] : m.weights) tv += std::abs(w);
  return tv;
}

double tv_norm(const DipoleField& d) {
  double tv = 0.0;
  for (const Dipole& a : d.atoms)
    tv += std::sqrt(a.moment[0] * a.moment[0] + a.moment[1] * a.moment[1] +
                    a.moment[2] * a.moment[2]);
  return tv;
}

double tv_norm(const Magnetization& m) { return tv_norm(m.edge_part) + tv_norm(m.dipole_part); }

VertexFunction divergence(const EdgeMeasure& m) {
  VertexFunction div;
  div.grid = m.grid;
  for (const auto& [e, w] : m.weights) {
    div.values[e.tail()] += w;
    div.values[e.head()] -= w;
  }
  std::erase_if(div.values, [](const auto& kv) { return kv.second == 0.0; });
  return div;
}

bool is_divergence_free(const EdgeMeasure& m, Vertex* offender, double* imbalance, double tol) {
  double wmax = 0.0;
  for (const auto& [e, w] : m.weights) wmax = std::max(wmax, std::abs(w));
  const double bound = tol * std::max(1.0, wmax);
  const VertexFunction div = divergence(m);
  double worst = 0.0;
  Vertex worst_v{};
  for (const auto& [v, val] : div.values) {
    if (std::abs(val) > worst) {
      worst = std::abs(val);
      worst_v = v;
    }
  }
  if (offender) *offender = worst_v;
  if (imbalance) *imbalance = worst;
  return worst <= bound;
}

void require_divergence_free(const EdgeMeasure& m, double tol) {
  Vertex v;
  double val;
  if (!is_divergence_free(m, &v, &val, tol)) throw divergence_error(v, val);
}

std::map<EdgeId, int> unit_direction(const EdgeMeasure& m) {
  std::map<EdgeId, int> u;
  for (const auto& [e, w] : m.weights) u[e] = w > 0.0 ? 1 : -1;
  return u;
}

std::map<EdgeId, int> w_field(const Magnetization& mu, const EdgeMeasure& nu) {
  std::map<EdgeId, int> w;
  for (const auto& [e, wn] : nu.weights) {
    const double f = mu.edge_part.weight(e);
    w[e] = f != 0.0 ? (f > 0.0 ? 1 : -1) : (wn > 0.0 ? 1 : -1);
  }
  return w;
}

double variational_pairing(const Magnetization& mu, const EdgeMeasure& nu, double div_tol) {
  require_divergence_free(nu, div_tol);
  double pairing = 0.0;
  for (const auto& [e, wn] : nu.weights) {
    const double f = mu.edge_part.weight(e);
    if (f != 0.0)
      pairing += (f > 0.0 ? 1.0 : -1.0) * wn;
    else
      pairing += std::abs(wn);
  }
  return pairing;
}

}  // namespace loopfield
