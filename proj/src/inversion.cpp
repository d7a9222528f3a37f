#include "loopfield/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "loopfield/rng.hpp"

namespace loopfield {

namespace {

// ---------------------------------------------------------------- graph view

struct SupportGraph {
  std::vector<Vertex> verts;            // sorted
  std::map<Vertex, int> vid;
  std::vector<std::vector<std::pair<int, int>>> adj;  // vertex -> (neighbor, edge index)
  int components = 0;
  std::vector<int> parent;       // BFS forest, -1 at roots
  std::vector<int> parent_edge;  // edge to parent
  std::vector<int> depth;
  std::vector<char> tree_edge;   // per support edge
};

SupportGraph build_graph(const EdgeSupport& support) {
  SupportGraph g;
  for (const EdgeId& e : support.edges) {
    g.vid.emplace(e.tail(), 0);
    g.vid.emplace(e.head(), 0);
  }
  for (auto& [v, id] : g.vid) {
    id = static_cast<int>(g.verts.size());
    g.verts.push_back(v);
  }
  g.adj.resize(g.verts.size());
  for (size_t k = 0; k < support.edges.size(); ++k) {
    const EdgeId& e = support.edges[k];
    const int a = g.vid.at(e.tail()), b = g.vid.at(e.head());
    g.adj[a].emplace_back(b, static_cast<int>(k));
    g.adj[b].emplace_back(a, static_cast<int>(k));
  }
  const int n = static_cast<int>(g.verts.size());
  g.parent.assign(n, -2);
  g.parent_edge.assign(n, -1);
  g.depth.assign(n, 0);
  g.tree_edge.assign(support.edges.size(), 0);
  for (int r = 0; r < n; ++r) {
    if (g.parent[r] != -2) continue;
    ++g.components;
    g.parent[r] = -1;
    std::vector<int> queue{r};
    for (size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      for (auto [w, eidx] : g.adj[u]) {
        if (g.parent[w] != -2) continue;
        g.parent[w] = u;
        g.parent_edge[w] = eidx;
        g.depth[w] = g.depth[u] + 1;
        g.tree_edge[static_cast<size_t>(eidx)] = 1;
        queue.push_back(w);
      }
    }
  }
  return g;
}

OrientedLoop cycle_from_chord(const SupportGraph& g, const EdgeSupport& support, int chord_idx) {
  const EdgeId& chord = support.edges[static_cast<size_t>(chord_idx)];
  int x = g.vid.at(chord.tail()), y = g.vid.at(chord.head());
  std::vector<int> pa{x}, pb{y};  // tree paths up to the lowest common ancestor
  while (g.depth[x] > g.depth[y]) pa.push_back(x = g.parent[x]);
  while (g.depth[y] > g.depth[x]) pb.push_back(y = g.parent[y]);
  while (x != y) {
    pa.push_back(x = g.parent[x]);
    pb.push_back(y = g.parent[y]);
  }
  // walk tail..lca then back down lca..head; the chord closes head -> tail
  OrientedLoop loop;
  for (int v : pa) loop.vertices.push_back(g.verts[static_cast<size_t>(v)]);
  for (size_t k = pb.size() - 1; k-- > 0;)
    loop.vertices.push_back(g.verts[static_cast<size_t>(pb[k])]);
  if (loop.signed_area2() < 0) loop = loop.reversed();
  loop.orientation = Orientation::CCW;
  loop.canonicalize();
  return loop;
}

// ------------------------------------------------------------------- solver

double objective_value(const Eigen::MatrixXd& M, const Eigen::VectorXd& ft,
                       const Eigen::VectorXd& w, double lambda) {
  return (M * w - ft).squaredNorm() + lambda * w.lpNorm<1>();
}

double largest_sv_squared(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::VectorXd v(M.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = 1.0 + 1e-3 * static_cast<double>((static_cast<std::uint64_t>(i) * 2654435761u) % 97);
  v.normalize();
  double l = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd nv = M.transpose() * (M * v);
    const double nn = nv.norm();
    if (nn == 0.0) return 0.0;
    nv /= nn;
    const double lnew = (M * nv).squaredNorm();
    if (it > 2 && std::abs(lnew - l) <= 1e-13 * lnew) return lnew;
    l = lnew;
    v = nv;
  }
  return l;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, double t) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x[i];
    out[i] = v > t ? v - t : (v < -t ? v + t : 0.0);
  }
  return out;
}

CertReport certificate_for(const Eigen::MatrixXd& M, const Eigen::VectorXd& ft,
                           const Eigen::VectorXd& w, double lambda, double tol) {
  CertReport rep;
  rep.tol = tol;
  const double half = lambda / 2.0;
  const Eigen::VectorXd c = M.transpose() * (ft - M * w);
  for (Eigen::Index e = 0; e < w.size(); ++e) {
    if (w[e] == 0.0)
      rep.max_offsupport = std::max(rep.max_offsupport, std::abs(c[e]) / half);
    else
      rep.max_onsupport_gap =
          std::max(rep.max_onsupport_gap, std::abs(c[e] - half * (w[e] > 0 ? 1.0 : -1.0)) / half);
  }
  rep.passed = rep.max_offsupport <= 1.0 + tol && rep.max_onsupport_gap <= tol;
  return rep;
}

struct FistaResult {
  Eigen::VectorXd w;
  int iterations = 0;
  CertReport cert;
};

// Exact single-coordinate minimization sweeps. Each update solves its
// coordinate subproblem in closed form, so the stationary point satisfies
// the optimality conditions to rounding; used to finish what the
// accelerated gradient leaves at its sublinear tail.
void coordinate_polish(const Eigen::MatrixXd& M, const Eigen::VectorXd& ft, double lambda,
                       Eigen::VectorXd& w, double tol, int max_sweeps, int& iterations,
                       CertReport& cert) {
  const Eigen::Index n = M.cols();
  Eigen::VectorXd colsq(n);
  for (Eigen::Index e = 0; e < n; ++e) colsq[e] = M.col(e).squaredNorm();
  Eigen::VectorXd r = ft - M * w;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (Eigen::Index e = 0; e < n; ++e) {
      if (colsq[e] == 0.0) continue;
      const double target = w[e] + M.col(e).dot(r) / colsq[e];
      const double thr = lambda / (2.0 * colsq[e]);
      const double wnew = target > thr ? target - thr : (target < -thr ? target + thr : 0.0);
      if (wnew != w[e]) {
        r -= M.col(e) * (wnew - w[e]);
        w[e] = wnew;
      }
    }
    ++iterations;
    cert = certificate_for(M, ft, w, lambda, tol);
    if (cert.passed) return;
  }
}

// Gradient steps leave the operator's null directions untouched except for
// the slow soft-threshold shrink, so mass parked on silent cycles would
// crawl. Along an exact kernel direction the objective is piecewise linear
// in t; minimize it exactly over the breakpoints.
struct KernelSweeper {
  std::vector<Eigen::VectorXd> dirs;

  explicit KernelSweeper(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    for (Eigen::Index k = 0; k < M.cols(); ++k) {
      const double sigma = k < sv.size() ? sv[k] : 0.0;
      if (smax == 0.0 || sigma <= 1e-12 * smax) dirs.push_back(svd.matrixV().col(k));
    }
  }

  // One pass of exact line minimization of F along every kernel direction.
  bool sweep(const Eigen::MatrixXd& M, const Eigen::VectorXd& ft, double lambda,
             Eigen::VectorXd& w, double& fw) const {
    bool moved = false;
    for (const Eigen::VectorXd& d : dirs) {
      double best_t = 0.0, best_f = fw;
      for (Eigen::Index e = 0; e < d.size(); ++e) {
        if (d[e] == 0.0) continue;
        const double t = -w[e] / d[e];
        const double f = objective_value(M, ft, w + t * d, lambda);
        if (f < best_f - 1e-15 * (1.0 + std::abs(best_f))) {
          best_f = f;
          best_t = t;
        }
      }
      if (best_t != 0.0) {
        w += best_t * d;
        fw = best_f;
        moved = true;
      }
    }
    return moved;
  }
};

// Monotone accelerated proximal gradient. Gradient steps use A^T(Aw - f)
// scaled by 1/sigma_max^2, with the soft threshold at lambda*step/2 so the
// fixed point matches the optimality conditions. Kernel-direction line
// searches and coordinate sweeps finish the run once acceleration stops
// paying.
FistaResult run_fista(const Eigen::MatrixXd& M, const Eigen::VectorXd& ft, double lambda,
                      const Eigen::VectorXd& w0, int max_iters, double tol) {
  FistaResult res;
  const double L = largest_sv_squared(M) * (1.0 + 1e-6);
  if (L == 0.0) {  // zero operator: the penalty alone drives everything to 0
    res.w = Eigen::VectorXd::Zero(M.cols());
    res.cert = certificate_for(M, ft, res.w, lambda, tol);
    return res;
  }
  const double step = 1.0 / L;
  const double thresh = lambda * step / 2.0;
  const KernelSweeper kernel(M);

  Eigen::VectorXd w = w0, y = w0;
  double fw = objective_value(M, ft, w, lambda);
  kernel.sweep(M, ft, lambda, w, fw);
  y = w;
  double t = 1.0;
  const int accel_budget = std::min(max_iters, 2000);
  for (int it = 1; it <= accel_budget; ++it) {
    Eigen::VectorXd z = soft_threshold(y - step * (M.transpose() * (M * y - ft)), thresh);
    double fz = objective_value(M, ft, z, lambda);
    if (fz > fw) {
      // restart the acceleration at the last accepted point
      t = 1.0;
      z = soft_threshold(w - step * (M.transpose() * (M * w - ft)), thresh);
      fz = objective_value(M, ft, z, lambda);
      if (fz > fw) {
        z = w;
        fz = fw;
      }
    }
    const double tn = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    y = z + ((t - 1.0) / tn) * (z - w);
    w = z;
    fw = fz;
    t = tn;
    res.iterations = it;
    res.cert = certificate_for(M, ft, w, lambda, tol);
    if (res.cert.passed) break;
  }
  while (!res.cert.passed && res.iterations < max_iters) {
    coordinate_polish(M, ft, lambda, w, tol,
                      std::min(50, max_iters - res.iterations), res.iterations, res.cert);
    if (res.cert.passed) break;
    fw = objective_value(M, ft, w, lambda);
    const bool moved = kernel.sweep(M, ft, lambda, w, fw);
    res.cert = certificate_for(M, ft, w, lambda, tol);
    if (!moved && res.cert.passed) break;
    if (!moved) {
      // plain sweeps until the budget runs out
      coordinate_polish(M, ft, lambda, w, tol, max_iters - res.iterations, res.iterations,
                        res.cert);
      break;
    }
  }
  res.w = w;
  return res;
}

Solution make_solution(const Reading& f, const MeasurementSetup& s, const EdgeSupport& support,
                       const Eigen::MatrixXd& M, const Eigen::VectorXd& ft,
                       double lambda, const FistaResult& r) {
  Solution sol;
  sol.support = support;
  sol.weights = r.w;
  sol.objective = objective_value(M, ft, r.w, lambda);
  sol.certificate = r.cert;
  sol.iterations = r.iterations;
  sol.converged = r.cert.passed;
  const Eigen::VectorXd pred = M * r.w;
  sol.residual.values.resize(f.values.size());
  for (size_t q = 0; q < f.values.size(); ++q)
    sol.residual.values[q] =
        f.values[q] - pred[static_cast<Eigen::Index>(q)] / std::sqrt(s.weights[q]);
  return sol;
}

}  // namespace

void SolveOptions::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("SolveOptions: lambda must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("SolveOptions: tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("SolveOptions: max_iters must be positive");
  if (restarts < 1) throw std::invalid_argument("SolveOptions: restarts must be positive");
}

EdgeMeasure Solution::as_measure() const {
  EdgeMeasure m(support.grid);
  for (size_t k = 0; k < support.edges.size(); ++k)
    m.add_weight(support.edges[k], weights[static_cast<Eigen::Index>(k)]);
  return m;
}

CertReport optimality_certificate(const Eigen::VectorXd& w, const Reading& f,
                                  const MeasurementSetup& s, const EdgeSupport& support,
                                  double lambda, double tol) {
  const Eigen::MatrixXd M = operator_matrix(s, support);
  return certificate_for(M, scaled_reading(s, f), w, lambda, tol);
}

Solution solve_ep2_from(const Reading& f, const MeasurementSetup& s, const EdgeSupport& support,
                        const SolveOptions& opts, const Eigen::VectorXd& w0) {
  opts.validate();
  if (w0.size() != static_cast<Eigen::Index>(support.edges.size()))
    throw std::invalid_argument("solve_ep2_from: start vector length mismatch");
  const Eigen::MatrixXd M = operator_matrix(s, support);
  const Eigen::VectorXd ft = scaled_reading(s, f);
  const FistaResult r = run_fista(M, ft, opts.lambda, w0, opts.max_iters, opts.tol);
  return make_solution(f, s, support, M, ft, opts.lambda, r);
}

Solution solve_ep2(const Reading& f, const MeasurementSetup& s, const EdgeSupport& support,
                   const SolveOptions& opts) {
  opts.validate();
  const Eigen::MatrixXd M = operator_matrix(s, support);
  const Eigen::VectorXd ft = scaled_reading(s, f);
  const double scale = opts.lambda > 0.0 && M.size() > 0
                           ? (M.transpose() * ft).lpNorm<Eigen::Infinity>() / opts.lambda
                           : 0.0;
  std::optional<Solution> best;
  for (int k = 0; k < opts.restarts; ++k) {
    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(M.cols());
    if (k > 0) {
      Rng rng(opts.seed + static_cast<std::uint64_t>(k));
      for (Eigen::Index i = 0; i < w0.size(); ++i) w0[i] = scale * rng.normal();
    }
    const FistaResult r = run_fista(M, ft, opts.lambda, w0, opts.max_iters, opts.tol);
    Solution sol = make_solution(f, s, support, M, ft, opts.lambda, r);
    if (!best || sol.objective < best->objective) best = std::move(sol);
  }
  return *best;
}

std::vector<Solution> lambda_path(const Reading& f, const MeasurementSetup& s,
                                  const EdgeSupport& support, const std::vector<double>& schedule,
                                  const Reading* noise, const SolveOptions& base) {
  if (schedule.empty()) throw std::invalid_argument("lambda_path: empty schedule");
  for (size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0)) throw std::invalid_argument("lambda_path: lambdas must be positive");
    if (k > 0 && !(schedule[k] < schedule[k - 1]))
      throw std::invalid_argument("lambda_path: schedule must be strictly decreasing");
  }
  Reading fe = f;
  if (noise) {
    if (noise->values.size() != f.values.size())
      throw std::invalid_argument("lambda_path: noise length mismatch");
    for (size_t q = 0; q < fe.values.size(); ++q) fe.values[q] += noise->values[q];
  }
  std::vector<Solution> path;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(support.edges.size()));
  for (double lambda : schedule) {
    SolveOptions o = base;
    o.lambda = lambda;
    Solution sol = solve_ep2_from(fe, s, support, o, w);
    w = sol.weights;
    path.push_back(std::move(sol));
  }
  return path;
}

std::vector<OrientedLoop> fundamental_cycles(const EdgeSupport& support) {
  const SupportGraph g = build_graph(support);
  std::vector<OrientedLoop> cycles;
  for (size_t k = 0; k < support.edges.size(); ++k)
    if (!g.tree_edge[k]) cycles.push_back(cycle_from_chord(g, support, static_cast<int>(k)));
  return cycles;
}

std::vector<EdgeMeasure> silent_basis(const EdgeSupport& support) {
  std::vector<EdgeMeasure> basis;
  for (const OrientedLoop& loop : fundamental_cycles(support))
    basis.push_back(edge_measure_from_loop(support.grid, loop, 1.0));
  return basis;
}

bool treelike_check(const EdgeSupport& support) {
  if (support.edges.empty()) return true;
  const SupportGraph g = build_graph(support);
  return static_cast<int>(support.edges.size()) ==
         static_cast<int>(g.verts.size()) - g.components;
}

KernelReport kernel_dimension_check(const MeasurementSetup& s, const EdgeSupport& support,
                                    double threshold) {
  KernelReport rep;
  rep.threshold = threshold;
  const Eigen::MatrixXd M = operator_matrix(s, support);
  if (M.size() > 0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
    if (svd.info() != Eigen::Success)
      throw std::runtime_error("kernel_dimension_check: SVD failed on degenerate input");
    const Eigen::VectorXd sv = svd.singularValues();
    rep.singular_values.assign(sv.data(), sv.data() + sv.size());
  }
  const double smax = rep.singular_values.empty() ? 0.0 : rep.singular_values.front();
  int above = 0;
  for (double sigma : rep.singular_values)
    if (smax > 0.0 && sigma >= threshold * smax) ++above;
  rep.nullity = support.size() - above;

  const std::vector<EdgeMeasure> basis = silent_basis(support);
  rep.cycle_count = static_cast<int>(basis.size());
  for (const EdgeMeasure& b : basis) {
    const Reading r = forward_edges(b, s);
    for (double v : r.values) rep.max_basis_reading = std::max(rep.max_basis_reading, std::abs(v));
  }
  rep.sufficient = rep.nullity == rep.cycle_count;
  return rep;
}

std::string to_string(MinimalityVerdict v) {
  switch (v) {
    case MinimalityVerdict::Strict: return "strict";
    case MinimalityVerdict::Minimal: return "minimal";
    case MinimalityVerdict::Undetermined: return "undetermined";
    case MinimalityVerdict::Violated: return "violated";
  }
  return "?";
}

namespace {

std::vector<EdgeId> cycle_edges(const OrientedLoop& loop) {
  std::vector<EdgeId> out;
  const size_t n = loop.vertices.size();
  for (size_t k = 0; k < n; ++k) {
    int sign;
    out.push_back(edge_between(loop.vertices[k], loop.vertices[(k + 1) % n], sign));
  }
  return out;
}

// Tests one simple cycle against the carrier; returns true when the cycle
// spends strictly more length inside Z than outside.
struct CycleJudge {
  const std::set<EdgeId>& carrier;
  bool saw_equality = false;

  bool violates(const std::vector<EdgeId>& edges) {
    int in = 0;
    for (const EdgeId& e : edges)
      if (carrier.count(e)) ++in;
    const int off = static_cast<int>(edges.size()) - in;
    if (in > off) return true;
    if (in == off) saw_equality = true;
    return false;
  }
};

// Splits an even-degree edge set (a cycle-space element) into edge-disjoint
// simple cycles by walking and pinching off loops whenever a vertex repeats.
std::vector<std::vector<EdgeId>> split_into_simple_cycles(std::set<EdgeId> edges) {
  std::map<Vertex, std::vector<EdgeId>> incident;
  for (const EdgeId& e : edges) {
    incident[e.tail()].push_back(e);
    incident[e.head()].push_back(e);
  }
  auto next_unused = [&](const Vertex& v, EdgeId& out) {
    for (const EdgeId& e : incident[v])
      if (edges.count(e)) {
        out = e;
        return true;
      }
    return false;
  };

  std::vector<std::vector<EdgeId>> cycles;
  while (!edges.empty()) {
    std::vector<Vertex> path{edges.begin()->tail()};
    std::map<Vertex, size_t> pos{{path[0], 0}};
    std::vector<EdgeId> path_edges;
    EdgeId e;
    while (next_unused(path.back(), e)) {
      edges.erase(e);
      const Vertex w = e.tail() == path.back() ? e.head() : e.tail();
      path_edges.push_back(e);
      if (auto seen = pos.find(w); seen != pos.end()) {
        cycles.emplace_back(path_edges.begin() + static_cast<long>(seen->second),
                            path_edges.end());
        path_edges.resize(seen->second);
        path.resize(seen->second + 1);
        pos.clear();
        for (size_t k = 0; k < path.size(); ++k) pos[path[k]] = k;
      } else {
        path.push_back(w);
        pos[w] = path.size() - 1;
      }
    }
    if (!path_edges.empty())
      throw std::logic_error("split_into_simple_cycles: walk ended with open edges");
  }
  return cycles;
}

}  // namespace

MinimalityReport certify_tv_minimal(const Magnetization& mu, const EdgeSupport& support,
                                    CertifyMode mode, int samples, std::uint64_t seed) {
  MinimalityReport rep;
  std::set<EdgeId> carrier;
  for (const auto& [e, w] : mu.edge_part.weights)
    if (w != 0.0 && support.index_of(e) >= 0) carrier.insert(e);
  CycleJudge judge{carrier};

  if (mode == CertifyMode::Exhaustive) {
    // Enumerate every simple cycle: DFS paths rooted at the cycle's smallest
    // vertex, fixing direction by second-vertex < last-vertex.
    const SupportGraph g = build_graph(support);
    const int n = static_cast<int>(g.verts.size());
    constexpr std::size_t kGuard = 1000000;
    std::vector<char> in_path(static_cast<size_t>(n), 0);
    std::vector<Vertex> path;

    struct Frame {
      int vertex;
      size_t next_neighbor;
    };
    for (int root = 0; root < n; ++root) {
      std::vector<Frame> stack{{root, 0}};
      path = {g.verts[static_cast<size_t>(root)]};
      std::fill(in_path.begin(), in_path.end(), 0);
      in_path[static_cast<size_t>(root)] = 1;
      while (!stack.empty()) {
        Frame& fr = stack.back();
        if (fr.next_neighbor >= g.adj[static_cast<size_t>(fr.vertex)].size()) {
          in_path[static_cast<size_t>(fr.vertex)] = 0;
          path.pop_back();
          stack.pop_back();
          continue;
        }
        const auto [nb, eidx] = g.adj[static_cast<size_t>(fr.vertex)][fr.next_neighbor++];
        if (nb == root && stack.size() >= 3) {
          // close only in one direction per cycle
          if (g.vid.at(path[1]) < fr.vertex) {
            if (++rep.cycles_checked > kGuard)
              throw std::runtime_error(
                  "certify_tv_minimal: cycle enumeration guard exceeded; use sampled mode");
            std::vector<EdgeId> edges;
            const size_t m = path.size();
            for (size_t k = 0; k < m; ++k) {
              int sgn;
              edges.push_back(edge_between(path[k], path[(k + 1) % m], sgn));
            }
            if (judge.violates(edges)) {
              rep.verdict = MinimalityVerdict::Violated;
              rep.witness = std::move(edges);
              return rep;
            }
          }
          continue;
        }
        if (nb <= root || in_path[static_cast<size_t>(nb)]) continue;
        in_path[static_cast<size_t>(nb)] = 1;
        path.push_back(g.verts[static_cast<size_t>(nb)]);
        stack.push_back({nb, 0});
      }
    }
    rep.verdict = judge.saw_equality ? MinimalityVerdict::Minimal : MinimalityVerdict::Strict;
    return rep;
  }

  // Sampled: fundamental cycles first, then random cycle-space elements.
  const std::vector<OrientedLoop> fund = fundamental_cycles(support);
  for (const OrientedLoop& loop : fund) {
    ++rep.cycles_checked;
    std::vector<EdgeId> edges = cycle_edges(loop);
    if (judge.violates(edges)) {
      rep.verdict = MinimalityVerdict::Violated;
      rep.witness = std::move(edges);
      return rep;
    }
  }
  Rng rng(seed);
  std::vector<std::set<EdgeId>> fund_edges;
  for (const OrientedLoop& loop : fund) {
    auto ce = cycle_edges(loop);
    fund_edges.emplace_back(ce.begin(), ce.end());
  }
  for (int s_i = 0; s_i < samples && !fund.empty(); ++s_i) {
    std::set<EdgeId> combo;
    bool any = false;
    for (const auto& fe : fund_edges)
      if (rng.uniform01() < 0.5) {
        any = true;
        for (const EdgeId& e : fe) {
          auto [it, inserted] = combo.insert(e);
          if (!inserted) combo.erase(it);
        }
      }
    if (!any || combo.empty()) continue;
    for (auto& cyc : split_into_simple_cycles(combo)) {
      ++rep.cycles_checked;
      if (judge.violates(cyc)) {
        rep.verdict = MinimalityVerdict::Violated;
        rep.witness = std::move(cyc);
        return rep;
      }
    }
  }
  rep.verdict = MinimalityVerdict::Undetermined;
  return rep;
}

namespace {

double l1_at(const Eigen::VectorXd& m0, const Eigen::MatrixXd& B, const Eigen::VectorXd& c) {
  return (m0 + B * c).lpNorm<1>();
}

}  // namespace

Ep1Report ep1_oracle(const EdgeMeasure& mu0, const EdgeSupport& support, int resolution) {
  for (const auto& [e, w] : mu0.weights)
    if (support.index_of(e) < 0)
      throw std::invalid_argument("ep1_oracle: mu0 has weight outside the support");
  const std::vector<EdgeMeasure> basis = silent_basis(support);
  const int d = static_cast<int>(basis.size());
  if (d > 3) throw std::invalid_argument("ep1_oracle: cycle dimension > 3 (oracle only)");
  if (resolution < 3) throw std::invalid_argument("ep1_oracle: resolution too small");

  const int ne = support.size();
  Eigen::VectorXd m0 = Eigen::VectorXd::Zero(ne);
  for (const auto& [e, w] : mu0.weights) m0[support.index_of(e)] = w;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(ne, d);
  for (int i = 0; i < d; ++i)
    for (const auto& [e, w] : basis[static_cast<size_t>(i)].weights)
      B(support.index_of(e), i) = w;

  Ep1Report rep;
  rep.tv_mu0 = m0.lpNorm<1>();
  if (d == 0) {
    rep.min_tv = rep.tv_mu0;
    rep.unique_point = true;
    rep.argmin_kind = "point";
    return rep;
  }

  const double T = std::max(rep.tv_mu0, 1e-9);
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, -T), hi = Eigen::VectorXd::Constant(d, T);
  Eigen::VectorXd best = Eigen::VectorXd::Zero(d);
  double best_tv = l1_at(m0, B, best);

  // grid scan with two zoom rounds
  for (int round = 0; round < 3; ++round) {
    Eigen::VectorXd c(d);
    std::vector<int> idx(static_cast<size_t>(d), 0);
    while (true) {
      for (int i = 0; i < d; ++i)
        c[i] = lo[i] + (hi[i] - lo[i]) * idx[static_cast<size_t>(i)] / (resolution - 1);
      const double tv = l1_at(m0, B, c);
      if (tv < best_tv) {
        best_tv = tv;
        best = c;
      }
      int i = 0;
      while (i < d && ++idx[static_cast<size_t>(i)] == resolution) idx[static_cast<size_t>(i++)] = 0;
      if (i == d) break;
    }
    const double span = (hi[0] - lo[0]) * 2.5 / (resolution - 1);
    for (int i = 0; i < d; ++i) {
      lo[i] = best[i] - span;
      hi[i] = best[i] + span;
    }
  }

  // exact coordinate refinement: each 1-D section is piecewise linear, so the
  // minimum sits at a breakpoint
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (int i = 0; i < d; ++i) {
      const Eigen::VectorXd r = m0 + B * best - best[i] * B.col(i);
      double cand = best[i];
      double cand_tv = (r + cand * B.col(i)).lpNorm<1>();
      for (int e = 0; e < ne; ++e) {
        if (B(e, i) == 0.0) continue;
        const double t = -r[e] / B(e, i);
        const double tv = (r + t * B.col(i)).lpNorm<1>();
        if (tv < cand_tv - 1e-15 * std::max(1.0, cand_tv)) {
          cand_tv = tv;
          cand = t;
        }
      }
      best[i] = cand;
      best_tv = cand_tv;
    }
  }

  rep.min_tv = best_tv;
  rep.best_coeffs.assign(best.data(), best.data() + d);

  // flatness probe: the argmin is an interval/face when some direction keeps
  // the minimum value
  const double delta = std::max(T, 1.0) * 1e-4;
  const double flat_tol = 1e-9 * std::max(1.0, best_tv) + delta * 1e-9;
  bool flat = false;
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
    e[i] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  Rng rng(12345);
  for (int k = 0; k < 8 && d > 1; ++k) {
    Eigen::VectorXd e(d);
    for (int i = 0; i < d; ++i) e[i] = rng.normal();
    if (e.norm() > 0) dirs.push_back(e / e.norm());
  }
  for (const auto& dir : dirs)
    if (l1_at(m0, B, best + delta * dir) <= best_tv + flat_tol) flat = true;
  rep.unique_point = !flat;
  rep.argmin_kind = flat ? "interval/face" : "point";
  return rep;
}

VariationalReport variational_certify(const Magnetization& mu, const EdgeSupport& support,
                                      int samples, std::uint64_t seed) {
  VariationalReport rep;
  const std::vector<EdgeMeasure> basis = silent_basis(support);
  if (basis.empty()) return rep;  // tree-like: nothing silent to pair against

  bool first = true;
  auto consider = [&](const EdgeMeasure& nu) {
    const double tv = tv_norm(nu);
    if (tv == 0.0) return;
    EdgeMeasure unit = nu;
    unit.scale(1.0 / tv);
    const double p = variational_pairing(mu, unit);
    ++rep.n_tested;
    if (first || p < rep.min_pairing) {
      rep.min_pairing = p;
      rep.witness = unit;
      first = false;
    }
  };

  for (const EdgeMeasure& b : basis) {
    consider(b);
    EdgeMeasure neg = b;
    neg.scale(-1.0);
    consider(neg);
  }
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    EdgeMeasure combo(support.grid);
    for (const EdgeMeasure& b : basis) combo.add(b, rng.normal());
    consider(combo);
  }
  rep.has_witness = rep.min_pairing < 0.0;
  if (!rep.has_witness) rep.witness = EdgeMeasure(support.grid);
  return rep;
}

}  // namespace loopfield
