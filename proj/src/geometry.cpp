#include "loopfield/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace loopfield {

Grid::Grid(int nx_, int ny_, double h_, std::array<double, 2> origin_)
    : nx(nx_), ny(ny_), h(h_), origin(origin_) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("Grid: cell counts must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("Grid: cell side h must be > 0");
}

int Grid::cell_id(int i, int j) const {
  if (!cell_in_range(i, j)) throw std::out_of_range("Grid::cell_id: cell outside grid");
  return j * nx + i;
}

std::pair<int, int> Grid::cell_ij(int id) const {
  if (id < 0 || id >= cell_count()) throw std::out_of_range("Grid::cell_ij: bad cell id");
  return {id % nx, id / nx};
}

std::string EdgeId::token() const {
  return std::string(kind == EdgeKind::H ? "h:" : "v:") + std::to_string(i) + ":" + std::to_string(j);
}

std::pair<std::pair<int, int>, std::pair<int, int>> edge_sides(const EdgeId& e) {
  if (e.kind == EdgeKind::H) return {{e.i, e.j - 1}, {e.i, e.j}};  // below, above
  return {{e.i - 1, e.j}, {e.i, e.j}};                            // left, right
}

bool edge_in_grid(const Grid& g, const EdgeId& e) {
  if (e.kind == EdgeKind::H) return e.i >= 0 && e.i < g.nx && e.j >= 0 && e.j <= g.ny;
  return e.i >= 0 && e.i <= g.nx && e.j >= 0 && e.j < g.ny;
}

int edge_index(const Grid& g, const EdgeId& e) {
  if (!edge_in_grid(g, e)) throw std::out_of_range("edge_index: edge outside grid");
  if (e.kind == EdgeKind::H) return e.j * g.nx + e.i;
  return g.hedge_count() + e.j * (g.nx + 1) + e.i;
}

EdgeId edge_from_index(const Grid& g, int index) {
  if (index < 0 || index >= g.edge_count()) throw std::out_of_range("edge_from_index: bad index");
  if (index < g.hedge_count()) return {EdgeKind::H, index % g.nx, index / g.nx};
  const int v = index - g.hedge_count();
  return {EdgeKind::V, v % (g.nx + 1), v / (g.nx + 1)};
}

EdgeId edge_between(const Vertex& a, const Vertex& b, int& sign) {
  const int di = b.i - a.i, dj = b.j - a.j;
  if (std::abs(di) + std::abs(dj) != 1)
    throw std::invalid_argument("edge_between: vertices are not lattice-adjacent");
  if (dj == 0) {
    sign = di > 0 ? 1 : -1;
    return {EdgeKind::H, std::min(a.i, b.i), a.j};
  }
  sign = dj > 0 ? 1 : -1;
  return {EdgeKind::V, a.i, std::min(a.j, b.j)};
}

PixelSet::PixelSet(const Grid& g, std::vector<int> cells_) : grid(g), cells(std::move(cells_)) {
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  if (!cells.empty() && (cells.front() < 0 || cells.back() >= g.cell_count()))
    throw std::out_of_range("PixelSet: cell id outside grid");
}

bool PixelSet::contains(int cell) const {
  return std::binary_search(cells.begin(), cells.end(), cell);
}

long long OrientedLoop::signed_area2() const {
  long long a2 = 0;
  const size_t n = vertices.size();
  for (size_t k = 0; k < n; ++k) {
    const Vertex& p = vertices[k];
    const Vertex& q = vertices[(k + 1) % n];
    a2 += static_cast<long long>(p.i) * q.j - static_cast<long long>(q.i) * p.j;
  }
  return a2;
}

OrientedLoop OrientedLoop::reversed() const {
  OrientedLoop r;
  r.vertices.assign(vertices.rbegin(), vertices.rend());
  r.orientation = orientation == Orientation::CCW ? Orientation::CW : Orientation::CCW;
  return r;
}

bool OrientedLoop::is_simple() const {
  std::vector<Vertex> sorted = vertices;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

void OrientedLoop::canonicalize() {
  if (vertices.empty()) return;
  auto it = std::min_element(vertices.begin(), vertices.end());
  std::rotate(vertices.begin(), it, vertices.end());
}

double Segment::length() const {
  return std::hypot(b[0] - a[0], b[1] - a[1]);
}

SegmentFamily::SegmentFamily(std::vector<Segment> segments_) : segments(std::move(segments_)) {
  for (const Segment& s : segments)
    if (!(s.length() > 0.0))
      throw std::invalid_argument("SegmentFamily: degenerate (zero-length) segment");
}

namespace {

// Dense occupancy bitmap over an inclusive cell-index box, padded so flood
// fills can start from a guaranteed-outside ring.
struct Bitmap {
  int i0, j0, w, h;
  std::vector<char> bits;

  Bitmap(int i0_, int j0_, int i1, int j1)
      : i0(i0_), j0(j0_), w(i1 - i0_ + 1), h(j1 - j0_ + 1), bits(static_cast<size_t>(w) * h, 0) {}

  bool in(int i, int j) const { return i >= i0 && i < i0 + w && j >= j0 && j < j0 + h; }
  char& at(int i, int j) { return bits[static_cast<size_t>(j - j0) * w + (i - i0)]; }
  char get(int i, int j) const {
    return in(i, j) ? bits[static_cast<size_t>(j - j0) * w + (i - i0)] : 0;
  }
};

constexpr int kDI[4] = {1, -1, 0, 0};
constexpr int kDJ[4] = {0, 0, 1, -1};

// Marks everything 4-reachable from the bitmap border through cells where
// occ == 0; cells left unreached are enclosed.
std::vector<char> flood_outside(const Bitmap& occ) {
  std::vector<char> reached(occ.bits.size(), 0);
  std::vector<std::pair<int, int>> stack;
  auto push = [&](int i, int j) {
    if (!occ.in(i, j)) return;
    const size_t idx = static_cast<size_t>(j - occ.j0) * occ.w + (i - occ.i0);
    if (reached[idx] || occ.bits[idx]) return;
    reached[idx] = 1;
    stack.emplace_back(i, j);
  };
  for (int i = occ.i0; i < occ.i0 + occ.w; ++i) {
    push(i, occ.j0);
    push(i, occ.j0 + occ.h - 1);
  }
  for (int j = occ.j0; j < occ.j0 + occ.h; ++j) {
    push(occ.i0, j);
    push(occ.i0 + occ.w - 1, j);
  }
  while (!stack.empty()) {
    auto [i, j] = stack.back();
    stack.pop_back();
    for (int d = 0; d < 4; ++d) push(i + kDI[d], j + kDJ[d]);
  }
  return reached;
}

// Fills the holes of an occupancy map in place: occ := occ OR not-reached.
void fill_holes(Bitmap& occ) {
  const std::vector<char> reached = flood_outside(occ);
  for (size_t k = 0; k < occ.bits.size(); ++k)
    if (!reached[k]) occ.bits[k] = 1;
}

// Boundary of a filled (hole-free) region is a single simple loop; every
// boundary vertex has exactly two incident boundary edges, so the walk that
// keeps the region on its left closes it up without choices.
OrientedLoop trace_filled_boundary(const Bitmap& occ) {
  // Directed boundary edges with the region on the left, keyed by tail vertex.
  std::map<Vertex, Vertex> next;
  for (int j = occ.j0; j <= occ.j0 + occ.h; ++j) {
    for (int i = occ.i0; i <= occ.i0 + occ.w; ++i) {
      // Horizontal edge from (i,j) to (i+1,j): below cell (i,j-1), above (i,j).
      if (i < occ.i0 + occ.w) {
        const bool below = occ.get(i, j - 1), above = occ.get(i, j);
        if (below != above) {
          if (above)  // region above: +x keeps it on the left
            next.emplace(Vertex{i, j}, Vertex{i + 1, j});
          else
            next.emplace(Vertex{i + 1, j}, Vertex{i, j});
        }
      }
      // Vertical edge from (i,j) to (i,j+1): left cell (i-1,j), right (i,j).
      if (j < occ.j0 + occ.h) {
        const bool left = occ.get(i - 1, j), right = occ.get(i, j);
        if (left != right) {
          if (left)  // region on the left: +y
            next.emplace(Vertex{i, j}, Vertex{i, j + 1});
          else
            next.emplace(Vertex{i, j + 1}, Vertex{i, j});
        }
      }
    }
  }
  OrientedLoop loop;
  if (next.empty()) return loop;
  const Vertex start = next.begin()->first;
  Vertex v = start;
  do {
    loop.vertices.push_back(v);
    auto it = next.find(v);
    if (it == next.end()) throw std::logic_error("trace_filled_boundary: broken boundary walk");
    v = it->second;
    next.erase(it);
  } while (!(v == start));
  if (!next.empty()) throw std::logic_error("trace_filled_boundary: region boundary not connected");
  if (loop.signed_area2() <= 0) throw std::logic_error("trace_filled_boundary: expected ccw walk");
  loop.orientation = Orientation::CCW;
  loop.canonicalize();
  return loop;
}

Bitmap filled_bitmap(const Grid& g, const std::vector<int>& cells) {
  int imin = g.nx, imax = -1, jmin = g.ny, jmax = -1;
  for (int c : cells) {
    auto [i, j] = g.cell_ij(c);
    imin = std::min(imin, i);
    imax = std::max(imax, i);
    jmin = std::min(jmin, j);
    jmax = std::max(jmax, j);
  }
  Bitmap occ(imin - 1, jmin - 1, imax + 1, jmax + 1);
  for (int c : cells) {
    auto [i, j] = g.cell_ij(c);
    occ.at(i, j) = 1;
  }
  fill_holes(occ);
  return occ;
}

// Connected components over an arbitrary cell list (4-adjacency), returned as
// cell-id lists ordered by nonincreasing size then smallest id.
std::vector<std::vector<int>> components_of(const Grid& g, const std::vector<int>& cells) {
  std::map<int, int> comp_of;  // cell id -> component index, -1 unvisited
  for (int c : cells) comp_of[c] = -1;
  std::vector<std::vector<int>> comps;
  for (int c : cells) {
    if (comp_of[c] != -1) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    std::vector<int> stack{c};
    comp_of[c] = id;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      comps[id].push_back(cur);
      auto [i, j] = g.cell_ij(cur);
      for (int d = 0; d < 4; ++d) {
        const int ni = i + kDI[d], nj = j + kDJ[d];
        if (!g.cell_in_range(ni, nj)) continue;
        auto it = comp_of.find(g.cell_id(ni, nj));
        if (it != comp_of.end() && it->second == -1) {
          it->second = id;
          stack.push_back(it->first);
        }
      }
    }
    std::sort(comps[id].begin(), comps[id].end());
  }
  std::sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  return comps;
}

}  // namespace

double perimeter(const PixelSet& p) {
  long long edges = 0;
  for (int c : p.cells) {
    auto [i, j] = p.grid.cell_ij(c);
    for (int d = 0; d < 4; ++d) {
      const int ni = i + kDI[d], nj = j + kDJ[d];
      if (!p.grid.cell_in_range(ni, nj) || !p.contains(p.grid.cell_id(ni, nj))) ++edges;
    }
  }
  return p.grid.h * static_cast<double>(edges);
}

std::vector<PixelSet> pixel_components(const PixelSet& p) {
  std::vector<PixelSet> out;
  for (auto& cells : components_of(p.grid, p.cells)) out.emplace_back(p.grid, std::move(cells));
  return out;
}

BoundaryCurves boundary_curves(const PixelSet& p) {
  BoundaryCurves bc;
  if (p.cells.empty()) return bc;
  const Grid& g = p.grid;

  // Holes belong to individual components: the bounded complement components
  // of each component alone. A region trapped only jointly by several
  // components is no hole; its boundary edges are already distributed among
  // the outer loops, which keeps the loops edge-disjoint and makes the
  // gradient reconstruction identity exact.
  std::vector<std::pair<std::vector<int>, OrientedLoop>> holes;  // cells, loop
  for (const auto& comp : components_of(g, p.cells)) {
    const Bitmap filled = filled_bitmap(g, comp);
    bc.outer.push_back(trace_filled_boundary(filled));

    std::vector<int> enclosed;  // filled minus the component itself
    std::set<int> in_comp(comp.begin(), comp.end());
    for (int j = filled.j0; j < filled.j0 + filled.h; ++j)
      for (int i = filled.i0; i < filled.i0 + filled.w; ++i)
        if (filled.get(i, j) && g.cell_in_range(i, j) && !in_comp.count(g.cell_id(i, j)))
          enclosed.push_back(g.cell_id(i, j));
    for (auto& hole : components_of(g, enclosed)) {
      OrientedLoop loop = trace_filled_boundary(filled_bitmap(g, hole)).reversed();
      loop.canonicalize();
      holes.emplace_back(std::move(hole), std::move(loop));
    }
  }
  std::sort(holes.begin(), holes.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
    return a.first.front() < b.first.front();
  });
  for (auto& [cells, loop] : holes) bc.holes.push_back(std::move(loop));
  return bc;
}

PixelSet loop_interior(const Grid& g, const OrientedLoop& loop) {
  if (loop.vertices.empty()) return PixelSet(g, {});
  if (!loop.is_simple()) throw std::invalid_argument("loop_interior: loop is not simple");
  // Even-odd scan per row: a cell (i,j) is inside iff an odd number of the
  // loop's vertical edges at x >= i+1 cross the row j.
  int imin = g.nx + 1, imax = -1, jmin = g.ny + 1, jmax = -1;
  for (const Vertex& v : loop.vertices) {
    imin = std::min(imin, v.i);
    imax = std::max(imax, v.i);
    jmin = std::min(jmin, v.j);
    jmax = std::max(jmax, v.j);
  }
  const size_t n = loop.vertices.size();
  std::vector<std::vector<int>> vcross(static_cast<size_t>(std::max(0, jmax - jmin)));
  for (size_t k = 0; k < n; ++k) {
    const Vertex& a = loop.vertices[k];
    const Vertex& b = loop.vertices[(k + 1) % n];
    if (a.i == b.i) vcross[static_cast<size_t>(std::min(a.j, b.j) - jmin)].push_back(a.i);
  }
  std::vector<int> cells;
  for (int j = jmin; j < jmax; ++j) {
    auto& xs = vcross[static_cast<size_t>(j - jmin)];
    std::sort(xs.begin(), xs.end());
    // consecutive pairs of crossings bound runs of interior cells
    for (size_t k = 0; k + 1 < xs.size(); k += 2)
      for (int i = xs[k]; i < xs[k + 1]; ++i)
        if (g.cell_in_range(i, j)) cells.push_back(g.cell_id(i, j));
  }
  return PixelSet(g, std::move(cells));
}

double segment_distance(const Segment& s1, const Segment& s2) {
  auto sub = [](const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return std::array<double, 2>{a[0] - b[0], a[1] - b[1]};
  };
  auto cross = [](const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return a[0] * b[1] - a[1] * b[0];
  };
  auto point_seg = [&](const std::array<double, 2>& p, const Segment& s) {
    const auto d = sub(s.b, s.a);
    const auto w = sub(p, s.a);
    const double len2 = d[0] * d[0] + d[1] * d[1];
    double t = len2 > 0.0 ? (w[0] * d[0] + w[1] * d[1]) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p[0] - (s.a[0] + t * d[0]), p[1] - (s.a[1] + t * d[1]));
  };
  // Proper intersection means distance zero.
  const auto d1 = sub(s1.b, s1.a), d2 = sub(s2.b, s2.a);
  const double c1 = cross(d1, sub(s2.a, s1.a)), c2 = cross(d1, sub(s2.b, s1.a));
  const double c3 = cross(d2, sub(s1.a, s2.a)), c4 = cross(d2, sub(s1.b, s2.a));
  if (((c1 > 0) != (c2 > 0)) && ((c3 > 0) != (c4 > 0)) && c1 != 0 && c2 != 0 && c3 != 0 && c4 != 0)
    return 0.0;
  return std::min(std::min(point_seg(s1.a, s2), point_seg(s1.b, s2)),
                  std::min(point_seg(s2.a, s1), point_seg(s2.b, s1)));
}

SeparationReport segment_separation_check(const SegmentFamily& f, bool strict) {
  SeparationReport rep;
  const size_t n = f.segments.size();
  rep.ok.assign(n, true);
  for (size_t k = 0; k < n; ++k) {
    const double len = f.segments[k].length();
    if (!(len > 0.0)) throw std::invalid_argument("segment_separation_check: degenerate segment");
    for (size_t j = 0; j < n; ++j) {
      if (j == k) continue;
      const double d = segment_distance(f.segments[k], f.segments[j]);
      if (strict ? !(d > len) : !(d >= len)) {
        rep.ok[k] = false;
        break;
      }
    }
    rep.all_ok = rep.all_ok && rep.ok[k];
  }
  return rep;
}

}  // namespace loopfield
