#pragma once

// Planar pixel-grid geometry: uniform square lattices, pixel sets of finite
// perimeter, their 4-connected components and oriented Jordan boundary
// curves, plus separated-segment families.

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace loopfield {

// Uniform square lattice of nx-by-ny cells with side length h.
// Cell (i,j) spans [origin + h*(i,j), origin + h*(i+1,j+1)];
// vertex (i,j) sits at origin + h*(i,j).
struct Grid {
  int nx = 0;
  int ny = 0;
  double h = 1.0;
  std::array<double, 2> origin{0.0, 0.0};

  Grid() = default;
  Grid(int nx_, int ny_, double h_ = 1.0, std::array<double, 2> origin_ = {0.0, 0.0});

  int cell_count() const { return nx * ny; }
  int vertex_count() const { return (nx + 1) * (ny + 1); }
  int hedge_count() const { return nx * (ny + 1); }
  int vedge_count() const { return (nx + 1) * ny; }
  int edge_count() const { return hedge_count() + vedge_count(); }

  bool cell_in_range(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
  int cell_id(int i, int j) const;
  std::pair<int, int> cell_ij(int id) const;

  std::array<double, 2> vertex_xy(int i, int j) const {
    return {origin[0] + h * i, origin[1] + h * j};
  }

  bool operator==(const Grid&) const = default;
};

// Lattice vertex by index pair.
struct Vertex {
  int i = 0;
  int j = 0;
  auto operator<=>(const Vertex&) const = default;
};

// H edges run +x from vertex (i,j) to (i+1,j); V edges run +y from (i,j) to
// (i,j+1). These canonical directions carry the sign of every edge weight.
enum class EdgeKind : std::uint8_t { H, V };

struct EdgeId {
  EdgeKind kind = EdgeKind::H;
  int i = 0;
  int j = 0;
  auto operator<=>(const EdgeId&) const = default;

  Vertex tail() const { return {i, j}; }
  Vertex head() const { return kind == EdgeKind::H ? Vertex{i + 1, j} : Vertex{i, j + 1}; }
  std::string token() const;  // "h:i:j" / "v:i:j"
};

// Cells on either side of an edge, as (i,j) pairs that may fall outside the
// grid (the exterior). For H edges: (below, above); for V: (left, right).
std::pair<std::pair<int, int>, std::pair<int, int>> edge_sides(const EdgeId& e);

bool edge_in_grid(const Grid& g, const EdgeId& e);
int edge_index(const Grid& g, const EdgeId& e);
EdgeId edge_from_index(const Grid& g, int index);
EdgeId edge_between(const Vertex& a, const Vertex& b, int& sign);  // sign vs canonical direction

// Subset of grid cells, stored as sorted unique ids. Equality is set equality.
struct PixelSet {
  Grid grid;
  std::vector<int> cells;

  PixelSet() = default;
  PixelSet(const Grid& g, std::vector<int> cells_);

  bool contains(int cell) const;
  int size() const { return static_cast<int>(cells.size()); }
  bool operator==(const PixelSet&) const = default;
};

enum class Orientation : std::uint8_t { CCW, CW };

// Simple closed lattice curve; the closing edge vertices.back() -> vertices
// .front() is implicit. `orientation` matches the winding of the vertex order.
struct OrientedLoop {
  std::vector<Vertex> vertices;
  Orientation orientation = Orientation::CCW;

  int edge_count() const { return static_cast<int>(vertices.size()); }
  double length(const Grid& g) const { return g.h * edge_count(); }
  // Twice the signed area in index units; positive for ccw winding.
  long long signed_area2() const;
  OrientedLoop reversed() const;
  bool is_simple() const;
  void canonicalize();  // rotate so the smallest vertex comes first

  bool operator==(const OrientedLoop&) const = default;
};

struct Segment {
  std::array<double, 2> a{0.0, 0.0};
  std::array<double, 2> b{0.0, 0.0};
  double length() const;
};

// Pairwise disjoint planar segments of positive length.
struct SegmentFamily {
  std::vector<Segment> segments;

  SegmentFamily() = default;
  explicit SegmentFamily(std::vector<Segment> segments_);
};

// h times the number of grid edges with exactly one incident cell inside.
double perimeter(const PixelSet& p);

// 4-connected components, ordered by nonincreasing cell count (smallest cell
// id breaks ties). Component perimeters sum to perimeter(p).
std::vector<PixelSet> pixel_components(const PixelSet& p);

struct BoundaryCurves {
  std::vector<OrientedLoop> outer;  // ccw, one per 4-connected component
  std::vector<OrientedLoop> holes;  // cw, one per bounded complement component
};

// Decomposes the measure-theoretic boundary of p into pairwise edge-disjoint
// simple loops whose total length equals perimeter(p).
BoundaryCurves boundary_curves(const PixelSet& p);

// Pixels enclosed by a simple loop (its interior region).
PixelSet loop_interior(const Grid& g, const OrientedLoop& loop);

struct SeparationReport {
  std::vector<bool> ok;  // per segment k: dist(L_k, L_j) >= len(L_k) for all j != k
  bool all_ok = true;
};

// Checks the separated-segments condition, strictly if `strict`.
SeparationReport segment_separation_check(const SegmentFamily& f, bool strict);

double segment_distance(const Segment& s1, const Segment& s2);

}  // namespace loopfield
