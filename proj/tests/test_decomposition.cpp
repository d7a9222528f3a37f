#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "loopfield/decomposition.hpp"
#include "loopfield/experiments.hpp"

using namespace loopfield;

namespace {

CellFunction indicator(const Grid& g, const std::vector<std::pair<int, int>>& ij, double v = 1.0) {
  CellFunction phi(g);
  for (auto [i, j] : ij) phi.at(i, j) += v;
  return phi;
}

std::vector<std::pair<int, int>> block(int i0, int j0, int w, int h) {
  std::vector<std::pair<int, int>> ij;
  for (int j = j0; j < j0 + h; ++j)
    for (int i = i0; i < i0 + w; ++i) ij.emplace_back(i, j);
  return ij;
}

double coarea_checksum(const CellFunction& phi) {
  double acc = 0.0;
  for (const CoareaBand& b : coarea_profile(phi)) acc += (b.t_hi - b.t_lo) * b.perimeter;
  return acc;
}

}  // namespace

TEST_CASE("rotated gradient of indicators circulates ccw") {
  const Grid g(8, 8, 1.0);
  const EdgeMeasure one = rotated_gradient(indicator(g, {{2, 2}}));
  CHECK(tv_norm(one) == 4.0);
  CHECK(one.weight({EdgeKind::H, 2, 2}) == 1.0);   // bottom, +x
  CHECK(one.weight({EdgeKind::V, 3, 2}) == 1.0);   // right, +y
  CHECK(one.weight({EdgeKind::H, 2, 3}) == -1.0);  // top, -x
  CHECK(one.weight({EdgeKind::V, 2, 2}) == -1.0);  // left, -y
  CHECK(divergence(one).values.empty());

  CHECK(rotated_gradient(CellFunction(g)).weights.empty());

  // a nonzero constant on the grid is c * indicator(grid): its gradient is
  // the grid border loop, and the co-area identity accounts for it exactly
  CellFunction constant(g);
  for (double& v : constant.values) v = 3.25;
  const EdgeMeasure border = rotated_gradient(constant);
  CHECK(tv_norm(border) == doctest::Approx(3.25 * perimeter(suplevel_set(constant, 1.0))));
  CHECK(divergence(border).values.empty());

  const EdgeMeasure big = rotated_gradient(indicator(g, block(1, 1, 3, 3), 2.0));
  CHECK(big.weights.size() == 12);
  for (const auto& [e, w] : big.weights) CHECK(std::abs(w) == 2.0);
  CHECK(tv_norm(big) == 24.0);
  CHECK(divergence(big).values.empty());
}

TEST_CASE("stream function inverts the rotated gradient") {
  const Grid g(8, 8, 1.0);
  OrientedLoop square;
  square.vertices = {{1, 1}, {2, 1}, {2, 2}, {1, 2}};
  const EdgeMeasure nu = edge_measure_from_loop(g, square, 1.0);
  CHECK(stream_function(nu) == indicator(g, {{1, 1}}));

  CHECK(stream_function(EdgeMeasure(g)) == CellFunction(g));

  EdgeMeasure nested = rotated_gradient(indicator(g, block(1, 1, 5, 5)));
  nested.add(rotated_gradient(indicator(g, {{3, 3}})));
  CellFunction expect = indicator(g, block(1, 1, 5, 5));
  expect.at(3, 3) += 1.0;
  CHECK(stream_function(nested) == expect);

  EdgeMeasure bad(g);
  bad.add_weight({EdgeKind::H, 4, 4}, 1.0);
  CHECK_THROWS_AS(stream_function(bad), divergence_error);
  try {
    stream_function(bad);
  } catch (const divergence_error& e) {
    const bool tail = e.vertex == Vertex{4, 4}, head = e.vertex == Vertex{5, 4};
    CHECK((tail || head));
  }
}

TEST_CASE("suplevel sets match thresholds") {
  const Grid g(8, 8, 1.0);
  const CellFunction phi = indicator(g, block(2, 2, 3, 3));

  std::vector<int> block_ids;
  for (auto [i, j] : block(2, 2, 3, 3)) block_ids.push_back(g.cell_id(i, j));
  CHECK(suplevel_set(phi, 0.5) == PixelSet(g, block_ids));
  CHECK(suplevel_set(phi, 1.5).size() == 0);
  CHECK(suplevel_set(phi, -0.5).size() == g.cell_count());
}

TEST_CASE("coarea profiles on the worked examples") {
  const Grid g(8, 8, 1.0);
  const CellFunction two_block = indicator(g, block(1, 1, 3, 3), 2.0);
  const auto bands = coarea_profile(two_block);
  REQUIRE(bands.size() == 1);
  CHECK(bands[0].t_lo == 0.0);
  CHECK(bands[0].t_hi == 2.0);
  CHECK(bands[0].perimeter == 12.0);
  CHECK(coarea_checksum(two_block) == 24.0);
  CHECK(coarea_checksum(two_block) == tv_norm(rotated_gradient(two_block)));

  CellFunction nested = indicator(g, block(1, 1, 5, 5));
  nested.at(3, 3) += 1.0;
  const auto nb = coarea_profile(nested);
  REQUIRE(nb.size() == 2);
  CHECK(nb[0].perimeter == 20.0);
  CHECK(nb[1].perimeter == 4.0);
  CHECK(coarea_checksum(nested) == 24.0);

  CHECK(coarea_profile(CellFunction(g)).empty());
}

TEST_CASE("decompose on the worked examples") {
  const Grid g(8, 8, 1.0);
  OrientedLoop square;
  square.vertices = {{2, 2}, {3, 2}, {3, 3}, {2, 3}};
  const EdgeMeasure triple = edge_measure_from_loop(g, square, 3.0);
  const LoopDecomposition d = decompose(triple);
  REQUIRE(d.levels.size() == 1);
  CHECK(d.levels[0].t_lo == 0.0);
  CHECK(d.levels[0].t_hi == 3.0);
  REQUIRE(d.levels[0].loops.size() == 1);
  CHECK(d.levels[0].masses[0] == 12.0);
  CHECK(reconstruct(d) == triple);

  // annulus: ccw outer + cw hole in one level
  CellFunction ann(g);
  for (auto [i, j] : block(1, 1, 5, 5)) ann.at(i, j) = 1.0;
  ann.at(3, 3) = 0.0;
  const EdgeMeasure nu = rotated_gradient(ann);
  const LoopDecomposition da = decompose(nu);
  REQUIRE(da.levels.size() == 1);
  REQUIRE(da.levels[0].loops.size() == 2);
  CHECK(da.levels[0].loops[0].length(g) == 20.0);
  CHECK(da.levels[0].loops[0].signed_area2() > 0);
  CHECK(da.levels[0].loops[1].length(g) == 4.0);
  CHECK(da.levels[0].loops[1].signed_area2() < 0);
  CHECK(reconstruct(da) == nu);
}

TEST_CASE("negative stream values decompose through reversed boundaries") {
  const Grid g(8, 8, 1.0);
  const CellFunction phi = indicator(g, block(2, 2, 2, 2), -2.0);
  const EdgeMeasure nu = rotated_gradient(phi);
  const LoopDecomposition d = decompose(nu);
  REQUIRE(d.levels.size() == 1);
  CHECK(d.levels[0].t_lo == -2.0);
  CHECK(d.levels[0].t_hi == 0.0);
  REQUIRE(d.levels[0].loops.size() == 1);
  CHECK(d.levels[0].loops[0].signed_area2() < 0);  // clockwise around the well
  CHECK(reconstruct(d) == nu);
  CHECK(verify_decomposition(nu, d).passed);
}

TEST_CASE("representing measure masses") {
  const Grid g(8, 8, 1.0);
  OrientedLoop square;
  square.vertices = {{2, 2}, {3, 2}, {3, 3}, {2, 3}};
  const auto atoms3 = representing_measure(decompose(edge_measure_from_loop(g, square, 3.0)));
  REQUIRE(atoms3.size() == 1);
  CHECK(atoms3[0].mass == 12.0);
  CHECK(atoms3[0].normalized_tv == 1.0);

  CellFunction nested(g);
  for (auto [i, j] : block(1, 1, 5, 5)) nested.at(i, j) = 1.0;
  nested.at(3, 3) = 2.0;
  const EdgeMeasure nu = rotated_gradient(nested);
  const auto atoms = representing_measure(decompose(nu));
  REQUIRE(atoms.size() == 2);
  CHECK(atoms[0].mass == 20.0);
  CHECK(atoms[1].mass == 4.0);

  double total = 0.0;
  for (const auto& a : atoms) total += a.mass;
  CHECK(total == tv_norm(nu));
}

TEST_CASE("random round trips, exact identities") {
  Rng rng(99);
  const Grid g(16, 16, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const CellFunction phi = random_cell_function(g, rng, -3, 4, trial % 2 == 0);
    const EdgeMeasure nu = rotated_gradient(phi);
    CHECK(divergence(nu).values.empty());
    CHECK(coarea_checksum(phi) == tv_norm(nu));
    const LoopDecomposition d = decompose(nu);
    CHECK(reconstruct(d) == nu);
    CHECK(stream_function(nu) == phi);
    const CheckLine audit = verify_decomposition(nu, d);
    INFO(audit.detail);
    CHECK(audit.passed);
    CHECK(d.total_mass() == doctest::Approx(tv_norm(nu)).epsilon(1e-13));
  }
}

TEST_CASE("suplevel monotonicity") {
  Rng rng(123);
  const Grid g(10, 10, 1.0);
  const CellFunction phi = random_cell_function(g, rng, -2, 3, true);
  double prev_size = g.cell_count() + 1;
  for (double t : {-2.5, -1.5, -0.5, 0.5, 1.5, 2.5}) {
    const PixelSet s = suplevel_set(phi, t);
    CHECK(s.size() <= prev_size);
    prev_size = s.size();
  }
  // fractional h keeps the identity to rounding
  const Grid gh(10, 10, 0.3);
  CellFunction phih(gh);
  for (size_t k = 0; k < phih.values.size(); ++k) phih.values[k] = phi.values[k];
  const double tv = tv_norm(rotated_gradient(phih));
  double checksum = 0.0;
  for (const CoareaBand& b : coarea_profile(phih)) checksum += (b.t_hi - b.t_lo) * b.perimeter;
  CHECK(tv == doctest::Approx(checksum).epsilon(1e-12));
}
