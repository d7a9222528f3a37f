#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "loopfield/experiments.hpp"
#include "loopfield/field.hpp"

using namespace loopfield;

namespace {

constexpr double kPi = std::numbers::pi;

// Adaptive Simpson quadrature, the independent oracle for the closed-form
// segment integral.
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fb,
               double fm, double eps, int depth) {
  const double m = (a + b) / 2.0;
  const double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, fm, flm, eps / 2.0, depth - 1) +
         simpson(f, m, b, fm, fb, frm, eps / 2.0, depth - 1);
}

double quadrature_edge_reading(const Vec3& p, const Vec3& q, double density, const Vec3& x,
                               const Vec3& v, double mu0) {
  const Vec3 tau = (q - p) * (1.0 / (q - p).norm());
  auto integrand = [&](double s) {
    const Vec3 y = p + tau * s;
    return kernel_Kv(x - y, v).dot(tau);
  };
  const double len = (q - p).norm();
  const double fa = integrand(0.0), fb = integrand(len), fm = integrand(len / 2.0);
  const double integral = simpson(integrand, 0.0, len, fa, fb, fm, 1e-14, 40);
  return -(mu0 / (4.0 * kPi)) * density * integral;
}

}  // namespace

TEST_CASE("kernel values and homogeneity") {
  const Vec3 e3{0.0, 0.0, 1.0};
  const Vec3 k1 = kernel_Kv({0.0, 0.0, 1.0}, e3);
  CHECK(k1.x == 0.0);
  CHECK(k1.y == 0.0);
  CHECK(k1.z == -2.0);

  const Vec3 k2 = kernel_Kv({1.0, 0.0, 0.0}, e3);
  CHECK(k2.x == 0.0);
  CHECK(k2.z == 1.0);

  const Vec3 x{0.3, -0.7, 1.1};
  const Vec3 ka = kernel_Kv(x, e3);
  const Vec3 kb = kernel_Kv(x * 2.0, e3);
  CHECK(kb.x == doctest::Approx(ka.x / 8.0).epsilon(1e-14));
  CHECK(kb.y == doctest::Approx(ka.y / 8.0).epsilon(1e-14));
  CHECK(kb.z == doctest::Approx(ka.z / 8.0).epsilon(1e-14));

  CHECK_THROWS_AS(kernel_Kv({0.0, 0.0, 0.0}, e3), std::domain_error);
}

TEST_CASE("kernel is the gradient of its potential") {
  const Vec3 v{0.2, -0.4, 0.89};
  const Vec3 x{0.7, 0.3, 1.4};
  const double step = 1e-5;
  const Vec3 k = kernel_Kv(x, v);
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 dx{0.0, 0.0, 0.0};
    (axis == 0 ? dx.x : axis == 1 ? dx.y : dx.z) = step;
    const double fd = (kernel_potential(x + dx, v) - kernel_potential(x - dx, v)) / (2.0 * step);
    const double exact = axis == 0 ? k.x : axis == 1 ? k.y : k.z;
    CHECK(fd == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("dipole readings") {
  const DipoleField d({Dipole{{0.0, 0.0}, {0.0, 0.0, 1.0}}});
  const MeasurementSetup s({{0.0, 0.0, 1.0}}, {0.0, 0.0, 1.0}, {1.0}, 1.0);
  CHECK(forward_dipoles(d, s).values[0] == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));

  const DipoleField zero({Dipole{{0.0, 0.0}, {0.0, 0.0, 0.0}}});
  CHECK(forward_dipoles(zero, s).values[0] == 0.0);

  const DipoleField a({Dipole{{0.3, 0.1}, {1.0, -1.0, 0.5}}});
  const DipoleField b({Dipole{{-0.4, 0.2}, {0.0, 2.0, 1.0}}});
  DipoleField both({a.atoms[0], b.atoms[0]});
  CHECK(forward_dipoles(both, s).values[0] ==
        doctest::Approx(forward_dipoles(a, s).values[0] + forward_dipoles(b, s).values[0])
            .epsilon(1e-14));
}

TEST_CASE("single edge reading matches the antiderivative and quadrature") {
  const Grid g(2, 2, 1.0);
  EdgeMeasure m(g);
  m.add_weight({EdgeKind::H, 0, 0}, 1.0);
  const MeasurementSetup s({{0.0, 0.0, 1.0}}, {0.0, 0.0, 1.0}, {1.0}, 1.0);
  const double got = forward_edges(m, s).values[0];

  const double expect = -(1.0 - std::pow(2.0, -1.5)) / (4.0 * kPi);
  CHECK(got == doctest::Approx(expect).epsilon(1e-14));
  CHECK(got == doctest::Approx(-0.0514442).epsilon(1e-5));

  const double quad = quadrature_edge_reading({0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, 1.0,
                                              {0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}, 1.0);
  CHECK(got == doctest::Approx(quad).epsilon(1e-10));

  EdgeMeasure rev(g);
  rev.add_weight({EdgeKind::H, 0, 0}, -1.0);
  CHECK(forward_edges(rev, s).values[0] == doctest::Approx(-got).epsilon(1e-15));
}

TEST_CASE("closed loops are exactly silent") {
  const Grid g(6, 6, 1.0);
  Rng rng(31);
  MeasurementSetup s = MeasurementSetup::plane_grid(4, 4, -1.0, 7.0, -1.0, 7.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> ids;
    for (int c = 0; c < g.cell_count(); ++c)
      if (rng.uniform01() < 0.5) ids.push_back(c);
    const BoundaryCurves bc = boundary_curves(PixelSet(g, ids));
    EdgeMeasure m(g);
    for (const auto* loops : {&bc.outer, &bc.holes})
      for (const OrientedLoop& loop : *loops)
        m.add(edge_measure_from_loop(g, loop, rng.uniform(-3.0, 3.0)));
    for (double val : forward_edges(m, s).values) CHECK(std::abs(val) <= 1e-14);
  }
}

TEST_CASE("adjoint is the exact transpose") {
  Rng rng(77);
  const Grid g(4, 4, 1.0);
  std::vector<EdgeId> edges;
  for (int j = 0; j <= 4; ++j)
    for (int i = 0; i < 4; ++i)
      if (rng.uniform01() < 0.6) edges.push_back({EdgeKind::H, i, j});
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i <= 4; ++i)
      if (rng.uniform01() < 0.6) edges.push_back({EdgeKind::V, i, j});
  const EdgeSupport support(g, edges);
  MeasurementSetup s = MeasurementSetup::plane_grid(3, 3, 0.0, 4.0, 0.0, 4.0, 0.8);

  for (int trial = 0; trial < 10; ++trial) {
    Magnetization m;
    m.edge_part = EdgeMeasure(g);
    for (const EdgeId& e : support.edges) m.edge_part.add_weight(e, rng.normal());
    m.dipole_part = DipoleField({Dipole{{rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0)},
                                        {rng.normal(), rng.normal(), rng.normal()}},
                                 Dipole{{rng.uniform(0.0, 4.0), rng.uniform(4.5, 6.0)},
                                        {rng.normal(), rng.normal(), rng.normal()}}});
    Reading psi;
    for (int q = 0; q < s.size(); ++q) psi.values.push_back(rng.normal());

    const Reading am = forward(m, s);
    double lhs = 0.0;
    for (size_t q = 0; q < psi.values.size(); ++q)
      lhs += s.weights[q] * am.values[q] * psi.values[q];

    double rhs = 0.0;
    for (const auto& [e, coeff] : adjoint_edges(psi, s, support))
      rhs += m.edge_part.weight(e) * coeff;
    std::vector<std::array<double, 2>> positions;
    for (const Dipole& a : m.dipole_part.atoms) positions.push_back(a.position);
    const auto datoms = adjoint_dipoles(psi, s, positions);
    for (size_t a = 0; a < datoms.size(); ++a)
      for (int c = 0; c < 3; ++c)
        rhs += m.dipole_part.atoms[a].moment[static_cast<size_t>(c)] * datoms[a][static_cast<size_t>(c)];

    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }

  Reading zero;
  zero.values.assign(static_cast<size_t>(s.size()), 0.0);
  for (const auto& [e, c] : adjoint_edges(zero, s, support)) CHECK(c == 0.0);
}

TEST_CASE("operator matrix structure") {
  const UnitSquareFixture fx = make_unit_square();
  const MeasurementSetup one_pt({{0.3, 0.4, 0.9}}, {0.0, 0.0, 1.0}, {1.0}, 1.0);
  const Eigen::MatrixXd M = operator_matrix(one_pt, fx.support);
  REQUIRE(M.rows() == 1);
  REQUIRE(M.cols() == 4);
  // signed square-loop combination of the columns is silent
  Eigen::VectorXd loop_coeffs(4);
  for (size_t k = 0; k < fx.support.edges.size(); ++k) {
    EdgeMeasure ccw = fx.mu0;
    ccw.add(fx.mu1, -1.0);
    loop_coeffs[static_cast<Eigen::Index>(k)] = ccw.weight(fx.support.edges[k]);
  }
  CHECK(std::abs((M * loop_coeffs)(0)) <= 1e-15);

  // single-edge canonical entry
  const Grid g(2, 2, 1.0);
  const EdgeSupport single(g, {{EdgeKind::H, 0, 0}});
  const MeasurementSetup s({{0.0, 0.0, 1.0}}, {0.0, 0.0, 1.0}, {1.0}, 1.0);
  const Eigen::MatrixXd M1 = operator_matrix(s, single);
  CHECK(M1(0, 0) == doctest::Approx(-0.0514442).epsilon(1e-5));

  for (Eigen::Index c = 0; c < M.cols(); ++c) CHECK(M.col(c).norm() > 0.0);

  const Grid big(200, 200, 1.0);
  std::vector<EdgeId> lots;
  for (int j = 0; j <= 200 && lots.size() <= 10001; ++j)
    for (int i = 0; i < 200 && lots.size() <= 10001; ++i) lots.push_back({EdgeKind::H, i, j});
  CHECK_THROWS_AS(operator_matrix(s, EdgeSupport(big, lots)), std::invalid_argument);
}

TEST_CASE("scalar potential and field consistency") {
  const DipoleField d({Dipole{{0.0, 0.0}, {0.0, 0.0, 1.0}}});
  CHECK(scalar_potential(d, {0.0, 0.0, 1.0}) == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-14));

  const DipoleField dneg({Dipole{{0.0, 0.0}, {0.0, 0.0, -1.0}}});
  CHECK(scalar_potential(dneg, {0.0, 0.0, 1.0}) ==
        doctest::Approx(-scalar_potential(d, {0.0, 0.0, 1.0})).epsilon(1e-14));

  // -mu0 * dPhi/dz matches the reading for v = e3
  const MeasurementSetup s({{0.0, 0.0, 1.0}}, {0.0, 0.0, 1.0}, {1.0}, 1.0);
  const double b3 = forward_dipoles(d, s).values[0];
  const double step = 1e-5;
  const double dphi = (scalar_potential(d, {0.0, 0.0, 1.0 + step}) -
                       scalar_potential(d, {0.0, 0.0, 1.0 - step})) /
                      (2.0 * step);
  CHECK(-dphi == doctest::Approx(b3).epsilon(1e-8));

  CHECK_THROWS_AS(scalar_potential(d, {0.0, 0.0, 0.0}), std::domain_error);
}

TEST_CASE("far field decays like R^-3") {
  const DipoleField d({Dipole{{0.0, 0.0}, {0.4, -0.3, 1.0}}});
  double prev = 0.0;
  for (double r : {10.0, 20.0, 40.0}) {
    const MeasurementSetup s({{0.0, 0.0, r}}, {0.0, 0.0, 1.0}, {1.0}, 1.0);
    const double val = std::abs(forward_dipoles(d, s).values[0]);
    if (prev != 0.0) CHECK(prev / val == doctest::Approx(8.0).epsilon(0.01));
    prev = val;
  }
}

TEST_CASE("setup validation") {
  CHECK_THROWS_AS(MeasurementSetup({{0.0, 0.0, 0.0}}, {0.0, 0.0, 1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(MeasurementSetup({{0.0, 0.0, 1.0}}, {0.0, 0.0, 0.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(MeasurementSetup({{0.0, 0.0, 1.0}}, {0.0, 0.0, 1.0}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(MeasurementSetup({{0.0, 0.0, 1.0}}, {0.0, 0.0, 1.0}, {1.0, 2.0}),
                  std::invalid_argument);
  const MeasurementSetup s({{0.0, 0.0, 1.0}}, {0.0, 0.0, 2.0}, {1.0});
  CHECK(s.direction.norm() == doctest::Approx(1.0).epsilon(1e-15));
}
