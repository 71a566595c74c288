#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "../oracles/loop_oracle.hpp"
#include "orthoshell/basis.hpp"

using namespace orthoshell;

namespace {

ShapeTable library_table(int valence, double xi, double eta) {
  return valence == 6 ? box_spline_regular(xi, eta) : eval_irregular(valence, xi, eta);
}

double max_diff(const ShapeTable& a, const ShapeTable& b) {
  double m = 0;
  m = std::max(m, (a.n - b.n).cwiseAbs().maxCoeff());
  m = std::max(m, (a.d1 - b.d1).cwiseAbs().maxCoeff());
  m = std::max(m, (a.d2 - b.d2).cwiseAbs().maxCoeff());
  m = std::max(m, (a.d11 - b.d11).cwiseAbs().maxCoeff());
  m = std::max(m, (a.d22 - b.d22).cwiseAbs().maxCoeff());
  m = std::max(m, (a.d12 - b.d12).cwiseAbs().maxCoeff());
  return m;
}

/// Random point in the central child triangle (xi + eta >= 1/2, xi, eta <= 1/2).
std::pair<double, double> central_point(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  double a = u(rng), b = u(rng);
  if (a + b > 1) {
    a = 1 - a;
    b = 1 - b;
  }
  // child corners (1/2, 0), (1/2, 1/2), (0, 1/2)
  return {0.5 - 0.5 * b, 0.5 * a + 0.5 * b};
}

}  // namespace

TEST_CASE("box spline barycentre values") {
  const ShapeTable t = box_spline_regular(1.0 / 3, 1.0 / 3);
  // Element vertices, the three vertices sharing an edge of the element, and
  // the six touching a single element vertex.
  for (int s : {0, 1, 2}) CHECK(t.n[s] == doctest::Approx(23.0 / 81).epsilon(1e-14));
  for (int s : {3, 6, 9}) CHECK(t.n[s] == doctest::Approx(7.0 / 162).epsilon(1e-14));
  for (int s : {4, 5, 7, 8, 10, 11}) CHECK(t.n[s] == doctest::Approx(1.0 / 324).epsilon(1e-12));
}

TEST_CASE("partition of unity and zero-sum derivatives") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    double xi = u(rng), eta = u(rng);
    if (xi + eta > 1) {
      xi = 1 - xi;
      eta = 1 - eta;
    }
    const ShapeTable t = box_spline_regular(xi, eta);
    CHECK(std::abs(t.n.sum() - 1) < 1e-12);
    CHECK(std::abs(t.d1.sum()) < 1e-10);
    CHECK(std::abs(t.d2.sum()) < 1e-10);
    CHECK(std::abs(t.d11.sum()) < 1e-10);
    CHECK(std::abs(t.d22.sum()) < 1e-10);
    CHECK(std::abs(t.d12.sum()) < 1e-10);
  }
  for (int n = 3; n <= 12; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto [xi, eta] = central_point(rng);
      const ShapeTable t = eval_irregular(n, xi, eta);
      CHECK(t.size() == n + 6);
      CHECK(std::abs(t.n.sum() - 1) < 1e-12);
      CHECK(std::abs(t.d1.sum()) < 1e-10);
      CHECK(std::abs(t.d2.sum()) < 1e-10);
      CHECK(std::abs(t.d11.sum()) < 1e-10);
      CHECK(std::abs(t.d22.sum()) < 1e-10);
      CHECK(std::abs(t.d12.sum()) < 1e-10);
    }
  }
}

TEST_CASE("linear reproduction on the regular lattice") {
  // Control points at lattice positions p = (i, j) map the parameter point
  // to p = (xi + eta, eta); any linear field is reproduced exactly.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  const auto& lat = regular_slot_lattice();
  for (int trial = 0; trial < 30; ++trial) {
    double xi = u(rng), eta = u(rng);
    if (xi + eta > 1) {
      xi = 1 - xi;
      eta = 1 - eta;
    }
    const ShapeTable t = box_spline_regular(xi, eta);
    double px = 0, py = 0, dx1 = 0, dy1 = 0, dx2 = 0, dy2 = 0;
    for (int s = 0; s < 12; ++s) {
      px += t.n[s] * lat[s][0];
      py += t.n[s] * lat[s][1];
      dx1 += t.d1[s] * lat[s][0];
      dy1 += t.d1[s] * lat[s][1];
      dx2 += t.d2[s] * lat[s][0];
      dy2 += t.d2[s] * lat[s][1];
    }
    CHECK(std::abs(px - (xi + eta)) < 1e-9);
    CHECK(std::abs(py - eta) < 1e-9);
    CHECK(std::abs(dx1 - 1) < 1e-9);
    CHECK(std::abs(dy1) < 1e-9);
    CHECK(std::abs(dx2 - 1) < 1e-9);
    CHECK(std::abs(dy2 - 1) < 1e-9);
    // second derivatives of a linear field vanish
    Eigen::VectorXd lx(12), ly(12);
    for (int s = 0; s < 12; ++s) {
      lx[s] = lat[s][0];
      ly[s] = lat[s][1];
    }
    CHECK(std::abs(t.d11.dot(lx)) < 1e-9);
    CHECK(std::abs(t.d22.dot(ly)) < 1e-9);
    CHECK(std::abs(t.d12.dot(lx)) < 1e-9);
  }
}

TEST_CASE("linear reproduction of irregular patches") {
  // A planar disk whose nodes sample a linear field: the limit field is the
  // same linear function of the limit position.
  for (int n : {3, 4, 5, 7, 8, 10}) {
    const ControlMesh mesh = oracle::valence_disk(n, 4);
    const OneRing ring = build_one_ring(mesh, 0);
    REQUIRE(ring.irregular_valence == n);
    const ShapeTable t = eval_irregular(n, 1.0 / 3, 1.0 / 3);
    Vec3 x = Vec3::Zero();
    double f = 0;
    for (std::size_t s = 0; s < ring.size(); ++s) {
      const Vec3& p = mesh.nodes()[ring.nodes[s]];
      x += t.n[s] * p;
      f += t.n[s] * (2.0 * p.x() - 3.0 * p.y() + 0.5);
    }
    CHECK(std::abs(f - (2.0 * x.x() - 3.0 * x.y() + 0.5)) < 1e-9);
  }
}

TEST_CASE("derivatives match finite differences") {
  const double h = 1e-5;
  std::mt19937 rng(3);
  for (int n : {4, 5, 6, 7, 9}) {
    for (int trial = 0; trial < 5; ++trial) {
      auto [xi, eta] = central_point(rng);
      // keep the stencil inside the central child
      xi = 0.2 + 0.2 * xi;
      eta = 0.25 + 0.2 * eta;
      const ShapeTable t = library_table(n, xi, eta);
      const ShapeTable px = library_table(n, xi + h, eta), mx = library_table(n, xi - h, eta);
      const ShapeTable py = library_table(n, xi, eta + h), my = library_table(n, xi, eta - h);
      auto rel = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return (a - b).norm() / std::max(1e-3, b.norm());
      };
      CHECK(rel((px.n - mx.n) / (2 * h), t.d1) < 1e-6);
      CHECK(rel((py.n - my.n) / (2 * h), t.d2) < 1e-6);
      CHECK(rel((px.d1 - mx.d1) / (2 * h), t.d11) < 1e-6);
      CHECK(rel((py.d2 - my.d2) / (2 * h), t.d22) < 1e-6);
      CHECK(rel((py.d1 - my.d1) / (2 * h), t.d12) < 1e-6);
    }
  }
}

TEST_CASE("irregular evaluation with valence 6 equals the box spline") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto [xi, eta] = central_point(rng);
    CHECK(max_diff(eval_irregular(6, xi, eta), box_spline_regular(xi, eta)) < 1e-13);
  }
}

TEST_CASE("irregular evaluation depth independence") {
  for (int n : {3, 5, 8}) {
    const ShapeTable a = eval_irregular(n, 0.3, 0.3, 1);
    for (int depth : {2, 5, 8}) CHECK(max_diff(a, eval_irregular(n, 0.3, 0.3, depth)) == 0.0);
  }
}

TEST_CASE("points outside the evaluable region throw") {
  CHECK_THROWS_AS(box_spline_regular(0.8, 0.5), BasisError);
  CHECK_THROWS_AS(box_spline_regular(-0.1, 0.2), BasisError);
  CHECK_THROWS_AS(eval_irregular(5, 0.1, 0.1), BasisError);
  CHECK_THROWS_AS(eval_irregular(2, 0.3, 0.3), BasisError);
}

TEST_CASE("subdivision oracle agrees at dyadic and barycentric points") {
  for (int n : {3, 5, 6, 7, 11}) {
    const ShapeTable o = oracle::barycentre_table(n);
    CHECK(max_diff(o, library_table(n, 1.0 / 3, 1.0 / 3)) < 1e-10);
  }
  // Away from the barycentre as well: the same quartic fit evaluated at
  // another point of the piece.
  const ControlMesh disk = oracle::valence_disk(5, 5);
  const ShapeTable o = oracle::subdivision_table(disk, 4, 0.3, 0.4, [](double x, double y) {
    return x + y >= 0.5 - 1e-12 && x <= 0.5 + 1e-12 && y <= 0.5 + 1e-12;
  });
  CHECK(max_diff(o, eval_irregular(5, 0.3, 0.4)) < 1e-10);
}

TEST_CASE("golden barycentre tables") {
  std::ifstream in(std::string(TEST_DATA_DIR) + "/golden_tables.txt");
  REQUIRE(in.good());
  std::string line;
  int blocks = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hs(line);
    std::string word;
    int n = 0, slots = 0;
    hs >> word >> n >> slots;
    REQUIRE(word == "valence");
    ShapeTable g = ShapeTable::zero(slots);
    for (int s = 0; s < slots; ++s) {
      REQUIRE(std::getline(in, line));
      std::istringstream ss(line);
      int idx = 0;
      ss >> idx >> g.n[s] >> g.d1[s] >> g.d2[s] >> g.d11[s] >> g.d22[s] >> g.d12[s];
      REQUIRE(idx == s);
    }
    const ShapeTable t = library_table(n, 1.0 / 3, 1.0 / 3);
    REQUIRE(t.size() == slots);
    CAPTURE(n);
    CHECK(max_diff(t, g) < 1e-12);
    ++blocks;
  }
  CHECK(blocks == 10);
}

TEST_CASE("central child matrix rows sum to one") {
  for (int n = 3; n <= 12; ++n) {
    const Eigen::MatrixXd S = central_child_matrix(n);
    CHECK(S.rows() == 12);
    CHECK(S.cols() == n + 6);
    CHECK((S.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("collapse folds ghost slots") {
  ShapeTable t = ShapeTable::zero(3);
  t.n << 0.2, 0.3, 0.5;
  t.d1 << 1, 2, 3;
  PatchExpansion ex;
  ex.real_nodes = {10, 11};
  ex.weights.resize(3, 2);
  ex.weights << 1, 0, 0, 1, 1, 1;  // slot 2 is a ghost equal to node 10 + node 11
  const ShapeTable c = collapse(t, ex);
  CHECK(c.size() == 2);
  CHECK(c.n[0] == doctest::Approx(0.7));
  CHECK(c.n[1] == doctest::Approx(0.8));
  CHECK(c.d1[0] == doctest::Approx(4));
  CHECK(c.d1[1] == doctest::Approx(5));
}
