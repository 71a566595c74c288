#pragma once
// Brute-force Loop subdivision oracle, independent of the library's basis
// code. A disk of rings around one vertex of arbitrary valence is subdivided
// globally; limit values at dyadic points of one element come from the
// vertex limit mask, and a least-squares quartic fit over the sampled points
// yields values and derivatives anywhere in a polynomial piece.

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "orthoshell/basis.hpp"
#include "orthoshell/mesh.hpp"

namespace oracle {

using orthoshell::ControlMesh;
using orthoshell::Triangle;
using orthoshell::Vec3;

/// Disk of `rings` rings around a centre vertex of valence n; every other
/// interior vertex has valence 6. Element 0 is (centre, (1,0,0), (1,0,1)).
inline ControlMesh valence_disk(int n, int rings) {
  std::vector<Vec3> nodes{Vec3::Zero()};
  std::map<std::array<int, 3>, int> id;  // (ring, sector, index)
  auto vid = [&](int r, int s, int i) {
    if (r == 0) return 0;
    if (i == r) {
      s = (s + 1) % n;
      i = 0;
    }
    auto key = std::array<int, 3>{r, s, i};
    auto it = id.find(key);
    if (it != id.end()) return it->second;
    const double a0 = 2 * std::numbers::pi * s / n;
    const double a1 = 2 * std::numbers::pi * (s + 1) / n;
    const Vec3 p0(r * std::cos(a0), r * std::sin(a0), 0);
    const Vec3 p1(r * std::cos(a1), r * std::sin(a1), 0);
    nodes.push_back(p0 + (p1 - p0) * (static_cast<double>(i) / r));
    id[key] = static_cast<int>(nodes.size()) - 1;
    return id[key];
  };
  std::vector<Triangle> tris;
  for (int s = 0; s < n; ++s) tris.push_back({0, vid(1, s, 0), vid(1, s, 1)});
  for (int r = 1; r < rings; ++r) {
    for (int s = 0; s < n; ++s) {
      for (int i = 0; i < r; ++i) {
        tris.push_back({vid(r, s, i), vid(r + 1, s, i), vid(r + 1, s, i + 1)});
        tris.push_back({vid(r, s, i), vid(r + 1, s, i + 1), vid(r, s, i + 1)});
      }
      tris.push_back({vid(r, s, r), vid(r + 1, s, r), vid(r + 1, s, r + 1)});
    }
  }
  return ControlMesh(std::move(nodes), std::move(tris));
}

/// Vertex data carried through the subdivision.
struct Level {
  std::vector<Triangle> tris;
  Eigen::MatrixXd values;           // vertex x channel
  std::vector<bool> tagged;         // inside the tracked element
  std::vector<Eigen::Vector3d> bary;  // barycentric coordinates if tagged
};

inline double loop_beta(int n) {
  const double c = 0.375 + 0.25 * std::cos(2 * std::numbers::pi / n);
  return (0.625 - c * c) / n;
}

inline Level subdivide(const Level& in) {
  const int nv = static_cast<int>(in.values.rows());
  std::map<std::pair<int, int>, std::vector<int>> edge_opp;  // sorted edge -> opposite vertices
  std::vector<std::vector<int>> nbr(nv);
  for (const auto& t : in.tris) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3], c = t[(k + 2) % 3];
      edge_opp[{std::min(a, b), std::max(a, b)}].push_back(c);
    }
  }
  std::vector<bool> boundary(nv, false);
  for (const auto& [e, opp] : edge_opp) {
    nbr[e.first].push_back(e.second);
    nbr[e.second].push_back(e.first);
    if (opp.size() == 1) boundary[e.first] = boundary[e.second] = true;
  }
  Level out;
  const int ne = static_cast<int>(edge_opp.size());
  out.values.resize(nv + ne, in.values.cols());
  out.tagged.assign(nv + ne, false);
  out.bary.assign(nv + ne, Eigen::Vector3d::Zero());
  for (int v = 0; v < nv; ++v) {
    const int n = static_cast<int>(nbr[v].size());
    if (boundary[v]) {
      out.values.row(v) = in.values.row(v);
    } else {
      const double b = loop_beta(n);
      Eigen::RowVectorXd acc = (1 - n * b) * in.values.row(v);
      for (int w : nbr[v]) acc += b * in.values.row(w);
      out.values.row(v) = acc;
    }
    out.tagged[v] = in.tagged[v];
    out.bary[v] = in.bary[v];
  }
  std::map<std::pair<int, int>, int> edge_id;
  int next = nv;
  for (const auto& [e, opp] : edge_opp) {
    const int a = e.first, b = e.second;
    if (opp.size() == 2)
      out.values.row(next) = 0.375 * (in.values.row(a) + in.values.row(b)) +
                             0.125 * (in.values.row(opp[0]) + in.values.row(opp[1]));
    else
      out.values.row(next) = 0.5 * (in.values.row(a) + in.values.row(b));
    if (in.tagged[a] && in.tagged[b]) {
      out.tagged[next] = true;
      out.bary[next] = 0.5 * (in.bary[a] + in.bary[b]);
    }
    edge_id[e] = next++;
  }
  auto mid = [&](int a, int b) { return edge_id.at({std::min(a, b), std::max(a, b)}); };
  for (const auto& t : in.tris) {
    const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
    out.tris.push_back({t[0], ab, ca});
    out.tris.push_back({ab, t[1], bc});
    out.tris.push_back({ca, bc, t[2]});
    out.tris.push_back({ab, bc, ca});
  }
  return out;
}

/// Limit values of every interior vertex.
inline Eigen::MatrixXd limit_values(const Level& lv) {
  const int nv = static_cast<int>(lv.values.rows());
  std::vector<std::vector<int>> nbr(nv);
  std::map<std::pair<int, int>, int> count;
  for (const auto& t : lv.tris)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  for (const auto& [e, c] : count) {
    nbr[e.first].push_back(e.second);
    nbr[e.second].push_back(e.first);
  }
  Eigen::MatrixXd out = lv.values;
  for (int v = 0; v < nv; ++v) {
    const int n = static_cast<int>(nbr[v].size());
    const double chi = 1.0 / (3.0 / (8.0 * loop_beta(n)) + n);
    Eigen::RowVectorXd acc = (1 - n * chi) * lv.values.row(v);
    for (int w : nbr[v]) acc += chi * lv.values.row(w);
    out.row(v) = acc;
  }
  return out;
}

/// Quartic monomials xi^a eta^b (a + b <= 4) and their derivatives.
struct Quartic {
  static constexpr int kTerms = 15;
  static std::array<std::array<int, 2>, kTerms> exps() {
    std::array<std::array<int, 2>, kTerms> e{};
    int k = 0;
    for (int d = 0; d <= 4; ++d)
      for (int b = 0; b <= d; ++b) e[k++] = {d - b, b};
    return e;
  }
  /// Row of d^(i+j)/dxi^i deta^j of every monomial at (x, y).
  static Eigen::RowVectorXd row(double x, double y, int i = 0, int j = 0) {
    Eigen::RowVectorXd r(kTerms);
    const auto e = exps();
    for (int k = 0; k < kTerms; ++k) {
      const int a = e[k][0], b = e[k][1];
      if (a < i || b < j) {
        r[k] = 0;
        continue;
      }
      double c = 1;
      for (int q = 0; q < i; ++q) c *= a - q;
      for (int q = 0; q < j; ++q) c *= b - q;
      r[k] = c * std::pow(x, a - i) * std::pow(y, b - j);
    }
    return r;
  }
};

/// Shape table of the patch of element 0 of `mesh` at (xi, eta), computed by
/// `levels` global subdivision steps, limit masks at the dyadic vertices of
/// the region `inside(xi, eta)` and a quartic fit. Slots follow
/// build_one_ring(mesh, 0).
template <class Region>
orthoshell::ShapeTable subdivision_table(const ControlMesh& mesh, int levels, double xi, double eta,
                                         Region inside) {
  const orthoshell::OneRing ring = orthoshell::build_one_ring(mesh, 0);
  const int slots = static_cast<int>(ring.size());
  Level lv;
  lv.tris = mesh.triangles();
  const int nv = static_cast<int>(mesh.node_count());
  lv.values = Eigen::MatrixXd::Zero(nv, slots);
  for (int s = 0; s < slots; ++s) lv.values(ring.nodes[s], s) = 1.0;
  lv.tagged.assign(nv, false);
  lv.bary.assign(nv, Eigen::Vector3d::Zero());
  for (int k = 0; k < 3; ++k) {
    lv.tagged[ring.vertices[k]] = true;
    lv.bary[ring.vertices[k]] = Eigen::Vector3d::Unit(k);
  }
  for (int l = 0; l < levels; ++l) lv = subdivide(lv);
  const Eigen::MatrixXd lim = limit_values(lv);

  std::vector<int> pts;
  for (int v = 0; v < static_cast<int>(lv.tagged.size()); ++v)
    if (lv.tagged[v] && inside(lv.bary[v][1], lv.bary[v][2])) pts.push_back(v);
  Eigen::MatrixXd A(pts.size(), Quartic::kTerms);
  Eigen::MatrixXd B(pts.size(), slots);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    A.row(k) = Quartic::row(lv.bary[pts[k]][1], lv.bary[pts[k]][2]);
    B.row(k) = lim.row(pts[k]);
  }
  const Eigen::MatrixXd coef = A.colPivHouseholderQr().solve(B);  // terms x slots
  orthoshell::ShapeTable t = orthoshell::ShapeTable::zero(slots);
  t.n = (Quartic::row(xi, eta) * coef).transpose();
  t.d1 = (Quartic::row(xi, eta, 1, 0) * coef).transpose();
  t.d2 = (Quartic::row(xi, eta, 0, 1) * coef).transpose();
  t.d11 = (Quartic::row(xi, eta, 2, 0) * coef).transpose();
  t.d22 = (Quartic::row(xi, eta, 0, 2) * coef).transpose();
  t.d12 = (Quartic::row(xi, eta, 1, 1) * coef).transpose();
  return t;
}

/// Barycentre table of a valence-n patch: the whole element for n = 6, the
/// central child triangle otherwise.
inline orthoshell::ShapeTable barycentre_table(int n, int levels = 4) {
  const ControlMesh mesh = valence_disk(n, 5);
  const double tol = 1e-12;
  if (n == 6)
    return subdivision_table(mesh, levels, 1.0 / 3, 1.0 / 3, [](double, double) { return true; });
  return subdivision_table(mesh, levels, 1.0 / 3, 1.0 / 3, [tol](double x, double y) {
    return x + y >= 0.5 - tol && x <= 0.5 + tol && y <= 0.5 + tol;
  });
}

}  // namespace oracle
