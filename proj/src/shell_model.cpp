#include <algorithm>
#include <cmath>
#include <thread>

#include "orthoshell/solver.hpp"

namespace orthoshell {

ElementRecord setup_element(const ControlMesh& mesh, int element, const Material& material, bool align) {
  const OneRing ring = build_one_ring(mesh, element);
  const QuadraturePoint qp = quadrature_rule();
  const PatchExpansion ex = expand(ring);

  ElementRecord rec;
  rec.id = element;
  rec.nodes = ex.real_nodes;
  rec.table = collapse(patch_table(ring, qp.xi, qp.eta), ex);
  rec.weight = qp.weight;
  rec.ghosts = !ring.ghosts.empty();
  const NodeMatrix x = gather(rec.nodes, mesh.nodes());
  if (align) {
    TransformRecord tr = setup_element_orthotropy(rec.table, x, material.d, element);
    rec.table = std::move(tr.table);
    rec.theta = tr.theta;
    rec.T = tr.T;
    rec.aligned = true;
  }
  try {
    rec.ref = surface_geometry(rec.table, x);
  } catch (const KinematicsError& e) {
    throw KinematicsError("element " + std::to_string(element) + ": " + e.what());
  }
  rec.area = rec.ref.jacobian * rec.weight;
  rec.C = constitutive_tensor(material, rec.ref);
  return rec;
}

double element_internal(const ElementRecord& rec, const NodeMatrix& x, double h, Eigen::VectorXd* force,
                        EnergyDensity* density, StrainState* strain) {
  SurfaceGeometry g;
  try {
    g = surface_geometry(rec.table, x);
  } catch (const KinematicsError& e) {
    throw StepRejected("element " + std::to_string(rec.id) + ": " + e.what());
  }
  const StrainState s = strains(rec.ref, g);
  const EnergyDensity w = energy_density(s, rec.C, h);
  if (density) *density = w;
  if (strain) *strain = s;
  if (force) {
    const StressResultants r = stress_resultants(s, rec.C, h);
    const Mat2& n = r.membrane;
    const Mat2& m = r.bending;
    // Variation of b_ab = a3 . a_a,b through the normal:
    // sum m^ab a3 . d(a_a,b) + g . (d(a1) x a2 + a1 x d(a2)), g = P sum m^ab a_a,b / J.
    const Vec3 mv = m(0, 0) * g.a11 + 2.0 * m(0, 1) * g.a12 + m(1, 1) * g.a22;
    const Vec3 gv = (mv - g.a3.dot(mv) * g.a3) / g.jacobian;
    const Vec3 c1 = g.a2.cross(gv);
    const Vec3 c2 = gv.cross(g.a1);
    const Vec3 na1 = n(0, 0) * g.a1 + n(0, 1) * g.a2;
    const Vec3 na2 = n(1, 0) * g.a1 + n(1, 1) * g.a2;
    const auto& t = rec.table;
    force->resize(3 * x.cols());
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const double mn = m(0, 0) * t.d11[i] + 2.0 * m(0, 1) * t.d12[i] + m(1, 1) * t.d22[i];
      Vec3 fi = t.d1[i] * na1 + t.d2[i] * na2 - (mn * g.a3 + t.d1[i] * c1 + t.d2[i] * c2);
      force->segment<3>(3 * i) = rec.area * fi;
    }
  }
  return rec.area * w.total();
}

struct ShellModel::Pattern {
  std::vector<int> free_index;
  SparseMatrix matrix;
  std::vector<std::vector<int>> offsets;  // per element, local (row * n + col) -> value slot or -1
};

ShellModel::ShellModel(ControlMesh mesh, Material material, ModelOptions options)
    : mesh_(std::move(mesh)), material_(std::move(material)), options_(options) {
  material_.validate();
  bool align = false;
  switch (options_.alignment) {
    case Alignment::Auto:
      align = material_.needs_alignment();
      break;
    case Alignment::Always:
      align = true;
      break;
    case Alignment::Never:
      if (material_.needs_alignment())
        throw MaterialError("constitutive mode '" + to_string(material_.mode) + "' needs the aligned basis");
      break;
  }
  const int ne = static_cast<int>(mesh_.triangle_count());
  elements_.resize(ne);
  for (int e = 0; e < ne; ++e) elements_[e] = setup_element(mesh_, e, material_, align);

  double lsum = 0;
  for (const auto& rec : elements_) lsum += std::sqrt(2.0 * rec.area);
  length_scale_ = lsum / ne;
  force_scale_ = std::max(material_.E1, material_.E2) * material_.h * length_scale_;
}

template <class F>
void ShellModel::for_elements(F&& f) const {
  const int ne = static_cast<int>(elements_.size());
  const int nt = std::clamp(options_.threads, 1, std::max(1, ne));
  if (nt == 1) {
    for (int e = 0; e < ne; ++e) f(e);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(nt);
  for (int t = 0; t < nt; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (int e = t; e < ne; e += nt) f(e);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

double ShellModel::internal(const Eigen::VectorXd& u, Eigen::VectorXd* force) const {
  const int ne = static_cast<int>(elements_.size());
  std::vector<double> energy(ne);
  std::vector<Eigen::VectorXd> fe(force ? ne : 0);
  for_elements([&](int e) {
    const auto& rec = elements_[e];
    energy[e] = element_internal(rec, gather(rec.nodes, mesh_.nodes(), &u), material_.h, force ? &fe[e] : nullptr);
  });
  // Fixed-order reduction keeps results independent of the thread count.
  double total = 0;
  for (double w : energy) total += w;
  if (force) {
    force->setZero(size());
    for (int e = 0; e < ne; ++e) {
      const auto& nodes = elements_[e].nodes;
      for (std::size_t i = 0; i < nodes.size(); ++i) force->segment<3>(3 * nodes[i]) += fe[e].segment<3>(3 * i);
    }
  }
  return total;
}

Eigen::MatrixXd ShellModel::element_tangent(const ElementRecord& rec, const Eigen::VectorXd& u) const {
  NodeMatrix x = gather(rec.nodes, mesh_.nodes(), &u);
  const Eigen::Index n = 3 * x.cols();
  const double eps = 1e-7 * std::sqrt(2.0 * rec.area);
  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd fp, fm;
  for (Eigen::Index j = 0; j < n; ++j) {
    double& xj = x(j % 3, j / 3);
    const double keep = xj;
    xj = keep + eps;
    element_internal(rec, x, material_.h, &fp);
    xj = keep - eps;
    element_internal(rec, x, material_.h, &fm);
    xj = keep;
    k.col(j) = (fp - fm) / (2.0 * eps);
  }
  return 0.5 * (k + k.transpose());
}

const ShellModel::Pattern& ShellModel::pattern(const DofMap& map) const {
  std::lock_guard<std::mutex> lock(pattern_mutex_);
  for (const auto& p : patterns_) {
    if (p->free_index == map.free_index) return *p;
  }
  auto p = std::make_shared<Pattern>();
  p->free_index = map.free_index;
  const Eigen::Index nf = map.free_count();
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& rec : elements_) {
    for (int a : rec.nodes)
      for (int b : rec.nodes)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            int r = map.free_index[3 * a + i], c = map.free_index[3 * b + j];
            if (r >= 0 && c >= 0) trip.emplace_back(r, c, 0.0);
          }
  }
  p->matrix.resize(nf, nf);
  p->matrix.setFromTriplets(trip.begin(), trip.end());
  p->matrix.makeCompressed();
  const double* base = p->matrix.valuePtr();
  p->offsets.resize(elements_.size());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const auto& nodes = elements_[e].nodes;
    const int n = static_cast<int>(3 * nodes.size());
    auto& off = p->offsets[e];
    off.assign(static_cast<std::size_t>(n) * n, -1);
    for (int li = 0; li < n; ++li) {
      int r = map.free_index[3 * nodes[li / 3] + li % 3];
      if (r < 0) continue;
      for (int lj = 0; lj < n; ++lj) {
        int c = map.free_index[3 * nodes[lj / 3] + lj % 3];
        if (c < 0) continue;
        off[static_cast<std::size_t>(li) * n + lj] = static_cast<int>(&p->matrix.coeffRef(r, c) - base);
      }
    }
  }
  patterns_.push_back(p);
  return *patterns_.back();
}

SparseMatrix ShellModel::tangent(const Eigen::VectorXd& u, const DofMap& map) const {
  const Pattern& p = pattern(map);
  const int ne = static_cast<int>(elements_.size());
  std::vector<Eigen::MatrixXd> ke(ne);
  for_elements([&](int e) { ke[e] = element_tangent(elements_[e], u); });
  SparseMatrix k = p.matrix;
  double* val = k.valuePtr();
  std::fill(val, val + k.nonZeros(), 0.0);
  for (int e = 0; e < ne; ++e) {
    const auto& off = p.offsets[e];
    const Eigen::Index n = ke[e].rows();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        int o = off[static_cast<std::size_t>(i * n + j)];
        if (o >= 0) val[o] += ke[e](i, j);
      }
  }
  return k;
}

Eigen::VectorXd ShellModel::lumped_mass() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(size());
  const double rh = material_.rho * material_.h;
  for (const auto& rec : elements_) {
    // Row sums of the consistent matrix: sum_J N_I N_J = N_I.
    for (std::size_t i = 0; i < rec.nodes.size(); ++i) {
      const double mi = rh * rec.area * rec.table.n[static_cast<Eigen::Index>(i)];
      for (int c = 0; c < 3; ++c) m[3 * rec.nodes[i] + c] += mi;
    }
  }
  return m;
}

std::vector<EnergyDensity> ShellModel::energy_densities(const Eigen::VectorXd& u) const {
  std::vector<EnergyDensity> out(elements_.size());
  for_elements([&](int e) {
    const auto& rec = elements_[e];
    element_internal(rec, gather(rec.nodes, mesh_.nodes(), &u), material_.h, nullptr, &out[e]);
  });
  return out;
}

EnergyDensity ShellModel::energy_split(const Eigen::VectorXd& u) const {
  const auto dens = energy_densities(u);
  EnergyDensity total;
  for (std::size_t e = 0; e < dens.size(); ++e) {
    total.membrane += dens[e].membrane * elements_[e].area;
    total.bending += dens[e].bending * elements_[e].area;
  }
  return total;
}

double ShellModel::reference_area() const {
  double a = 0;
  for (const auto& rec : elements_) a += rec.area;
  return a;
}

}  // namespace orthoshell
