#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <Eigen/SparseCholesky>

#include "orthoshell/solver.hpp"

namespace orthoshell {

Eigen::VectorXd DofMap::restrict(const Eigen::VectorXd& full) const {
  Eigen::VectorXd r(free_count());
  for (Eigen::Index i = 0; i < free_count(); ++i) r[i] = full[free_dofs[i]];
  return r;
}

void DofMap::scatter_add(const Eigen::VectorXd& reduced, Eigen::VectorXd& full) const {
  for (Eigen::Index i = 0; i < free_count(); ++i) full[free_dofs[i]] += reduced[i];
}

DofMap apply_constraints(Eigen::Index ndof, const LoadCase& load) {
  std::map<int, double> fixed;
  for (const auto& p : load.prescribed) {
    if (p.dof < 0 || p.dof >= ndof) throw SolverError("prescribed DOF " + std::to_string(p.dof) + " out of range");
    auto [it, fresh] = fixed.emplace(p.dof, p.value);
    if (!fresh && it->second != p.value)
      throw SolverError("conflicting prescriptions for DOF " + std::to_string(p.dof));
  }
  for (const auto& l : load.loads) {
    if (l.node < 0 || 3 * l.node >= ndof) throw SolverError("load node " + std::to_string(l.node) + " out of range");
    for (int c = 0; c < 3; ++c) {
      if (l.force[c] != 0 && fixed.count(3 * l.node + c))
        throw SolverError("DOF " + std::to_string(3 * l.node + c) + " is both loaded and prescribed");
    }
  }
  DofMap map;
  map.free_index.assign(static_cast<std::size_t>(ndof), -1);
  for (int d = 0; d < ndof; ++d) {
    if (fixed.count(d)) continue;
    map.free_index[d] = static_cast<int>(map.free_dofs.size());
    map.free_dofs.push_back(d);
  }
  return map;
}

Eigen::VectorXd load_vector(Eigen::Index ndof, const std::vector<PointLoad>& loads) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(ndof);
  for (const auto& l : loads) f.segment<3>(3 * l.node) += l.force;
  return f;
}

SolverState SolverState::zero(Eigen::Index ndof) {
  SolverState s;
  s.u = s.v = s.a = s.f_ext = Eigen::VectorXd::Zero(ndof);
  return s;
}

Eigen::VectorXd reactions(const MechanicalSystem& system, const Eigen::VectorXd& u, const Eigen::VectorXd& f_ext) {
  Eigen::VectorXd f;
  system.internal(u, &f);
  return f - f_ext;
}

double kinetic_energy(const MechanicalSystem& system, const Eigen::VectorXd& v) {
  return 0.5 * (system.lumped_mass().array() * v.array().square()).sum();
}

namespace {

using Ldlt = Eigen::SimplicialLDLT<SparseMatrix>;

int negative_pivots(const Ldlt& f) { return static_cast<int>((f.vectorD().array() < 0).count()); }

bool good(const Ldlt& f) {
  return f.info() == Eigen::Success && f.vectorD().allFinite() && (f.vectorD().array() != 0).all();
}

void add_diagonal(SparseMatrix& k, double mu) {
  for (Eigen::Index i = 0; i < k.rows(); ++i) k.coeffRef(i, i) += mu;
}

// Potential energy, or +inf when the state is not admissible.
double potential(const MechanicalSystem& system, const Eigen::VectorXd& u, const Eigen::VectorXd& f_ext) {
  try {
    return system.internal(u, nullptr) - f_ext.dot(u);
  } catch (const StepRejected&) {
    return std::numeric_limits<double>::infinity();
  }
}

// Eigenvector of the most negative eigenvalue of K by inverse iteration with
// the positive definite factorization of K + mu I.
Eigen::VectorXd lowest_mode(const Ldlt& shifted, const SparseMatrix& k, double* lambda) {
  const Eigen::Index n = k.rows();
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  v.normalize();
  for (int it = 0; it < 60; ++it) {
    Eigen::VectorXd w = shifted.solve(v);
    const double nw = w.norm();
    if (!(nw > 0) || !std::isfinite(nw)) break;
    w /= nw;
    const bool settled = (w - v).norm() < 1e-10 || (w + v).norm() < 1e-10;
    v = w;
    if (settled) break;
  }
  *lambda = v.dot(k * v);
  return v;
}

}  // namespace

NewtonResult equilibrate(const MechanicalSystem& system, const DofMap& map, const Eigen::VectorXd& f_ext,
                         Eigen::VectorXd& u, const StaticOptions& opt) {
  NewtonResult res;
  const double abs_tol = opt.tol_abs * system.force_scale();
  double first_residual = -1;
  Eigen::VectorXd f;
  for (int it = 0;; ++it) {
    double phi;
    try {
      phi = system.internal(u, &f);
    } catch (const StepRejected& e) {
      res.message = e.what();
      return res;
    }
    const Eigen::VectorXd r = map.restrict(f - f_ext);
    const double rn = r.norm();
    const double tol = opt.tol_rel * std::max(f_ext.norm(), f.norm()) + abs_tol;
    res.iterations = it;
    res.residual = rn;
    res.energy = phi - f_ext.dot(u);
    if (!std::isfinite(rn)) {
      res.message = "non-finite residual";
      return res;
    }
    if (map.free_count() == 0) {
      res.converged = true;
      return res;
    }
    if (first_residual < 0) first_residual = rn;
    if (rn > 1e10 * (first_residual + tol)) {
      res.message = "residual diverged";
      return res;
    }

    SparseMatrix k;
    try {
      k = system.tangent(u, map);
    } catch (const StepRejected& e) {
      res.message = e.what();
      return res;
    }
    Ldlt ldlt(k);
    const bool factored = good(ldlt);
    res.negative_pivots = factored ? negative_pivots(ldlt) : -1;

    if (rn <= tol && (!opt.minimize_energy || res.negative_pivots == 0)) {
      res.converged = true;
      return res;
    }
    if (it >= opt.max_iterations) {
      res.message = "no convergence after " + std::to_string(it) + " iterations";
      return res;
    }

    if (!opt.minimize_energy) {
      if (!factored) {
        res.message = "singular tangent";
        return res;
      }
      const Eigen::VectorXd du = ldlt.solve(-r);
      if (!du.allFinite()) {
        res.message = "non-finite Newton step";
        return res;
      }
      for (Eigen::Index i = 0; i < du.size(); ++i) u[map.free_dofs[i]] += du[i];
      continue;
    }

    // Energy-minimising variant: shift until positive definite.
    Eigen::VectorXd d;
    double lambda = 0;
    Eigen::VectorXd mode;
    if (factored && res.negative_pivots == 0) {
      d = ldlt.solve(-r);
    } else {
      double diag = 0;
      for (Eigen::Index i = 0; i < k.rows(); ++i) diag += std::abs(k.coeff(i, i));
      diag /= static_cast<double>(k.rows());
      double mu = 1e-6 * diag;
      Ldlt shifted;
      bool ok = false;
      for (int t = 0; t < 30 && !ok; ++t, mu *= 4) {
        SparseMatrix ks = k;
        add_diagonal(ks, mu);
        shifted.compute(ks);
        ok = good(shifted) && negative_pivots(shifted) == 0;
      }
      if (!ok) {
        res.message = "could not regularise the tangent";
        return res;
      }
      d = shifted.solve(-r);
      mode = lowest_mode(shifted, k, &lambda);
      if (lambda < 0) {
        // Move along the unstable mode downhill, scaled to the element size.
        if (mode.dot(r) > 0) mode = -mode;
        d += 0.01 * system.length_scale() * mode / mode.cwiseAbs().maxCoeff();
      }
    }
    const double slope = r.dot(d);
    const double pi0 = res.energy;
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial = u;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      trial = u;
      for (Eigen::Index i = 0; i < d.size(); ++i) trial[map.free_dofs[i]] += t * d[i];
      const double pi = potential(system, trial, f_ext);
      const double allowance = 1e-4 * t * std::min(slope, 0.0) + 1e-12 * std::abs(pi0);
      if (pi <= pi0 + allowance) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.message = "line search failed";
      return res;
    }
    u = trial;
  }
}

StaticResult static_solve(const MechanicalSystem& system, const LoadCase& load, SolverState& state,
                          const StaticOptions& opt, const StepCallback& callback) {
  const Eigen::Index ndof = system.size();
  if (state.u.size() != ndof) state = SolverState::zero(ndof);
  if (state.f_ext.size() != ndof) state.f_ext = Eigen::VectorXd::Zero(ndof);
  if (opt.steps < 1) throw SolverError("continuation needs at least one step");

  const DofMap map = apply_constraints(ndof, load);
  const Eigen::VectorXd f0 = state.f_ext;
  const Eigen::VectorXd f1 = load_vector(ndof, load.loads);
  std::vector<double> p0;
  for (const auto& p : load.prescribed) p0.push_back(state.u[p.dof]);

  auto apply_prescribed = [&](Eigen::VectorXd& u, double s) {
    for (std::size_t i = 0; i < load.prescribed.size(); ++i)
      u[load.prescribed[i].dof] = p0[i] + s * (load.prescribed[i].value - p0[i]);
  };

  StaticResult out;
  state.s = 0;
  const double nominal = 1.0 / opt.steps;
  const double min_ds = nominal / std::pow(2.0, opt.max_bisections);
  double ds = nominal;
  double s = 0;
  Eigen::VectorXd rate = Eigen::VectorXd::Zero(ndof);  // du/ds of the last increment

  for (int k = 1; k <= opt.steps; ++k) {
    const double target = static_cast<double>(k) / opt.steps;
    StepReport rep;
    rep.step = k;
    NewtonResult last;
    while (s < target - 1e-14) {
      const double step = std::min(ds, target - s);
      Eigen::VectorXd u = state.u;
      for (int d : map.free_dofs) u[d] += step * rate[d];
      apply_prescribed(u, s + step);
      const Eigen::VectorXd f = f0 + (s + step) * (f1 - f0);
      last = equilibrate(system, map, f, u, opt);
      rep.iterations += last.iterations;
      if (last.converged) {
        rate = (u - state.u) / step;
        state.u = u;
        s += step;
        ++rep.substeps;
        ds = std::min(nominal, 2.0 * step);
      } else {
        ds = 0.5 * step;
        rate.setZero();
        if (ds < min_ds) {
          out.message = "step " + std::to_string(k) + " failed at load factor " + std::to_string(s + step) +
                        ": " + last.message;
          state.s = s;
          state.f_ext = f0 + s * (f1 - f0);
          return out;
        }
      }
    }
    s = target;
    state.s = s;
    state.f_ext = f0 + s * (f1 - f0);
    ++state.step;
    rep.s = s;
    rep.residual = last.residual;
    rep.energy = last.energy;
    rep.negative_pivots = last.negative_pivots;
    out.steps.push_back(rep);
    if (callback) {
      const Eigen::VectorXd before = state.u;
      callback(state, rep);
      if (state.u != before) rate.setZero();
    }
  }
  out.completed = true;
  return out;
}

namespace {

struct NewmarkAttempt {
  bool converged = false;
  int iterations = 0;
};

NewmarkAttempt newmark_attempt(const MechanicalSystem& system, const DofMap& map, const LoadCase& at_end,
                               const Eigen::VectorXd& f_ext, SolverState& st, double dt, const NewmarkOptions& o,
                               const Eigen::VectorXd& mass) {
  const double b = o.beta, g = o.gamma;
  Eigen::VectorXd u = st.u;
  for (const auto& p : at_end.prescribed) u[p.dof] = p.value;
  const Eigen::VectorXd base = st.u + dt * st.v + dt * dt * (0.5 - b) * st.a;
  auto accel = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return (x - base) / (b * dt * dt); };
  auto veloc = [&](const Eigen::VectorXd& acc) -> Eigen::VectorXd {
    return st.v + dt * ((1.0 - g) * st.a + g * acc);
  };
  const double abs_tol = o.tol_abs * system.force_scale();
  NewmarkAttempt res;
  Eigen::VectorXd f;
  for (int it = 0; it <= o.max_iterations; ++it) {
    try {
      system.internal(u, &f);
    } catch (const StepRejected&) {
      return res;
    }
    const Eigen::VectorXd acc = accel(u);
    const Eigen::VectorXd vel = veloc(acc);
    const Eigen::VectorXd inertia = mass.cwiseProduct(acc + o.damping * vel);
    const Eigen::VectorXd r = map.restrict(inertia + f - f_ext);
    const double tol = o.tol_rel * std::max({f_ext.norm(), f.norm(), inertia.norm()}) + abs_tol;
    res.iterations = it;
    if (!std::isfinite(r.norm())) return res;
    if (r.norm() <= tol || map.free_count() == 0) {
      st.u = u;
      st.a = acc;
      st.v = vel;
      st.f_ext = f_ext;
      res.converged = true;
      return res;
    }
    if (it == o.max_iterations) return res;
    SparseMatrix k;
    try {
      k = system.tangent(u, map);
    } catch (const StepRejected&) {
      return res;
    }
    const double ci = 1.0 / (b * dt * dt) + o.damping * g / (b * dt);
    for (Eigen::Index i = 0; i < k.rows(); ++i) k.coeffRef(i, i) += ci * mass[map.free_dofs[i]];
    Ldlt ldlt(k);
    if (!good(ldlt)) return res;
    const Eigen::VectorXd du = ldlt.solve(-r);
    for (Eigen::Index i = 0; i < du.size(); ++i) u[map.free_dofs[i]] += du[i];
  }
  return res;
}

}  // namespace

NewmarkResult newmark_step(const MechanicalSystem& system, const LoadCase& at_end, SolverState& state, double dt,
                           const NewmarkOptions& o) {
  if (!(dt > 0)) throw SolverError("time step must be positive");
  const Eigen::Index ndof = system.size();
  if (state.u.size() != ndof) state = SolverState::zero(ndof);
  if (state.f_ext.size() != ndof) state.f_ext = Eigen::VectorXd::Zero(ndof);
  const DofMap map = apply_constraints(ndof, at_end);
  const Eigen::VectorXd mass = system.lumped_mass();
  const Eigen::VectorXd f_end = load_vector(ndof, at_end.loads);
  const double floor = o.min_dt > 0 ? o.min_dt : dt / 1024.0;

  const SolverState start = state;
  NewmarkResult out;
  // Sub-steps of size h until t + dt, halving on failure.
  double done = 0, h = dt;
  while (done < dt - 1e-15 * dt) {
    h = std::min(h, dt - done);
    const double frac = (done + h) / dt;
    LoadCase sub;
    for (const auto& p : at_end.prescribed)
      sub.prescribed.push_back({p.dof, start.u[p.dof] + frac * (p.value - start.u[p.dof])});
    const Eigen::VectorXd f = start.f_ext + frac * (f_end - start.f_ext);
    SolverState trial = state;
    NewmarkAttempt a = newmark_attempt(system, map, sub, f, trial, h, o, mass);
    out.iterations += a.iterations;
    if (a.converged) {
      trial.time = state.time + h;
      state = trial;
      done += h;
      ++out.substeps;
    } else {
      h *= 0.5;
      if (h < floor) {
        state = start;
        return out;
      }
    }
  }
  ++state.step;
  out.converged = true;
  return out;
}

}  // namespace orthoshell
