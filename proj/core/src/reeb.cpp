#include "sympath/reeb.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "sympath/errors.hpp"

namespace sympath {

namespace {

double monomial(const VectorXd& z, const std::vector<int>& e) {
  double v = 1.0;
  for (int i = 0; i < static_cast<int>(e.size()); ++i) {
    for (int k = 0; k < e[i]; ++k) v *= z(i);
  }
  return v;
}

}  // namespace

HypersurfaceModel HypersurfaceModel::ellipsoid(const std::vector<double>& axes) {
  if (axes.empty()) throw DimensionError("ellipsoid: need at least one axis");
  for (double a : axes) {
    if (!(a > 0.0)) throw InvariantError("ellipsoid: axes must be positive");
  }
  HypersurfaceModel m;
  m.n_ = static_cast<int>(axes.size());
  m.family_ = "ellipsoid";
  m.axes_ = axes;
  m.convex_claim_ = true;
  return m;
}

HypersurfaceModel HypersurfaceModel::perturbed_ellipsoid(const std::vector<double>& axes,
                                                         const std::vector<QuarticTerm>& terms) {
  HypersurfaceModel m = ellipsoid(axes);
  m.family_ = "perturbed";
  const int n = m.n_;
  for (const auto& t : terms) {
    if (static_cast<int>(t.exponents.size()) != 2 * n) {
      throw DimensionError("perturbed_ellipsoid: term exponent list must have length 2n");
    }
    int total = 0;
    for (int i = 0; i < 2 * n; ++i) {
      if (t.exponents[i] < 0) throw InvariantError("perturbed_ellipsoid: negative exponent");
      total += t.exponents[i];
      if (i >= n && t.exponents[i] % 2 != 0) {
        throw InvariantError(
            "perturbed_ellipsoid: p-exponents must be even (conjugation invariance)");
      }
    }
    if (total != 4) throw InvariantError("perturbed_ellipsoid: terms must be quartic");
  }
  m.terms_ = terms;
  return m;
}

double HypersurfaceModel::value(const VectorXd& z) const {
  const int n = n_;
  double H = 0.0;
  for (int j = 0; j < n; ++j) {
    H += M_PI * (z(j) * z(j) + z(n + j) * z(n + j)) / axes_[j];
  }
  if (!terms_.empty()) {
    const double r2 = z.squaredNorm();
    for (const auto& t : terms_) H += t.coeff * monomial(z, t.exponents) / r2;
  }
  return H;
}

VectorXd HypersurfaceModel::gradient(const VectorXd& z) const {
  const int n = n_;
  VectorXd g = VectorXd::Zero(2 * n);
  for (int j = 0; j < n; ++j) {
    g(j) = 2.0 * M_PI * z(j) / axes_[j];
    g(n + j) = 2.0 * M_PI * z(n + j) / axes_[j];
  }
  if (!terms_.empty()) {
    const double r2 = z.squaredNorm();
    for (const auto& t : terms_) {
      const double P = monomial(z, t.exponents);
      for (int i = 0; i < 2 * n; ++i) {
        if (t.exponents[i] > 0) {
          auto e = t.exponents;
          --e[i];
          g(i) += t.coeff * t.exponents[i] * monomial(z, e) / r2;
        }
      }
      g += t.coeff * P * (-2.0 / (r2 * r2)) * z;
    }
  }
  return g;
}

MatrixXd HypersurfaceModel::hessian(const VectorXd& z) const {
  const int n = n_;
  MatrixXd H = MatrixXd::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    H(j, j) = 2.0 * M_PI / axes_[j];
    H(n + j, n + j) = 2.0 * M_PI / axes_[j];
  }
  if (!terms_.empty()) {
    const double r2 = z.squaredNorm();
    const double r4 = r2 * r2, r6 = r4 * r2;
    const MatrixXd Id = MatrixXd::Identity(2 * n, 2 * n);
    for (const auto& t : terms_) {
      const double P = monomial(z, t.exponents);
      VectorXd gP = VectorXd::Zero(2 * n);
      MatrixXd hP = MatrixXd::Zero(2 * n, 2 * n);
      for (int i = 0; i < 2 * n; ++i) {
        if (t.exponents[i] == 0) continue;
        auto ei = t.exponents;
        --ei[i];
        gP(i) = t.exponents[i] * monomial(z, ei);
        for (int jj = 0; jj < 2 * n; ++jj) {
          if (jj == i) {
            if (t.exponents[i] >= 2) {
              auto eii = t.exponents;
              eii[i] -= 2;
              hP(i, i) = t.exponents[i] * (t.exponents[i] - 1) * monomial(z, eii);
            }
          } else if (t.exponents[jj] > 0) {
            auto eij = ei;
            --eij[jj];
            hP(i, jj) = t.exponents[i] * t.exponents[jj] * monomial(z, eij);
          }
        }
      }
      const VectorXd gInv = (-2.0 / r4) * z;
      const MatrixXd hInv = (-2.0 / r4) * Id + (8.0 / r6) * z * z.transpose();
      H += t.coeff * (hP / r2 + gP * gInv.transpose() + gInv * gP.transpose() + P * hInv);
    }
  }
  return H;
}

VectorXd HypersurfaceModel::field(const VectorXd& z) const {
  const int n = n_;
  const VectorXd g = gradient(z);
  VectorXd f(2 * n);
  f.head(n) = -g.tail(n);
  f.tail(n) = g.head(n);
  return f;
}

VectorXd HypersurfaceModel::to_surface(const VectorXd& u) const {
  const double h = value(u);
  if (!(h > 0.0)) throw InvariantError("to_surface: H(u) must be positive");
  return u / std::sqrt(h);
}

void HypersurfaceModel::validate(unsigned seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 32; ++trial) {
    VectorXd z(2 * n_);
    for (int i = 0; i < 2 * n_; ++i) z(i) = gauss(rng);
    if (z.norm() < 0.1) continue;
    const double H = value(z);
    if (!(H > 0.0)) {
      throw InvariantError("HypersurfaceModel: H is not positive away from the origin "
                           "(not starshaped)");
    }
    const double r = 0.5 + std::abs(gauss(rng));
    if (std::abs(value(r * z) - r * r * H) > 1e-9 * std::max(1.0, r * r * H)) {
      throw InvariantError("HypersurfaceModel: homogeneity H(rz) = r^2 H(z) fails");
    }
    VectorXd zc = z;
    zc.tail(n_) *= -1.0;
    if (std::abs(value(zc) - H) > 1e-9 * std::max(1.0, H)) {
      throw InvariantError("HypersurfaceModel: conjugation invariance H(Iz) = H(z) fails");
    }
    // Finite-difference spot check of the analytic derivatives.
    const VectorXd g = gradient(z);
    const MatrixXd Hs = hessian(z);
    const double h = 1e-5;
    for (int i = 0; i < std::min(2 * n_, 3); ++i) {
      VectorXd dz = VectorXd::Zero(2 * n_);
      dz(i) = h;
      const double fd = (value(z + dz) - value(z - dz)) / (2 * h);
      if (std::abs(fd - g(i)) > 1e-5 * std::max(1.0, std::abs(g(i)))) {
        throw InvariantError("HypersurfaceModel: gradient disagrees with finite differences");
      }
      const VectorXd fdg = (gradient(z + dz) - gradient(z - dz)) / (2 * h);
      if ((fdg - Hs.col(i)).cwiseAbs().maxCoeff() > 1e-4 * std::max(1.0, Hs.cwiseAbs().maxCoeff())) {
        throw InvariantError("HypersurfaceModel: Hessian disagrees with finite differences");
      }
    }
  }
}

VectorXd Trajectory::at(double t) const {
  if (times.empty()) throw DimensionError("Trajectory: empty");
  const bool forward = times.back() >= times.front();
  if ((forward && t <= times.front()) || (!forward && t >= times.front())) return states.front();
  if ((forward && t >= times.back()) || (!forward && t <= times.back())) return states.back();
  auto cmp = [forward](double a, double b) { return forward ? a < b : a > b; };
  size_t lo = 0, hi = times.size() - 1;
  while (hi - lo > 1) {
    const size_t mid = (lo + hi) / 2;
    if (cmp(times[mid], t)) lo = mid;
    else hi = mid;
  }
  const double s = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - s) * states[lo] + s * states[hi];
}

namespace {

// Dormand-Prince 5(4) adaptive step on a generic vector field.
template <typename Field>
Trajectory integrate_dp45(Field&& f, const VectorXd& z0, double T, const FlowOptions& opts,
                          const std::function<double(const VectorXd&)>& invariant,
                          double invariant_cap) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                      a54 = -212.0 / 729;
  static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                      a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                      b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                      e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double dir = T >= 0 ? 1.0 : -1.0;
  const double Tabs = std::abs(T);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(z0);

  const double inv0 = invariant ? invariant(z0) : 0.0;

  double t = 0.0;
  double h = std::min(opts.initial_step, Tabs);
  VectorXd z = z0;
  VectorXd k1 = f(z);
  int rejected_in_a_row = 0;

  while (t < Tabs - 1e-15 * Tabs) {
    h = std::min(h, Tabs - t);
    const double hd = dir * h;
    const VectorXd k2 = f(z + hd * (a21 * k1));
    const VectorXd k3 = f(z + hd * (a31 * k1 + a32 * k2));
    const VectorXd k4 = f(z + hd * (a41 * k1 + a42 * k2 + a43 * k3));
    const VectorXd k5 = f(z + hd * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const VectorXd k6 = f(z + hd * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const VectorXd z_new = z + hd * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const VectorXd k7 = f(z_new);
    const VectorXd err_v =
        hd * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double scale = opts.abs_tol + opts.rel_tol * std::max(z.norm(), z_new.norm());
    const double err = err_v.norm() / scale;
    (void)c2; (void)c3; (void)c4; (void)c5;

    if (err <= 1.0) {
      t += h;
      z = z_new;
      k1 = k7;  // FSAL
      traj.times.push_back(dir * t);
      traj.states.push_back(z);
      rejected_in_a_row = 0;
    } else if (++rejected_in_a_row > 40) {
      throw StepControlError("reeb_flow: step control failed to converge");
    }
    const double fac = std::clamp(0.9 * std::pow(err > 0 ? err : 1e-10, -0.2), 0.2, 5.0);
    h = std::max(h * fac, Tabs * 1e-14);
    if (traj.times.size() > 4'000'000) {
      throw StepControlError("reeb_flow: step count safety cap exceeded");
    }
  }

  if (invariant) {
    double worst = 0.0;
    double t_worst = 0.0;
    for (size_t i = 0; i < traj.states.size(); ++i) {
      const double d = std::abs(invariant(traj.states[i]) - inv0);
      if (d > worst) {
        worst = d;
        t_worst = traj.times[i];
      }
    }
    traj.energy_drift = worst;
    if (worst > invariant_cap) {
      std::ostringstream os;
      os << "reeb_flow: energy drift " << worst << " at t = " << t_worst << " exceeds "
         << invariant_cap;
      throw StepControlError(os.str());
    }
  }
  return traj;
}

// Fixed-step RK4 on the joint system (z, Phi); returns the endpoint state
// and monodromy. Used by the Newton solver, where only endpoints matter.
void flow_with_monodromy(const HypersurfaceModel& model, const VectorXd& z0, double T, int steps,
                         VectorXd& zT, MatrixXd& PhiT) {
  const int n = model.n();
  const int d = 2 * n;
  const MatrixXd J = standard_J(n);
  VectorXd z = z0;
  MatrixXd Phi = MatrixXd::Identity(d, d);
  const double h = T / steps;

  auto fz = [&](const VectorXd& zz) { return model.field(zz); };
  auto fP = [&](const VectorXd& zz, const MatrixXd& P) -> MatrixXd {
    return J * (model.hessian(zz) * P);
  };

  for (int i = 0; i < steps; ++i) {
    const VectorXd k1 = fz(z);
    const MatrixXd K1 = fP(z, Phi);
    const VectorXd k2 = fz(z + 0.5 * h * k1);
    const MatrixXd K2 = fP(z + 0.5 * h * k1, Phi + 0.5 * h * K1);
    const VectorXd k3 = fz(z + 0.5 * h * k2);
    const MatrixXd K3 = fP(z + 0.5 * h * k2, Phi + 0.5 * h * K2);
    const VectorXd k4 = fz(z + h * k3);
    const MatrixXd K4 = fP(z + h * k3, Phi + h * K3);
    z += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    Phi += (h / 6.0) * (K1 + 2 * K2 + 2 * K3 + K4);
  }
  zT = z;
  PhiT = Phi;
}

}  // namespace

Trajectory reeb_flow(const HypersurfaceModel& model, const VectorXd& z0, double T,
                     const FlowOptions& opts) {
  if (z0.size() != 2 * model.n()) throw DimensionError("reeb_flow: state dimension mismatch");
  const double H0 = model.value(z0);
  if (std::abs(H0 - 1.0) > 1e-6) {
    throw PreconditionError("reeb_flow: start point must lie on Sigma = H^{-1}(1)");
  }
  if (T == 0.0) {
    Trajectory tr;
    tr.times.push_back(0.0);
    tr.states.push_back(z0);
    return tr;
  }
  auto f = [&model](const VectorXd& z) { return model.field(z); };
  auto inv = [&model](const VectorXd& z) { return model.value(z); };
  return integrate_dp45(f, z0, T, opts, inv, opts.max_drift);
}

namespace {

struct NewtonOutcome {
  bool converged = false;
  VectorXd q;
  double T = 0.0;
  double residual = 0.0;
  double jac_sigma_min = 0.0;
};

NewtonOutcome newton_polish(const HypersurfaceModel& model, VectorXd q, double T,
                            const ShootingOptions& opts) {
  const int n = model.n();
  NewtonOutcome out;
  const int steps = 1024;

  auto eval = [&](const VectorXd& qq, double TT, VectorXd& F, MatrixXd& Jac, VectorXd& zT_out) {
    VectorXd z0 = VectorXd::Zero(2 * n);
    z0.head(n) = qq;
    VectorXd zT;
    MatrixXd PhiT;
    flow_with_monodromy(model, z0, TT, steps, zT, PhiT);
    F.resize(n + 1);
    F.head(n) = zT.tail(n);  // p(T)
    F(n) = model.value(z0) - 1.0;
    Jac.resize(n + 1, n + 1);
    Jac.topLeftCorner(n, n) = PhiT.bottomLeftCorner(n, n);
    Jac.block(0, n, n, 1) = model.field(zT).tail(n);
    Jac.block(n, 0, 1, n) = model.gradient(z0).head(n).transpose();
    Jac(n, n) = 0.0;
    zT_out = zT;
  };

  VectorXd F, zT;
  MatrixXd Jac;
  for (int it = 0; it < opts.newton_max_iter; ++it) {
    eval(q, T, F, Jac, zT);
    const double res = F.norm();
    if (res < opts.newton_tol) {
      Eigen::JacobiSVD<MatrixXd> svd(Jac);
      out.converged = true;
      out.q = q;
      out.T = T;
      out.residual = res;
      out.jac_sigma_min = svd.singularValues().minCoeff() /
                          std::max(svd.singularValues().maxCoeff(), 1e-300);
      return out;
    }
    VectorXd delta = Jac.partialPivLu().solve(F);
    if (!delta.allFinite()) break;
    // Damped update with simple backtracking on the residual norm.
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls) {
      const VectorXd q_try = q - alpha * delta.head(n);
      const double T_try = T - alpha * delta(n);
      if (T_try > 1e-4) {
        VectorXd F_try, zT_try;
        MatrixXd J_try;
        eval(q_try, T_try, F_try, J_try, zT_try);
        if (F_try.norm() < (1.0 - 0.25 * alpha) * res) {
          q = q_try;
          T = T_try;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  return out;
}

}  // namespace

ShootingResult find_brake_chords(const HypersurfaceModel& model, const ShootingOptions& opts) {
  model.validate();
  const int n = model.n();
  ShootingResult result;

  const double axis_max = *std::max_element(model.axes().begin(), model.axes().end());
  const double t_max = opts.t_max_factor * axis_max;

  // Seeds: the 2n axis points plus reproducible random directions on the
  // q-sphere {H(q, 0) = 1}.
  std::vector<VectorXd> seeds;
  for (int j = 0; j < n; ++j) {
    for (double sgn : {1.0, -1.0}) {
      VectorXd u = VectorXd::Zero(2 * n);
      u(j) = sgn;
      seeds.push_back(model.to_surface(u).head(n));
    }
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int s = 0; s < opts.sphere_seeds; ++s) {
    VectorXd u = VectorXd::Zero(2 * n);
    for (int j = 0; j < n; ++j) u(j) = gauss(rng);
    if (u.norm() < 1e-3) {
      --s;
      continue;
    }
    seeds.push_back(model.to_surface(u).head(n));
  }

  struct Accepted {
    VectorXd e0, e1;  // brake endpoints
    double T;
  };
  std::vector<Accepted> accepted;
  std::vector<double> degenerate_periods;

  auto same_chord = [&](const Accepted& a, const Accepted& b) {
    if (std::abs(a.T - b.T) > 1e-6 * std::max(1.0, b.T)) return false;
    const double d_direct = std::max((a.e0 - b.e0).norm(), (a.e1 - b.e1).norm());
    const double d_swapped = std::max((a.e0 - b.e1).norm(), (a.e1 - b.e0).norm());
    return std::min(d_direct, d_swapped) < std::max(opts.dedup_distance, 1e-6);
  };

  for (const VectorXd& q_seed : seeds) {
    ++result.seeds_tried;
    VectorXd z0 = VectorXd::Zero(2 * n);
    z0.head(n) = q_seed;

    // Brake-time candidates: interior minima of |p(t)| along the trial
    // trajectory (the start itself has p = 0).
    std::vector<double> t_candidates;
    try {
      FlowOptions fo = opts.flow;
      fo.rel_tol = 1e-10;
      fo.max_drift = 1e-6;
      const Trajectory trial = reeb_flow(model, z0, t_max, fo);
      const int probes = 512;
      std::vector<double> pn(probes);
      for (int i = 0; i < probes; ++i) {
        pn[i] = trial.at(t_max * (i + 1.0) / probes).tail(n).norm();
      }
      for (int i = 1; i + 1 < probes; ++i) {
        const double t = t_max * (i + 1.0) / probes;
        if (t < 0.02 * t_max) continue;
        if (pn[i] < pn[i - 1] && pn[i] < pn[i + 1] && pn[i] < 0.5) {
          t_candidates.push_back(t);
        }
      }
    } catch (const StepControlError&) {
      ++result.seeds_failed;
      continue;
    }
    if (t_candidates.empty()) {
      ++result.seeds_failed;
      continue;
    }

    bool seed_found = false;
    for (double t0 : t_candidates) {
      const NewtonOutcome nres = newton_polish(model, q_seed, t0, opts);
      if (!nres.converged) continue;

      if (nres.jac_sigma_min < 1e-6) {
        // A one-parameter family of chords (fully resonant model); report
        // instead of pretending the solution is isolated.
        bool dup = false;
        for (double Tp : degenerate_periods) {
          if (std::abs(Tp - nres.T) < 1e-6) dup = true;
        }
        if (!dup) {
          degenerate_periods.push_back(nres.T);
          result.degenerate.push_back(DegenerateFamily{nres.q, nres.T, nres.jac_sigma_min});
        }
        seed_found = true;
        continue;
      }

      VectorXd zc = VectorXd::Zero(2 * n);
      zc.head(n) = nres.q;
      Trajectory traj;
      try {
        traj = reeb_flow(model, zc, nres.T, opts.flow);
      } catch (const StepControlError&) {
        continue;
      }

      // Simplicity: no interior brake event. Brake points are transversal
      // zeros of |p|, so grid values near one are only O(spacing); refine
      // each interior local minimum before judging.
      bool simple = true;
      {
        const int probes = 512;
        const double scale = traj.back_state().norm();
        std::vector<double> pn(probes + 1);
        for (int i = 0; i <= probes; ++i) pn[i] = traj.at(nres.T * i / probes).tail(n).norm();
        for (int i = 1; i < probes && simple; ++i) {
          if (pn[i] >= pn[i - 1] || pn[i] >= pn[i + 1] || pn[i] > 0.2 * scale) continue;
          double lo = nres.T * (i - 1) / probes, hi = nres.T * (i + 1) / probes;
          for (int it2 = 0; it2 < 60; ++it2) {
            const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
            if (traj.at(m1).tail(n).norm() < traj.at(m2).tail(n).norm()) hi = m2;
            else lo = m1;
          }
          const double tmin = 0.5 * (lo + hi);
          if (tmin > 0.005 * nres.T && tmin < 0.995 * nres.T &&
              traj.at(tmin).tail(n).norm() < 1e-4 * scale) {
            simple = false;
          }
        }
      }
      if (!simple) continue;

      Accepted acc{zc, traj.back_state(), nres.T};
      acc.e1.tail(n).setZero();  // endpoint lies on {p = 0} within residual
      bool dup = false;
      for (const auto& a : accepted) {
        if (same_chord(acc, a)) dup = true;
      }
      if (!dup) {
        accepted.push_back(acc);
        ReebChord chord;
        chord.q0 = nres.q;
        chord.T = nres.T;
        chord.residual = nres.residual;
        chord.trajectory = std::move(traj);
        chord.simple = true;
        result.chords.push_back(std::move(chord));
      }
      seed_found = true;
    }
    if (!seed_found) ++result.seeds_failed;
  }

  std::sort(result.chords.begin(), result.chords.end(),
            [](const ReebChord& a, const ReebChord& b) { return a.T < b.T; });
  return result;
}

SymplecticPath linearized_flow(const HypersurfaceModel& model, const ReebChord& chord,
                               const FlowOptions& opts) {
  const int n = model.n();
  VectorXd z0 = VectorXd::Zero(2 * n);
  z0.head(n) = chord.q0;
  auto traj = std::make_shared<Trajectory>(reeb_flow(model, z0, chord.T, opts));

  HypersurfaceModel mcopy = model;
  MatrixFn S = [mcopy, traj](double t) { return mcopy.hessian(traj->at(t)); };
  SymplecticPath path = SymplecticPath::from_generator(n, chord.T, std::move(S), 4096);
  const double defect = path.symplecticity_defect();
  if (defect > 1e-8) {
    std::ostringstream os;
    os << "linearized_flow: symplecticity drift " << defect << " exceeds 1e-8";
    throw StepControlError(os.str());
  }
  return path;
}

ChordPath chord_path(const HypersurfaceModel& model, const ReebChord& chord,
                     const FlowOptions& opts) {
  // Ambient linearized flows force the orbit-plane kernel at both L0 and L1.
  return ChordPath::make(linearized_flow(model, chord, opts), 1e-8, 1);
}

ChordIndices chord_indices(const HypersurfaceModel& model, const ReebChord& chord,
                           const MuIndexOptions& opts) {
  const ChordPath c = chord_path(model, chord);
  MuIndexOptions o = opts;
  o.compute_cz = false;
  const IterationReport rep = mu_indices(c, 1, o);

  ChordIndices out;
  out.mu_I = rep.mu_I;
  out.mu_minus_I = rep.mu_minus_I;
  out.spectral_route_used = rep.spectral_route_used;
  out.crossings_regular = !rep.spectral_route_used;

  bool pd = true;
  for (int i = 0; i <= 32; ++i) {
    const MatrixXd Hs = model.hessian(chord.trajectory.at(chord.T * i / 32.0));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Hs);
    if (es.eigenvalues().minCoeff() <= 0.0) pd = false;
  }
  out.hessian_positive = pd;
  return out;
}

std::optional<ChordIndices> chord_indices_reduced(const HypersurfaceModel& model,
                                                  const ReebChord& chord,
                                                  const MuIndexOptions& opts) {
  const int n = model.n();
  if (n < 2) return std::nullopt;

  // The splitting is attempted only when the orbit stays in one coordinate
  // plane; then span{z, X_H} is that plane and the complement is constant.
  int plane = -1;
  for (int j = 0; j < n; ++j) {
    bool in_plane = true;
    for (int i = 0; i <= 32; ++i) {
      const VectorXd z = chord.trajectory.at(chord.T * i / 32.0);
      for (int k = 0; k < 2 * n; ++k) {
        if (k == j || k == n + j) continue;
        if (std::abs(z(k)) > 1e-8) in_plane = false;
      }
    }
    if (in_plane) {
      plane = j;
      break;
    }
  }
  if (plane < 0) return std::nullopt;

  const SymplecticPath amb = linearized_flow(model, chord);

  // Selection matrices: plane coordinates and the rest, each reordered to
  // the standard (q, p) convention of its own half-dimension.
  MatrixXd Ep = MatrixXd::Zero(2 * n, 2);
  Ep(plane, 0) = 1.0;
  Ep(n + plane, 1) = 1.0;
  MatrixXd Er = MatrixXd::Zero(2 * n, 2 * (n - 1));
  {
    int col = 0;
    for (int j = 0; j < n; ++j) {
      if (j == plane) continue;
      Er(j, col) = 1.0;
      Er(n + j, n - 1 + col) = 1.0;
      ++col;
    }
  }

  // Both the flow and its generator must be block-diagonal for the split.
  for (int i = 0; i <= 16; ++i) {
    const double t = chord.T * i / 16.0;
    const MatrixXd P = amb(t);
    const MatrixXd cross = Ep.transpose() * P * Er;
    const MatrixXd crossS = Ep.transpose() * amb.generator(t) * Er;
    if (cross.cwiseAbs().maxCoeff() > 1e-7 || crossS.cwiseAbs().maxCoeff() > 1e-7) {
      return std::nullopt;
    }
  }

  auto subpath = [&](const MatrixXd& E, int msub) {
    auto phi = [amb, E](double t) -> MatrixXd { return E.transpose() * amb(t) * E; };
    MatrixFn S = [amb, E](double t) -> MatrixXd {
      return E.transpose() * amb.generator(t) * E;
    };
    return SymplecticPath(msub, amb.T(), std::move(phi), std::move(S),
                          amb.suggested_samples());
  };
  const SymplecticPath eta = subpath(Ep, 1);
  const SymplecticPath xi = subpath(Er, n - 1);

  ChordIndices out;
  auto index_of = [&](const SymplecticPath& p, int msub, bool lambda1) {
    const LagrangianFrame L =
        lambda1 ? LagrangianFrame::lambda1(msub) : LagrangianFrame::lambda0(msub);
    return rs_index(LagrangianPath::orbit(p, L), L, opts.rs);
  };
  out.mu_I = index_of(eta, 1, false) + index_of(xi, n - 1, false);
  out.mu_minus_I = index_of(eta, 1, true) + index_of(xi, n - 1, true);
  out.crossings_regular = true;
  return out;
}

ConvexityReport dynamical_convexity_check(const HypersurfaceModel& model,
                                          const std::vector<ReebChord>& chords, int ell_max,
                                          const MuIndexOptions& opts) {
  const int n = model.n();
  if (n < 2) throw DimensionError("dynamical_convexity_check: requires n >= 2");
  if (ell_max < 1) throw DimensionError("dynamical_convexity_check: ell_max must be positive");

  ConvexityReport rep;
  rep.verdict = true;
  const HalfInt bound((n + 1));  // (n+1)/2 in twice-units

  int idx = 0;
  for (const auto& chord : chords) {
    ConvexityChordReport cr;
    {
      std::ostringstream os;
      os << "c" << ++idx;
      cr.label = os.str();
    }
    const ChordIndices ci = chord_indices(model, chord, opts);
    cr.mu_I = ci.mu_I;
    cr.mu_minus_I = ci.mu_minus_I;
    cr.bound_ok = (ci.mu_I >= bound) && (ci.mu_minus_I >= bound);

    const ChordPath c = chord_path(model, chord);
    IndexTable table(c, ell_max + 1, opts.rs);
    cr.strict_increase_ok = true;
    for (int l = 1; l <= ell_max + 1; ++l) {
      cr.iterate_mu_I.push_back(table.mu_I(l));
      if (l > 1 && !(table.mu_I(l) > table.mu_I(l - 1))) cr.strict_increase_ok = false;
    }
    if (!cr.bound_ok || !cr.strict_increase_ok) rep.verdict = false;
    rep.chords.push_back(std::move(cr));
  }
  return rep;
}

}  // namespace sympath
