#include "sympath/paths.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "sympath/errors.hpp"

namespace sympath {

MatrixXd orthonormalized(const MatrixXd& F) {
  Eigen::HouseholderQR<MatrixXd> qr(F);
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(F.rows(), F.cols());
  // Fix column signs so the map F -> Q is continuous along smooth paths.
  const MatrixXd R = qr.matrixQR().topRows(F.cols());
  for (int j = 0; j < F.cols(); ++j) {
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  }
  return Q;
}

SymplecticPath::SymplecticPath(int m, double T, MatrixFn phi, std::optional<MatrixFn> S,
                               int suggested_samples)
    : m_(m), T_(T), phi_(std::move(phi)), S_(std::move(S)), samples_(suggested_samples) {
  if (m_ <= 0 || T_ <= 0.0) throw DimensionError("SymplecticPath: need m > 0 and T > 0");
}

namespace {

// One RK4 step for Phi' = J0 S(t) Phi.
MatrixXd rk4_step(const MatrixXd& J, const MatrixFn& S, const MatrixXd& Phi, double t, double h) {
  const MatrixXd k1 = J * (S(t) * Phi);
  const MatrixXd k2 = J * (S(t + 0.5 * h) * (Phi + 0.5 * h * k1));
  const MatrixXd k3 = J * (S(t + 0.5 * h) * (Phi + 0.5 * h * k2));
  const MatrixXd k4 = J * (S(t + h) * (Phi + h * k3));
  return Phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

SymplecticPath SymplecticPath::from_generator(int m, double T, MatrixFn S, int steps) {
  if (steps < 16) throw DimensionError("from_generator: need at least 16 steps");
  const MatrixXd J = standard_J(m);
  auto checkpoints = std::make_shared<std::vector<MatrixXd>>();
  checkpoints->reserve(steps + 1);
  const double h = T / steps;
  MatrixXd Phi = MatrixXd::Identity(2 * m, 2 * m);
  checkpoints->push_back(Phi);
  for (int i = 0; i < steps; ++i) {
    Phi = rk4_step(J, S, Phi, i * h, h);
    checkpoints->push_back(Phi);
  }

  MatrixFn Scopy = S;
  MatrixFn eval = [m, T, h, steps, J, Scopy, checkpoints](double t) -> MatrixXd {
    t = std::clamp(t, 0.0, T);
    const int i = std::min(static_cast<int>(std::floor(t / h)), steps - 1);
    double tc = i * h;
    MatrixXd P = (*checkpoints)[i];
    const double rem = t - tc;
    if (rem > 1e-15 * T) {
      // Split the remainder into a few substeps of comparable size to h.
      const int sub = std::max(1, static_cast<int>(std::ceil(rem / h * 2.0)));
      const double hs = rem / sub;
      for (int k = 0; k < sub; ++k) {
        P = rk4_step(J, Scopy, P, tc, hs);
        tc += hs;
      }
    }
    return P;
  };
  return SymplecticPath(m, T, std::move(eval), std::move(S), std::max(128, steps / 8));
}

MatrixXd SymplecticPath::generator(double t) const {
  if (!S_) throw InvariantError("SymplecticPath: no generator attached");
  return (*S_)(t);
}

double SymplecticPath::symplecticity_defect(int probes) const {
  const MatrixXd J = standard_J(m_);
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const double t = T_ * i / (probes - 1);
    const MatrixXd P = phi_(t);
    worst = std::max(worst, (P.transpose() * J * P - J).cwiseAbs().maxCoeff());
  }
  return worst;
}

LagrangianPath::LagrangianPath(int m, double t0, double t1, std::function<MatrixXd(double)> frame,
                               std::optional<MatrixFn> S, int suggested_samples)
    : m_(m), t0_(t0), t1_(t1), frame_(std::move(frame)), S_(std::move(S)),
      samples_(suggested_samples) {
  if (!(t1_ > t0_)) throw DimensionError("LagrangianPath: need t1 > t0");
}

LagrangianPath LagrangianPath::orbit(const SymplecticPath& phi, const LagrangianFrame& F0) {
  if (phi.m() != F0.m()) throw DimensionError("orbit: dimension mismatch");
  const MatrixXd F = F0.matrix();
  auto frame = [phi, F](double t) { return orthonormalized(phi(t) * F); };
  std::optional<MatrixFn> S;
  if (phi.has_generator()) {
    S = [phi](double t) { return phi.generator(t); };
  }
  return LagrangianPath(phi.m(), 0.0, phi.T(), std::move(frame), std::move(S),
                        phi.suggested_samples());
}

LagrangianPath LagrangianPath::from_samples(int m, const std::vector<double>& times,
                                            const std::vector<MatrixXd>& frames) {
  if (times.size() != frames.size() || times.size() < 2) {
    throw DimensionError("from_samples: need matching times/frames, at least two");
  }
  for (size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InvariantError("from_samples: times must be strictly increasing");
    }
  }
  auto ts = std::make_shared<std::vector<double>>(times);
  auto fs = std::make_shared<std::vector<MatrixXd>>();
  fs->reserve(frames.size());
  for (const auto& F : frames) fs->push_back(orthonormalized(F));

  auto frame = [ts, fs](double t) -> MatrixXd {
    const auto& T = *ts;
    if (t <= T.front()) return fs->front();
    if (t >= T.back()) return fs->back();
    const auto it = std::upper_bound(T.begin(), T.end(), t);
    const size_t i = static_cast<size_t>(it - T.begin()) - 1;
    const double s = (t - T[i]) / (T[i + 1] - T[i]);
    // Align the next frame's gauge (column mixing) to the current one via
    // the polar factor, then blend and project back to the frame manifold.
    // Adjacent frames must overlap (dense sampling) for this to be smooth.
    const MatrixXd M = (*fs)[i + 1].transpose() * (*fs)[i];
    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const MatrixXd O = svd.matrixU() * svd.matrixV().transpose();
    const MatrixXd B = (1.0 - s) * (*fs)[i] + s * ((*fs)[i + 1] * O);
    return orthonormalized(B);
  };
  return LagrangianPath(m, times.front(), times.back(), std::move(frame), std::nullopt,
                        static_cast<int>(times.size()));
}

LagrangianFrame LagrangianPath::frame(double t) const {
  return LagrangianFrame::from_columns(frame_(std::clamp(t, t0_, t1_)));
}

MatrixXd LagrangianPath::frame_matrix(double t) const {
  return frame_(std::clamp(t, t0_, t1_));
}

MatrixXd LagrangianPath::generator(double t) const {
  if (!S_) throw InvariantError("LagrangianPath: no generator attached");
  return (*S_)(t);
}

LagrangianPath LagrangianPath::restricted(double a, double b) const {
  if (!(t0_ <= a && a < b && b <= t1_ + 1e-12)) {
    throw DimensionError("restricted: subinterval out of range");
  }
  return LagrangianPath(m_, a, b, frame_, S_, samples_);
}

LagrangianPath LagrangianPath::reversed() const {
  const double a = t0_, b = t1_;
  auto f = frame_;
  auto frame = [f, a, b](double t) { return f(b + a - t); };
  return LagrangianPath(m_, a, b, std::move(frame), std::nullopt, samples_);
}

MatrixXd direct_sum_shuffle(int ma, int mb) {
  const int m = ma + mb;
  MatrixXd T = MatrixXd::Zero(2 * m, 2 * m);
  // input coordinates: (q_a, p_a, q_b, p_b); output: (q_a, q_b, p_a, p_b)
  for (int i = 0; i < ma; ++i) {
    T(i, i) = 1.0;           // q_a
    T(m + i, ma + i) = 1.0;  // p_a
  }
  for (int i = 0; i < mb; ++i) {
    T(ma + i, 2 * ma + i) = 1.0;          // q_b
    T(m + ma + i, 2 * ma + mb + i) = 1.0; // p_b
  }
  return T;
}

LagrangianPath direct_sum(const LagrangianPath& a, const LagrangianPath& b) {
  if (std::abs(a.t0() - b.t0()) > 1e-12 || std::abs(a.t1() - b.t1()) > 1e-12) {
    throw DimensionError("direct_sum: time intervals differ");
  }
  const int ma = a.m(), mb = b.m(), m = ma + mb;
  const MatrixXd T = direct_sum_shuffle(ma, mb);

  auto frame = [a, b, T, ma, mb, m](double t) -> MatrixXd {
    const MatrixXd Fa = a.frame(t).matrix();
    const MatrixXd Fb = b.frame(t).matrix();
    MatrixXd stacked = MatrixXd::Zero(2 * m, m);
    stacked.block(0, 0, 2 * ma, ma) = Fa;
    stacked.block(2 * ma, ma, 2 * mb, mb) = Fb;
    return orthonormalized(T * stacked);
  };

  std::optional<MatrixFn> S;
  if (a.has_generator() && b.has_generator()) {
    S = [a, b, T, ma, mb, m](double t) -> MatrixXd {
      MatrixXd Sd = MatrixXd::Zero(2 * m, 2 * m);
      Sd.topLeftCorner(2 * ma, 2 * ma) = a.generator(t);
      Sd.bottomRightCorner(2 * mb, 2 * mb) = b.generator(t);
      return T * Sd * T.transpose();
    };
  }
  return LagrangianPath(m, a.t0(), a.t1(), std::move(frame), std::move(S),
                        std::max(a.suggested_samples(), b.suggested_samples()));
}

}  // namespace sympath
