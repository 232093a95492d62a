#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sympath/symplin.hpp"

namespace sympath {

using MatrixFn = std::function<MatrixXd(double)>;

/// A path of symplectic matrices on [0, T], evaluable at arbitrary times.
/// An optional generator S(t) (symmetric, with Phi' = J0 S Phi) enables
/// exact crossing forms downstream.
class SymplecticPath {
 public:
  SymplecticPath() = default;
  SymplecticPath(int m, double T, MatrixFn phi, std::optional<MatrixFn> S = std::nullopt,
                 int suggested_samples = 128);

  /// Integrates Phi' = J0 S(t) Phi, Phi(0) = Id with classical RK4 on a
  /// fixed grid of `steps` substeps; evaluation between checkpoints
  /// re-integrates from the nearest one.
  static SymplecticPath from_generator(int m, double T, MatrixFn S, int steps = 2048);

  int m() const { return m_; }
  double T() const { return T_; }
  int suggested_samples() const { return samples_; }
  bool has_generator() const { return S_.has_value(); }

  MatrixXd operator()(double t) const { return phi_(t); }
  MatrixXd generator(double t) const;

  /// Max symplecticity defect over a probe grid.
  double symplecticity_defect(int probes = 33) const;

 private:
  int m_ = 0;
  double T_ = 0.0;
  MatrixFn phi_;
  std::optional<MatrixFn> S_;
  int samples_ = 128;
};

/// A path of Lagrangian subspaces on [t0, t1], evaluated as orthonormal
/// frames. The optional generator is the ambient S(t) of a symplectic flow
/// carrying the path, Lambda(t) = Phi_S(t) Lambda(t0-frame).
class LagrangianPath {
 public:
  LagrangianPath() = default;
  LagrangianPath(int m, double t0, double t1, std::function<MatrixXd(double)> frame,
                 std::optional<MatrixFn> S = std::nullopt, int suggested_samples = 128);

  /// Orbit of a frame under a symplectic path: t -> Phi(t) F0.
  static LagrangianPath orbit(const SymplecticPath& phi, const LagrangianFrame& F0);

  /// Piecewise-interpolated path through sampled frames (strictly
  /// increasing times). Interpolation orthonormalizes the linear blend of
  /// consecutive frames; sampling must be dense enough for the intended use.
  static LagrangianPath from_samples(int m, const std::vector<double>& times,
                                     const std::vector<MatrixXd>& frames);

  int m() const { return m_; }
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  int suggested_samples() const { return samples_; }
  bool has_generator() const { return S_.has_value(); }

  LagrangianFrame frame(double t) const;
  /// Raw orthonormal frame matrix, skipping the LagrangianFrame validation;
  /// the hot path for crossing scans.
  MatrixXd frame_matrix(double t) const;
  MatrixXd generator(double t) const;

  LagrangianPath restricted(double a, double b) const;
  /// Time reversal t -> t1 + t0 - t (generator support intentionally
  /// dropped; the reversed generator differs by sign and frame).
  LagrangianPath reversed() const;

 private:
  int m_ = 0;
  double t0_ = 0.0, t1_ = 0.0;
  std::function<MatrixXd(double)> frame_;  // returns orthonormal 2m x m
  std::optional<MatrixFn> S_;
  int samples_ = 128;
};

/// Direct sum of two Lagrangian paths over the same time interval, living
/// in the block-direct-sum symplectic space (coordinates reordered to the
/// standard (q, p) convention).
LagrangianPath direct_sum(const LagrangianPath& a, const LagrangianPath& b);

/// Standard-coordinate embedding matrix for the direct sum: maps
/// (q_a, p_a, q_b, p_b) to (q_a, q_b, p_a, p_b).
MatrixXd direct_sum_shuffle(int ma, int mb);

MatrixXd orthonormalized(const MatrixXd& F);

}  // namespace sympath
