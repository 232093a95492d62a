#pragma once

#include <vector>

#include "sympath/halfint.hpp"
#include "sympath/paths.hpp"

namespace sympath {

/// Boundary condition for the first-order operator -J0 d/dt - S(t):
/// both endpoint values constrained to R^m (Real) or to i R^m (Imaginary).
enum class BoundaryAxis { Real, Imaginary };

/// A path of symmetric 2m x 2m matrices on [0, T].
struct SymmetricMatrixPath {
  int m = 0;
  double T = 0.0;
  MatrixFn S;
  int samples = 64;

  static SymmetricMatrixPath constant(int m, double T, const MatrixXd& S0);
  /// Validates symmetry on the sample grid.
  void validate(double tol = 1e-9) const;
};

/// Symmetric banded discretization of -J0 d/dt - S(t) with the boundary
/// subspace imposed by construction. The component annihilated at the
/// endpoints lives on interior grid nodes, the free component on interval
/// midpoints; first derivatives are exact centered differences on this
/// staggering, which keeps the matrix symmetric and the spectrum free of
/// spurious collocation doublers.
struct DiscretizedOperator {
  int m = 0;
  int n_grid = 0;  // number of intervals
  BoundaryAxis boundary = BoundaryAxis::Real;
  double T = 0.0;
  int dim = 0;       // m * (2 n_grid - 1)
  int kd = 0;        // scalar lower bandwidth
  MatrixXd band;     // (kd + 1) x dim, LAPACK lower-banded column storage

  MatrixXd dense() const;

  /// Number of eigenvalues strictly below `shift` (Sturm count after
  /// tridiagonal reduction; cached).
  int count_below(double shift) const;

  /// All eigenvalues in (lo, hi], ascending.
  std::vector<double> eigenvalues_in(double lo, double hi) const;

  /// Label offset: the k-th labeled eigenvalue is the (offset + k)-th
  /// smallest (1-based), anchored so labels 1..m sit at zero for S == 0.
  int label_offset() const { return m * (n_grid - 1); }

 private:
  mutable std::vector<double> diag_, offdiag_;  // tridiagonal reduction cache
  void ensure_reduced() const;
};

DiscretizedOperator assemble_operator(const SymmetricMatrixPath& S, BoundaryAxis boundary,
                                      int n_grid);

/// Continuously labeled eigenvalues in a window around zero.
struct SpectralLadder {
  BoundaryAxis boundary = BoundaryAxis::Real;
  int n_grid = 0;
  int k_min = 0, k_max = 0;       // labels covered by the window
  std::vector<double> lambda;     // lambda[k - k_min], nondecreasing
  double window_lo = 0.0, window_hi = 0.0;

  double at(int k) const;
};

struct LadderOptions {
  double window_halfwidth = 0.0;  // 0: default 4 pi / T
  int homotopy_steps = 8;
  double match_slack = 0.25;      // fraction of the per-step drift bound
};

/// Labels the spectrum by continuation along s * S from s = 0, where labels
/// are anchored by the zero eigenvalues of the free operator. The final
/// labeling is cross-checked against the exact sorted-position offset of
/// the discrete operator; disagreement or an unresolvable collision raises
/// LabelAmbiguityError.
SpectralLadder label_spectrum(const SymmetricMatrixPath& S, BoundaryAxis boundary, int n_grid,
                              const LadderOptions& opts = {});

struct MuSpectralOptions {
  int n_grid = 1024;
  double border_tol = 1e-6;
  /// Known endpoint-kernel dimension. Negative: any eigenvalue inside the
  /// border band raises BorderlineEigenvalueError; otherwise exactly this
  /// many eigenvalues are tolerated inside the band (and not counted).
  int expected_kernel_dim = -1;
};

/// max{ k : lambda_k(S) < 0 } - m/2 as an exact half-integer.
HalfInt mu_spectral(const SymmetricMatrixPath& S, BoundaryAxis boundary,
                    const MuSpectralOptions& opts = {});

}  // namespace sympath
