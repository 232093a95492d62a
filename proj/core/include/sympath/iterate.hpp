#pragma once

#include <optional>
#include <vector>

#include "sympath/halfint.hpp"
#include "sympath/maslov.hpp"
#include "sympath/paths.hpp"
#include "sympath/specflow.hpp"

namespace sympath {

/// A chord path: symplectic path on [0, T] starting at the identity,
/// together with the reflection I = diag(Id, -Id) acting on its ambient
/// space. The doubled endpoint is Phi(2T) = I Phi(T)^{-1} I Phi(T).
struct ChordPath {
  SymplecticPath phi;  // on [0, T], phi(0) = Id
  MatrixXd I;
  /// Endpoint kernel dimension forced by construction: ambient linearized
  /// flows along a chord always map the orbit-plane line of L0 (and of L1)
  /// back to itself, so their non-degeneracy means kernel dimension exactly
  /// one; abstract reduced paths use zero.
  int forced_kernel = 0;

  static ChordPath make(SymplecticPath phi, double tol = 1e-8, int forced_kernel = 0);

  int m() const { return phi.m(); }
  double T() const { return phi.T(); }
  MatrixXd doubled_endpoint() const;  // Phi(2T)
};

/// The l-fold iterate as a piecewise path on [0, l T]. Segment junctions
/// are reported so index computations can split there (the path is only
/// continuous across them).
struct IteratedPath {
  SymplecticPath path;
  std::vector<double> junctions;  // interior multiples of T
};

IteratedPath iterate_chord(const ChordPath& c, int ell);

/// Chebyshev block power for matrices of the doubled-chord form
/// [[A, B], [C, A^T]] with B, C symmetric: M^k = [[T_k(A), U_{k-1}(A) B],
/// [C U_{k-1}(A), T_k(A^T)]], with T_0 = U_0 = Id, T_1 = A, U_1 = 2A.
MatrixXd chebyshev_power(const MatrixXd& M, int k, double form_tol = 1e-8);

struct IterationReport {
  int ell = 0;
  HalfInt mu_I;
  HalfInt mu_minus_I;
  std::optional<HalfInt> mu_CZ_even;  // graph-route index, even iterates only
  bool nondeg_L0 = false;
  bool nondeg_L1 = false;
  double mean_index_estimate = 0.0;
  double mean_index_bound = 0.0;
  bool spectral_route_used = false;
};

struct MuIndexOptions {
  RsOptions rs;
  MuSpectralOptions spectral;
  bool compute_cz = true;
};

/// Indices of the l-th iterate: mu_I = RS index of the orbit of L0,
/// mu_-I the same for L1, with the spectral-flow route as fallback when a
/// crossing is degenerate. Even iterates also carry the independent
/// graph-route Conley-Zehnder index.
IterationReport mu_indices(const ChordPath& c, int ell, const MuIndexOptions& opts = {});

/// Incremental tables of mu_I(c^l) (and mu_{-I}(c^l)) for l = 1..ell_max,
/// built segment-by-segment through the catenation property. Frames are
/// re-orthonormalized per segment, so the cost and conditioning stay flat
/// in l.
class IndexTable {
 public:
  /// with_l1 = false skips the mu_{-I} ladder beyond l = 1, halving the
  /// cost of long tables (jump searches only need mu_{-I}(c)).
  IndexTable(const ChordPath& c, int ell_max, const RsOptions& opts = {}, bool with_l1 = true);

  HalfInt mu_I(int ell) const;        // l in 1..ell_max
  HalfInt mu_minus_I(int ell) const;
  int ell_max() const { return static_cast<int>(mu0_.size()); }

 private:
  std::vector<HalfInt> mu0_, mu1_;  // cumulative indices
};

struct MeanIndexResult {
  double estimate = 0.0;
  double bound = 0.0;  // |true - estimate| <= bound, bound = (m + 1) / ell
  int ell = 0;
};

/// Mean index via the iterate sequence mu_I(c^l) / l.
MeanIndexResult mean_index(const ChordPath& c, int ell_max, const RsOptions& opts = {});

/// Grading used by the orbit-window census: mu_I(c^l) - (n-1)/2.
HalfInt window_grading(HalfInt mu_I, int n);
/// Cone-grading convention: -mu - n/2.
HalfInt cone_grading(HalfInt mu, int n);

}  // namespace sympath
