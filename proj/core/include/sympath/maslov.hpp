#pragma once

#include <optional>

#include "sympath/halfint.hpp"
#include "sympath/paths.hpp"

namespace sympath {

/// One crossing of a Lagrangian path with the reference Lagrangian.
struct CrossingRecord {
  double t = 0.0;
  int dim = 0;
  MatrixXd form;       // dim x dim, symmetric, on a basis of V cap Lambda(t)
  int signature = 0;
  bool regular = false;
};

struct RsOptions {
  int scan_points = 0;          // 0: derived from the path's suggested samples
  double time_tol_rel = 1e-10;  // bisection width relative to path length
  double det_zero_tol = 1e-9;   // |det| at which a point counts as a crossing
  double regular_tol = 1e-7;    // relative cutoff for singular crossing forms
  double zero_form_tol = 1e-9;  // absolute cutoff for the zero-form certificate
  bool allow_zero_certificate = true;
  double rank_tol = 1e-9;
  /// Interior times where the path is only continuous (piecewise paths).
  /// The index is computed by catenation across them, so a crossing at a
  /// break contributes its one-sided endpoint halves.
  std::vector<double> breaks;
};

/// Crossing form of the path against V at t0, computed on a basis of the
/// intersection. Uses the generator formula <v, S(t0) v> when the path
/// carries one (cross-validated against the chart formula), the chart
/// formula <xi, A'(t0) xi> otherwise. Throws NoCrossingError if the
/// intersection is trivial.
CrossingRecord crossing_form(const LagrangianPath& path, const LagrangianFrame& V, double t0,
                             const RsOptions& opts = {});

/// Robbin-Salamon index: half the endpoint signatures plus the interior
/// signatures, over regular crossings. Degenerate interior stretches with
/// identically vanishing form contribute zero when the certificate is
/// enabled; any other singular form raises DegenerateCrossingError.
HalfInt rs_index(const LagrangianPath& path, const LagrangianFrame& V,
                 const RsOptions& opts = {});

/// Conley-Zehnder index carrier: index of the graph path of psi against the
/// diagonal in the product space, mapped to standard coordinates.
/// Requires psi(0) = Id.
HalfInt rs_index_graph(const SymplecticPath& psi, const RsOptions& opts = {});

/// Graph-space embedding: orthogonal map of (C^m x C^m, (-omega) x omega)
/// onto standard (C^{2m}, omega).
MatrixXd graph_space_embedding(int m);

/// Hoermander index s(V1, V2; L1, L2): difference of the Robbin-Salamon
/// indices of one concrete path from L1 to L2 against V2 and V1. The path
/// is a straight-line interpolation of graphs in a chart transversal to
/// both endpoints; non-transversal configurations retry with a rotated
/// chart before giving up.
HalfInt hormander_index(const LagrangianFrame& V1, const LagrangianFrame& V2,
                        const LagrangianFrame& L1, const LagrangianFrame& L2,
                        const RsOptions& opts = {});

}  // namespace sympath
