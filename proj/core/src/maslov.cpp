#include "sympath/maslov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "sympath/errors.hpp"

namespace sympath {

namespace {

constexpr double kRunFloor = 1e-11;       // |det| below which a sample sits in a zero-run
constexpr double kCrossingRankTol = 1e-6; // rank tolerance at refined crossing times
constexpr double kDipCoarse = 0.05;       // |det| below which a local minimum is refined

double pairing_det(const MatrixXd& frame, const MatrixXd& Vframe) {
  const int n = static_cast<int>(frame.rows());
  MatrixXd M(n, n);
  M.leftCols(frame.cols()) = frame;
  M.rightCols(Vframe.cols()) = Vframe;
  return M.determinant();
}

struct Crossing {
  double t;
  bool at_start;
  bool at_end;
};

// Chart derivative of the graph matrix A(t) of the path over its own frame
// at tc, along the complement J0 * frame. A(tc) = 0 by construction.
MatrixXd chart_derivative(const LagrangianPath& path, double tc, const MatrixXd& F0,
                          const MatrixXd& J) {
  const int m = path.m();
  MatrixXd basis(2 * m, 2 * m);
  basis.leftCols(m) = F0;
  basis.rightCols(m) = J * F0;

  auto graph_matrix = [&](double t) -> MatrixXd {
    const MatrixXd PR = basis.transpose() * path.frame_matrix(t);
    const MatrixXd P = PR.topRows(m);
    const MatrixXd R = PR.bottomRows(m);
    return R * P.inverse();
  };

  const double len = path.t1() - path.t0();
  double h = len * 1e-4;
  const bool left_ok = tc - 2 * h >= path.t0();
  const bool right_ok = tc + 2 * h <= path.t1();

  auto estimate = [&](double step) -> MatrixXd {
    if (left_ok && right_ok) {
      return (graph_matrix(tc + step) - graph_matrix(tc - step)) / (2.0 * step);
    }
    // One-sided, second order, using A(tc) = 0.
    const double s = right_ok ? step : -step;
    return (4.0 * graph_matrix(tc + s) - graph_matrix(tc + 2.0 * s)) / (2.0 * s);
  };

  const MatrixXd d1 = estimate(h);
  const MatrixXd d2 = estimate(h / 2.0);
  const double scale = std::max(1.0, d2.cwiseAbs().maxCoeff());
  if ((d1 - d2).cwiseAbs().maxCoeff() > 1e-3 * scale) {
    const MatrixXd d3 = estimate(h / 4.0);
    if ((d2 - d3).cwiseAbs().maxCoeff() > 1e-3 * std::max(1.0, d3.cwiseAbs().maxCoeff())) {
      throw ResolutionError("crossing_form: chart derivative did not stabilize; "
                            "sample spacing too coarse");
    }
    return (4.0 * d3 - d2) / 3.0;
  }
  return (4.0 * d2 - d1) / 3.0;  // Richardson
}

CrossingRecord make_record(const LagrangianPath& path, const LagrangianFrame& V, double tc,
                           const RsOptions& opts) {
  const int m = path.m();
  const MatrixXd J = standard_J(m);
  const MatrixXd Ft = path.frame_matrix(tc);
  const MatrixXd& Vm = V.matrix();
  const int dim = intersection_dimension_raw(Ft, Vm, J, kCrossingRankTol);
  if (dim == 0) {
    std::ostringstream os;
    os << "crossing_form: trivial intersection at t = " << tc;
    throw NoCrossingError(os.str());
  }
  const MatrixXd B = intersection_basis_raw(Ft, Vm, J, kCrossingRankTol);  // 2m x dim

  MatrixXd form;
  if (path.has_generator()) {
    // Probe the generator strictly inside the piece: piecewise paths may
    // carry a two-sided generator at their junction endpoints.
    const double inset = 1e-7 * (path.t1() - path.t0());
    const double t_gen = std::clamp(tc, path.t0() + inset, path.t1() - inset);
    const MatrixXd S = path.generator(t_gen);
    form = B.transpose() * S * B;
    // Cross-validate against the chart computation; the two formulas compute
    // the same invariant form on the intersection.
    const MatrixXd Adot = chart_derivative(path, tc, Ft, J);
    const MatrixXd Xi = Ft.transpose() * B;  // chart coordinates of the basis
    const MatrixXd chart_form = Xi.transpose() * Adot * Xi;
    const double scale = std::max(1.0, form.cwiseAbs().maxCoeff());
    if ((form - chart_form).cwiseAbs().maxCoeff() > 1e-5 * scale) {
      std::ostringstream os;
      os << "crossing_form: generator and chart forms disagree at t = " << tc << " (defect "
         << (form - chart_form).cwiseAbs().maxCoeff() << ")";
      throw ResolutionError(os.str());
    }
  } else {
    const MatrixXd Adot = chart_derivative(path, tc, Ft, J);
    const MatrixXd Xi = Ft.transpose() * B;
    form = Xi.transpose() * Adot * Xi;
  }
  form = 0.5 * (form + form.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(form);
  const auto& ev = es.eigenvalues();
  const double emax = ev.cwiseAbs().maxCoeff();
  const double reg_cut = opts.regular_tol * std::max(1.0, emax);
  int pos = 0, neg = 0, null = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > reg_cut) ++pos;
    else if (ev(i) < -reg_cut) ++neg;
    else ++null;
  }

  CrossingRecord rec;
  rec.t = tc;
  rec.dim = dim;
  rec.form = form;
  rec.signature = pos - neg;
  rec.regular = (null == 0);
  return rec;
}

// Refined location of a sign change of f in [a, b].
double bisect_zero(const std::function<double(double)>& f, double a, double b, double fa,
                   double tol) {
  for (int it = 0; it < 200 && (b - a) > tol; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fa > 0) == (fm > 0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// Golden-section extremum of f toward zero on [a, b] (minimize when the
// surrounding samples are positive, maximize otherwise).
std::pair<double, double> refine_extremum(const std::function<double(double)>& f, double a,
                                          double b, bool positive, double tol) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = positive ? f(x1) : -f(x1);
  double f2 = positive ? f(x2) : -f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a);
      f1 = positive ? f(x1) : -f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a);
      f2 = positive ? f(x2) : -f(x2);
    }
  }
  const double xm = 0.5 * (a + b);
  return {xm, f(xm)};
}

// Core index computation on a single smooth piece.
HalfInt rs_index_piece(const LagrangianPath& path, const LagrangianFrame& V,
                       const RsOptions& opts) {
  const double a = path.t0(), b = path.t1();
  const double len = b - a;
  const double time_tol = opts.time_tol_rel * len;
  const MatrixXd Vf = V.matrix();
  const MatrixXd Jm = standard_J(path.m());

  auto det_at = [&](double t) { return pairing_det(path.frame_matrix(t), Vf); };

  const int n_scan = opts.scan_points > 0
                         ? opts.scan_points
                         : std::max(256, 4 * path.suggested_samples());
  const double margin = std::max(time_tol, 1e-9 * len);

  std::vector<double> ts(n_scan);
  std::vector<double> ds(n_scan);
  for (int i = 0; i < n_scan; ++i) {
    ts[i] = a + margin + (len - 2 * margin) * i / (n_scan - 1);
    ds[i] = det_at(ts[i]);
  }

  std::vector<double> interior;  // refined interior crossing times

  // Endpoint intersection dimensions, needed to tell the flat tail of a
  // high-order endpoint crossing apart from a degenerate stretch.
  const int dim_at_a = intersection_dimension_raw(path.frame_matrix(a), Vf, Jm, kCrossingRankTol);
  const int dim_at_b = intersection_dimension_raw(path.frame_matrix(b), Vf, Jm, kCrossingRankTol);

  // Zero-runs: consecutive samples with |det| at noise level. A genuine
  // degenerate stretch carries an intersection with vanishing form there;
  // anything else is either the tail of an isolated endpoint crossing or a
  // near-miss without intersection.
  std::vector<bool> in_run(n_scan, false);
  for (int i = 0; i < n_scan; ++i) in_run[i] = std::abs(ds[i]) < kRunFloor;

  {
    const double tail_width = 1e-3 * len;
    int i = 0;
    while (i < n_scan) {
      if (!in_run[i]) { ++i; continue; }
      int j = i;
      while (j + 1 < n_scan && in_run[j + 1]) ++j;
      if (j > i) {
        for (int k = i; k <= j; k += std::max(1, (j - i) / 4)) {
          const int dim = intersection_dimension_raw(path.frame_matrix(ts[k]), Vf, Jm,
                                                     kCrossingRankTol);
          if (dim == 0) continue;  // tiny det without actual intersection
          const bool left_tail = dim_at_a > 0 && ts[k] - a < tail_width;
          const bool right_tail = dim_at_b > 0 && b - ts[k] < tail_width;
          if (left_tail || right_tail) continue;  // endpoint handles it
          CrossingRecord rec = make_record(path, V, ts[k], opts);
          const double fmax = rec.form.cwiseAbs().maxCoeff();
          if (fmax > opts.zero_form_tol) {
            throw DegenerateCrossingError(
                "rs_index: non-regular crossing stretch with nonvanishing form; "
                "use the spectral-flow route");
          }
          if (!opts.allow_zero_certificate) {
            throw DegenerateCrossingError(
                "rs_index: degenerate stretch and zero-form certificate disabled");
          }
        }
      }
      i = j + 1;
    }
  }

  // Sign changes between samples outside zero-runs.
  for (int i = 0; i + 1 < n_scan; ++i) {
    if (in_run[i] || in_run[i + 1]) continue;
    if ((ds[i] > 0) != (ds[i + 1] > 0)) {
      interior.push_back(bisect_zero(det_at, ts[i], ts[i + 1], ds[i], time_tol));
    }
  }

  // A crossing can land exactly on a grid node: an isolated sub-floor
  // sample between two clean neighbours is the crossing time itself.
  for (int i = 1; i + 1 < n_scan; ++i) {
    if (!in_run[i] || in_run[i - 1] || in_run[i + 1]) continue;
    const double tail_width = 1e-3 * len;
    if ((dim_at_a > 0 && ts[i] - a < tail_width) || (dim_at_b > 0 && b - ts[i] < tail_width)) {
      continue;
    }
    interior.push_back(ts[i]);
  }

  // Local |det| minima without a sign change: tangential or even-dimensional
  // crossings, or near-misses. Refine and classify by the extremal value.
  for (int i = 1; i + 1 < n_scan; ++i) {
    if (in_run[i - 1] || in_run[i] || in_run[i + 1]) continue;
    if ((ds[i] > 0) != (ds[i - 1] > 0) || (ds[i] > 0) != (ds[i + 1] > 0)) continue;
    if (std::abs(ds[i]) >= std::min(std::abs(ds[i - 1]), std::abs(ds[i + 1]))) continue;
    if (std::abs(ds[i]) > kDipCoarse) continue;

    const bool positive = ds[i] > 0;
    auto [textr, vextr] = refine_extremum(det_at, ts[i - 1], ts[i + 1], positive, time_tol);
    if ((positive && vextr < 0.0) || (!positive && vextr > 0.0)) {
      // The dip actually crosses zero twice inside one cell.
      interior.push_back(bisect_zero(det_at, ts[i - 1], textr, ds[i - 1], time_tol));
      interior.push_back(bisect_zero(det_at, textr, ts[i + 1], vextr, time_tol));
    } else if (std::abs(vextr) < opts.det_zero_tol) {
      interior.push_back(textr);
    } else if (std::abs(vextr) < 100.0 * opts.det_zero_tol) {
      std::ostringstream os;
      os << "rs_index: unclassifiable near-crossing at t = " << textr << " (|det| = "
         << std::abs(vextr) << "); refine tolerances";
      throw ResolutionError(os.str());
    }
  }

  std::sort(interior.begin(), interior.end());
  // Merge refinements of the same crossing and drop endpoint duplicates.
  std::vector<double> merged;
  const double merge_tol = 50.0 * time_tol;
  for (double t : interior) {
    if (t - a < merge_tol || b - t < merge_tol) continue;
    if (!merged.empty() && t - merged.back() < merge_tol) continue;
    merged.push_back(t);
  }

  std::int64_t twice = 0;

  for (double tend : {a, b}) {
    if ((tend == a ? dim_at_a : dim_at_b) == 0) continue;
    CrossingRecord rec = make_record(path, V, tend, opts);
    if (!rec.regular) {
      const double fmax = rec.form.cwiseAbs().maxCoeff();
      if (fmax <= opts.zero_form_tol && opts.allow_zero_certificate) continue;  // contributes 0
      throw DegenerateCrossingError(
          "rs_index: non-regular endpoint crossing; use the spectral-flow route");
    }
    twice += rec.signature;  // weight 1/2
  }

  for (double tc : merged) {
    CrossingRecord rec = make_record(path, V, tc, opts);
    if (!rec.regular) {
      const double fmax = rec.form.cwiseAbs().maxCoeff();
      if (fmax <= opts.zero_form_tol && opts.allow_zero_certificate) continue;
      std::ostringstream os;
      os << "rs_index: non-regular interior crossing at t = " << tc
         << "; use the spectral-flow route";
      throw DegenerateCrossingError(os.str());
    }
    twice += 2 * rec.signature;  // weight 1
  }

  return HalfInt(twice);
}

}  // namespace

CrossingRecord crossing_form(const LagrangianPath& path, const LagrangianFrame& V, double t0,
                             const RsOptions& opts) {
  if (path.m() != V.m()) throw DimensionError("crossing_form: dimension mismatch");
  return make_record(path, V, t0, opts);
}

HalfInt rs_index(const LagrangianPath& path, const LagrangianFrame& V, const RsOptions& opts) {
  if (path.m() != V.m()) throw DimensionError("rs_index: dimension mismatch");
  if (opts.breaks.empty()) return rs_index_piece(path, V, opts);

  std::vector<double> cuts;
  cuts.push_back(path.t0());
  for (double b : opts.breaks) {
    if (b > path.t0() + 1e-12 && b < path.t1() - 1e-12) cuts.push_back(b);
  }
  cuts.push_back(path.t1());
  std::sort(cuts.begin(), cuts.end());

  RsOptions piece_opts = opts;
  piece_opts.breaks.clear();
  HalfInt total(0);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    // Endpoint halves at the cuts pair up to the interior contribution, so
    // the sum over pieces matches the whole-path index (catenation).
    piece_opts.scan_points = opts.scan_points > 0
                                 ? std::max(64, static_cast<int>(opts.scan_points /
                                                                 (cuts.size() - 1)))
                                 : 0;
    total += rs_index_piece(path.restricted(cuts[i], cuts[i + 1]), V, piece_opts);
  }
  return total;
}

MatrixXd graph_space_embedding(int m) {
  // (q1, p1, q2, p2) -> (Q, P) with Q = (p1, q2), P = (q1, p2); pulls the
  // standard form on C^{2m} back to (-omega) x omega on C^m x C^m.
  MatrixXd T = MatrixXd::Zero(4 * m, 4 * m);
  for (int i = 0; i < m; ++i) {
    T(i, m + i) = 1.0;          // Q1 = p1
    T(m + i, 2 * m + i) = 1.0;  // Q2 = q2
    T(2 * m + i, i) = 1.0;      // P1 = q1
    T(3 * m + i, 3 * m + i) = 1.0;  // P2 = p2
  }
  return T;
}

HalfInt rs_index_graph(const SymplecticPath& psi, const RsOptions& opts) {
  const int m = psi.m();
  const MatrixXd Phi0 = psi(0.0);
  if ((Phi0 - MatrixXd::Identity(2 * m, 2 * m)).cwiseAbs().maxCoeff() > 1e-8) {
    throw PreconditionError("rs_index_graph: path must start at the identity");
  }
  const MatrixXd T = graph_space_embedding(m);

  auto frame = [psi, T, m](double t) -> MatrixXd {
    MatrixXd stacked(4 * m, 2 * m);
    stacked.topRows(2 * m) = MatrixXd::Identity(2 * m, 2 * m);
    stacked.bottomRows(2 * m) = psi(t);
    return orthonormalized(T * stacked);
  };

  std::optional<MatrixFn> S;
  if (psi.has_generator()) {
    S = [psi, T, m](double t) -> MatrixXd {
      MatrixXd Sd = MatrixXd::Zero(4 * m, 4 * m);
      Sd.bottomRightCorner(2 * m, 2 * m) = psi.generator(t);
      return T * Sd * T.transpose();
    };
  }

  LagrangianPath graph_path(2 * m, 0.0, psi.T(), std::move(frame), std::move(S),
                            psi.suggested_samples());

  MatrixXd diag_frame(4 * m, 2 * m);
  diag_frame.topRows(2 * m) = MatrixXd::Identity(2 * m, 2 * m);
  diag_frame.bottomRows(2 * m) = MatrixXd::Identity(2 * m, 2 * m);
  const LagrangianFrame Delta = LagrangianFrame::from_columns(T * diag_frame);

  return rs_index(graph_path, Delta, opts);
}

HalfInt hormander_index(const LagrangianFrame& V1, const LagrangianFrame& V2,
                        const LagrangianFrame& L1, const LagrangianFrame& L2,
                        const RsOptions& opts) {
  const int m = V1.m();
  if (V2.m() != m || L1.m() != m || L2.m() != m) {
    throw DimensionError("hormander_index: dimensions disagree");
  }
  if (intersection_dimension(V1, V2, kCrossingRankTol) == m) return HalfInt(0);
  if (intersection_dimension(L1, L2, kCrossingRankTol) == m) return HalfInt(0);

  const MatrixXd J = standard_J(m);
  const MatrixXd FB = L1.matrix();

  std::string last_failure;
  for (int attempt = 0; attempt < 8; ++attempt) {
    // Lagrangian complement of the base; rotating within the pencil
    // span(J0 B, B) perturbs the chart between retries.
    const double theta = 0.37 * attempt;
    const MatrixXd FW = orthonormalized(std::cos(theta) * (J * FB) + std::sin(theta) * FB);

    // Both endpoints must be graphs over the base along W.
    MatrixXd basis(2 * m, 2 * m);
    basis.leftCols(m) = FB;
    basis.rightCols(m) = FW;
    const auto lu = basis.partialPivLu();

    auto graph_matrix_of = [&](const LagrangianFrame& L, MatrixXd& out) -> bool {
      const MatrixXd XY = lu.solve(L.matrix());
      const MatrixXd X = XY.topRows(m);
      const MatrixXd Y = XY.bottomRows(m);
      const auto luX = X.partialPivLu();
      double mindiag = 1.0;
      for (int i = 0; i < m; ++i) {
        mindiag = std::min(mindiag, std::abs(luX.matrixLU()(i, i)));
      }
      if (mindiag < 0.05) return false;  // L too close to W; retry chart
      out = Y * luX.inverse();
      return true;
    };

    MatrixXd A1, A2;
    if (!graph_matrix_of(L1, A1) || !graph_matrix_of(L2, A2)) {
      last_failure = "endpoint not transversal to the chart complement";
      continue;
    }

    auto frame = [FB, FW, A1, A2](double t) -> MatrixXd {
      const MatrixXd At = (1.0 - t) * A1 + t * A2;
      return orthonormalized(FB + FW * At);
    };
    LagrangianPath seg(m, 0.0, 1.0, std::move(frame), std::nullopt, 256);

    try {
      const HalfInt s2 = rs_index(seg, V2, opts);
      const HalfInt s1 = rs_index(seg, V1, opts);
      return s2 - s1;
    } catch (const DegenerateCrossingError& e) {
      last_failure = e.what();
    } catch (const ResolutionError& e) {
      last_failure = e.what();
    }
  }
  throw DegenerateCrossingError("hormander_index: no chart produced a regular path (" +
                                last_failure + ")");
}

}  // namespace sympath
