#include "sympath/specflow.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sympath/errors.hpp"

namespace sympath {

SymmetricMatrixPath SymmetricMatrixPath::constant(int m, double T, const MatrixXd& S0) {
  if (S0.rows() != 2 * m || S0.cols() != 2 * m) {
    throw DimensionError("SymmetricMatrixPath: S must be 2m x 2m");
  }
  MatrixXd S0c = S0;
  return SymmetricMatrixPath{m, T, [S0c](double) { return S0c; }, 16};
}

void SymmetricMatrixPath::validate(double tol) const {
  if (m <= 0 || T <= 0.0) throw DimensionError("SymmetricMatrixPath: need m > 0, T > 0");
  for (int i = 0; i <= samples; ++i) {
    const double t = T * i / samples;
    const MatrixXd St = S(t);
    if (St.rows() != 2 * m || St.cols() != 2 * m) {
      throw DimensionError("SymmetricMatrixPath: sample has wrong dimension");
    }
    if ((St - St.transpose()).cwiseAbs().maxCoeff() >
        tol * std::max(1.0, St.cwiseAbs().maxCoeff())) {
      std::ostringstream os;
      os << "SymmetricMatrixPath: S(" << t << ") is not symmetric";
      throw InvariantError(os.str());
    }
  }
}

// Unknown layout, blocks of size m ordered along the grid:
//   [A_{1/2}, B_1, A_{3/2}, B_2, ..., B_{N-1}, A_{N-1/2}]
// where A is the component free at the boundary (on interval midpoints) and
// B the component clamped at the endpoints (on interior nodes). For the
// Real boundary A = q, B = p; for the Imaginary boundary A = p, B = q.
DiscretizedOperator assemble_operator(const SymmetricMatrixPath& Spath, BoundaryAxis boundary,
                                      int n_grid) {
  if (n_grid < 16) throw DimensionError("assemble_operator: n_grid must be at least 16");
  Spath.validate();
  const int m = Spath.m;
  const int N = n_grid;
  const double h = Spath.T / N;

  // (-J0 v')_q = p' and (-J0 v')_p = -q'.
  int a_lo, b_lo;
  double s_a;
  if (boundary == BoundaryAxis::Real) {
    a_lo = 0;      // A = q
    b_lo = m;      // B = p
    s_a = +1.0;    // q-rows carry +p'
  } else {
    a_lo = m;      // A = p
    b_lo = 0;      // B = q
    s_a = -1.0;    // p-rows carry -q'
  }

  DiscretizedOperator op;
  op.m = m;
  op.n_grid = N;
  op.boundary = boundary;
  op.T = Spath.T;
  op.dim = m * (2 * N - 1);
  op.kd = 2 * m - 1;
  op.band = MatrixXd::Zero(op.kd + 1, op.dim);

  auto block_index_A = [](int i) { return 2 * i; };      // A_{i+1/2}, i = 0..N-1
  auto block_index_B = [](int i) { return 2 * i - 1; };  // B_i, i = 1..N-1

  // Stores one block of the symmetric matrix; only the lower triangle lives
  // in the banded buffer, so upper blocks are folded onto their transpose.
  auto add_block = [&](int brow, int bcol, const MatrixXd& Min) {
    MatrixXd M = Min;
    if (brow < bcol) {
      std::swap(brow, bcol);
      M = Min.transpose();
    }
    if (brow == bcol) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j <= i; ++j) {
          op.band(i - j, bcol * m + j) += M(i, j);
        }
      }
    } else {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          const int r = brow * m + i, c = bcol * m + j;
          op.band(r - c, c) += M(i, j);
        }
      }
    }
  };

  auto Sblock = [&](double t, int ro, int co) -> MatrixXd {
    return Spath.S(t).block(ro, co, m, m);
  };

  const MatrixXd Im = MatrixXd::Identity(m, m);

  // Diagonal blocks: -S_AA at midpoints, -S_BB at interior nodes.
  for (int i = 0; i < N; ++i) {
    const double tau = (i + 0.5) * h;
    add_block(block_index_A(i), block_index_A(i), -Sblock(tau, a_lo, a_lo));
  }
  for (int i = 1; i < N; ++i) {
    add_block(block_index_B(i), block_index_B(i), -Sblock(i * h, b_lo, b_lo));
  }

  // Derivative couplings plus the symmetrized cross-coupling of S: the
  // A-row at midpoint i+1/2 reads s_a (B_{i+1} - B_i)/h - S_AB * avg(B).
  // Averaging the off-diagonal S block between the two evaluation points
  // keeps the matrix exactly symmetric at second-order consistency.
  for (int i = 0; i < N; ++i) {
    const double tau = (i + 0.5) * h;
    const int arow = block_index_A(i);
    for (int side = 0; side < 2; ++side) {
      const int node = i + side;
      if (node < 1 || node > N - 1) continue;  // clamped boundary values
      const MatrixXd C =
          0.25 * (Sblock(tau, a_lo, b_lo) + Sblock(node * h, a_lo, b_lo));
      const double deriv = (side == 0 ? -s_a : s_a) / h;
      add_block(arow, block_index_B(node), deriv * Im - C);
    }
  }

  return op;
}

MatrixXd DiscretizedOperator::dense() const {
  MatrixXd A = MatrixXd::Zero(dim, dim);
  for (int c = 0; c < dim; ++c) {
    for (int r = 0; r <= kd && c + r < dim; ++r) {
      const double v = band(r, c);
      A(c + r, c) = v;
      A(c, c + r) = v;
    }
  }
  return A;
}

void DiscretizedOperator::ensure_reduced() const {
  if (!diag_.empty()) return;
  MatrixXd ab = band;  // dsbtrd overwrites
  diag_.assign(dim, 0.0);
  offdiag_.assign(std::max(dim - 1, 1), 0.0);
  const lapack_int info = LAPACKE_dsbtrd(
      LAPACK_COL_MAJOR, 'N', 'L', dim, kd, ab.data(), kd + 1, diag_.data(), offdiag_.data(),
      nullptr, dim);
  if (info != 0) {
    diag_.clear();
    throw InvariantError("DiscretizedOperator: banded tridiagonal reduction failed");
  }
}

int DiscretizedOperator::count_below(double shift) const {
  ensure_reduced();
  // Sturm count via the LDL^T pivot recurrence on the tridiagonal, with the
  // standard safeguard against vanishing pivots.
  const double safe = 1e-300;
  int count = 0;
  double d = diag_[0] - shift;
  if (d == 0.0) d = -safe;
  if (d < 0.0) ++count;
  for (int i = 1; i < dim; ++i) {
    d = (diag_[i] - shift) - offdiag_[i - 1] * offdiag_[i - 1] / d;
    if (d == 0.0) d = -safe;
    if (d < 0.0) ++count;
  }
  return count;
}

std::vector<double> DiscretizedOperator::eigenvalues_in(double lo, double hi) const {
  ensure_reduced();
  std::vector<double> w(dim);
  std::vector<lapack_int> iblock(dim), isplit(dim);
  lapack_int found = 0, nsplit = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info =
      LAPACKE_dstebz('V', 'E', dim, lo, hi, 0, 0, abstol, diag_.data(), offdiag_.data(),
                     &found, &nsplit, w.data(), iblock.data(), isplit.data());
  if (info != 0) {
    throw InvariantError("DiscretizedOperator: bisection eigenvalue solve failed");
  }
  w.resize(found);
  std::sort(w.begin(), w.end());
  return w;
}

double SpectralLadder::at(int k) const {
  if (k < k_min || k > k_max) {
    std::ostringstream os;
    os << "SpectralLadder: label " << k << " outside window [" << k_min << ", " << k_max << "]";
    throw DimensionError(os.str());
  }
  return lambda[static_cast<size_t>(k - k_min)];
}

SpectralLadder label_spectrum(const SymmetricMatrixPath& Spath, BoundaryAxis boundary,
                              int n_grid, const LadderOptions& opts) {
  Spath.validate();
  const int m = Spath.m;
  const double T = Spath.T;
  const double W = opts.window_halfwidth > 0 ? opts.window_halfwidth : 4.0 * M_PI / T;

  // Operator norm of S bounds the eigenvalue drift along the homotopy s*S.
  double Snorm = 0.0;
  for (int i = 0; i <= 16; ++i) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Spath.S(T * i / 16.0));
    Snorm = std::max(Snorm, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  const int steps = std::max(opts.homotopy_steps, 1);
  const double drift = Snorm / steps * 1.1;

  // Work in a window wide enough that nothing reported ever touched the
  // homotopy window edge.
  const double Wfull = W + Snorm + 2.0 * drift + 1.0;

  struct Tracked {
    int label;
    double value;
  };
  std::vector<Tracked> prev;

  auto assemble_scaled = [&](double s) {
    SymmetricMatrixPath scaled = Spath;
    MatrixFn base = Spath.S;
    scaled.S = [base, s](double t) { return (s * base(t)).eval(); };
    return assemble_operator(scaled, boundary, n_grid);
  };

  {
    // Anchor labels at s = 0 by the exact sorted-position offset: the m
    // zero eigenvalues of the free operator carry labels 1..m.
    const DiscretizedOperator op0 = assemble_scaled(0.0);
    const std::vector<double> vals = op0.eigenvalues_in(-Wfull, Wfull);
    if (vals.empty()) throw LabelAmbiguityError("label_spectrum: empty initial window");
    const int below_window = op0.count_below(-Wfull);
    const int label_first = below_window - op0.label_offset() + 1;
    prev.resize(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) {
      prev[i] = {label_first + static_cast<int>(i), vals[i]};
    }
  }

  for (int step = 1; step <= steps; ++step) {
    const double s = static_cast<double>(step) / steps;
    const DiscretizedOperator op = assemble_scaled(s);
    const std::vector<double> vals = op.eigenvalues_in(-Wfull, Wfull);
    if (vals.empty()) throw LabelAmbiguityError("label_spectrum: window became empty");

    // Monotone matching: both lists are sorted, so a consistent alignment
    // is a single index shift. It must be unique within the drift bound.
    const double tol = drift * (1.0 + opts.match_slack) + 1e-9;
    int best_shift = 0, n_ok = 0;
    for (int shift = -4 * m; shift <= 4 * m; ++shift) {
      bool ok = true;
      int overlap = 0;
      for (size_t i = 0; i < vals.size(); ++i) {
        const long long j = static_cast<long long>(i) + shift;
        if (j < 0 || j >= static_cast<long long>(prev.size())) continue;
        ++overlap;
        if (std::abs(vals[i] - prev[static_cast<size_t>(j)].value) > tol) {
          ok = false;
          break;
        }
      }
      if (ok && overlap > 0) {
        ++n_ok;
        best_shift = shift;
      }
    }
    if (n_ok != 1) {
      std::ostringstream os;
      os << "label_spectrum: label matching ambiguous at homotopy step " << step << " (" << n_ok
         << " consistent alignments near s = " << s << "); increase homotopy_steps";
      throw LabelAmbiguityError(os.str());
    }

    std::vector<Tracked> cur(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) {
      const long long j = static_cast<long long>(i) + best_shift;
      int label;
      if (j >= 0 && j < static_cast<long long>(prev.size())) {
        label = prev[static_cast<size_t>(j)].label;
      } else if (j < 0) {
        label = prev.front().label - static_cast<int>(-j);
      } else {
        label = prev.back().label + static_cast<int>(j - (static_cast<long long>(prev.size()) - 1));
      }
      cur[i] = {label, vals[i]};
    }
    prev = std::move(cur);
  }

  // Exact cross-check at s = 1: probe the widest interior gap; the count of
  // eigenvalues below the probe must reproduce the continuation labels.
  {
    const DiscretizedOperator op1 = assemble_scaled(1.0);
    size_t gi = 0;
    double gap = -1.0;
    for (size_t i = 0; i + 1 < prev.size(); ++i) {
      const double g = prev[i + 1].value - prev[i].value;
      if (g > gap) {
        gap = g;
        gi = i;
      }
    }
    if (gap > 1e-7) {
      const double probe = 0.5 * (prev[gi].value + prev[gi + 1].value);
      const int exact_label = op1.count_below(probe) - op1.label_offset();
      if (exact_label != prev[gi].label) {
        std::ostringstream os;
        os << "label_spectrum: continuation label " << prev[gi].label
           << " disagrees with the exact count " << exact_label;
        throw LabelAmbiguityError(os.str());
      }
    }
  }

  SpectralLadder ladder;
  ladder.boundary = boundary;
  ladder.n_grid = n_grid;
  ladder.window_lo = -W;
  ladder.window_hi = W;
  std::vector<Tracked> kept;
  for (const auto& t : prev) {
    if (t.value >= -W && t.value <= W) kept.push_back(t);
  }
  if (kept.empty()) throw LabelAmbiguityError("label_spectrum: window contains no eigenvalues");
  ladder.k_min = kept.front().label;
  ladder.k_max = kept.back().label;
  for (const auto& t : kept) ladder.lambda.push_back(t.value);
  return ladder;
}

HalfInt mu_spectral(const SymmetricMatrixPath& Spath, BoundaryAxis boundary,
                    const MuSpectralOptions& opts) {
  const DiscretizedOperator op = assemble_operator(Spath, boundary, opts.n_grid);
  const double d = opts.border_tol;
  const int below = op.count_below(-d);
  const int inband = op.count_below(d) - below;

  if (opts.expected_kernel_dim < 0) {
    if (inband != 0) {
      const auto vals = op.eigenvalues_in(-d, d);
      std::ostringstream os;
      os << "mu_spectral: eigenvalue " << (vals.empty() ? 0.0 : vals.front()) << " within " << d
         << " of zero (endpoint degeneracy)";
      throw BorderlineEigenvalueError(os.str(), vals.empty() ? 0.0 : vals.front());
    }
  } else if (inband != opts.expected_kernel_dim) {
    std::ostringstream os;
    os << "mu_spectral: " << inband << " eigenvalues inside the border band, expected "
       << opts.expected_kernel_dim;
    throw BorderlineEigenvalueError(os.str(), 0.0);
  }

  const int max_k = below - op.label_offset();
  return HalfInt(2 * static_cast<std::int64_t>(max_k) - op.m);
}

}  // namespace sympath
