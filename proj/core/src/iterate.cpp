#include "sympath/iterate.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "sympath/errors.hpp"

namespace sympath {

ChordPath ChordPath::make(SymplecticPath phi, double tol, int forced_kernel) {
  const int m = phi.m();
  const MatrixXd Phi0 = phi(0.0);
  if ((Phi0 - MatrixXd::Identity(2 * m, 2 * m)).cwiseAbs().maxCoeff() > tol) {
    throw PreconditionError("ChordPath: path must start at the identity");
  }
  if (phi.symplecticity_defect() > std::max(tol, 1e-7)) {
    throw InvariantError("ChordPath: path is not symplectic within tol");
  }
  return ChordPath{std::move(phi), conjugation_I(m), forced_kernel};
}

MatrixXd ChordPath::doubled_endpoint() const {
  const MatrixXd PT = phi(T());
  return I * symplectic_inverse(PT, 1e-6) * I * PT;
}

namespace {

// Shared per-chord data for iterate evaluation: cached powers of Phi(2T)
// and the constant factors of the two segment types.
struct IterateCache {
  MatrixXd PT;       // Phi(T)
  MatrixXd PT_inv;   // Phi(T)^{-1}
  MatrixXd P2;       // Phi(2T)
  MatrixXd I;
  std::vector<MatrixXd> powers;  // P2^j

  const MatrixXd& power(int j) {
    while (static_cast<int>(powers.size()) <= j) {
      powers.push_back(powers.back() * P2);
    }
    return powers[j];
  }
};

std::shared_ptr<IterateCache> make_cache(const ChordPath& c) {
  auto cache = std::make_shared<IterateCache>();
  cache->PT = c.phi(c.T());
  cache->PT_inv = symplectic_inverse(cache->PT, 1e-6);
  cache->I = c.I;
  cache->P2 = cache->I * cache->PT_inv * cache->I * cache->PT;
  cache->powers.push_back(MatrixXd::Identity(cache->PT.rows(), cache->PT.cols()));
  return cache;
}

// Segment r (0-based) of the iterate on [rT, (r+1)T]:
//   r = 2j:     t -> Phi(t - 2jT) P2^j
//   r = 2j+1:   t -> I Phi((2j+2)T - t) I P2^{j+1}
MatrixXd eval_iterate(const ChordPath& c, IterateCache& cache, int ell, double t) {
  const double T = c.T();
  const double total = ell * T;
  t = std::clamp(t, 0.0, total);
  int r = std::min(static_cast<int>(std::floor(t / T)), ell - 1);
  // Junction values agree from both sides; evaluate from the earlier
  // segment for reproducibility.
  if (t - r * T < 1e-14 * total && r > 0) --r;
  const int j = r / 2;
  if (r % 2 == 0) {
    return c.phi(t - 2 * j * T) * cache.power(j);
  }
  return cache.I * c.phi((2 * j + 2) * T - t) * cache.I * cache.power(j + 1);
}

}  // namespace

IteratedPath iterate_chord(const ChordPath& c, int ell) {
  if (ell < 1) throw DimensionError("iterate_chord: iteration order must be positive");
  const double T = c.T();
  auto cache = make_cache(c);

  // Junction continuity is algebraic once Phi(0) = Id; a mismatch means the
  // base path data is corrupt.
  for (int r = 1; r < ell; ++r) {
    const double tj = r * T;
    const MatrixXd left = eval_iterate(c, *cache, ell, tj - 1e-13 * T * ell);
    const MatrixXd right = eval_iterate(c, *cache, ell, tj + 1e-13 * T * ell);
    if ((left - right).cwiseAbs().maxCoeff() >
        1e-6 * std::max(1.0, left.cwiseAbs().maxCoeff())) {
      std::ostringstream os;
      os << "iterate_chord: junction mismatch at t = " << tj;
      throw AssemblyError(os.str());
    }
  }

  ChordPath base = c;
  auto eval = [base, cache, ell](double t) {
    return eval_iterate(base, *cache, ell, t);
  };

  std::optional<MatrixFn> S;
  if (c.phi.has_generator()) {
    SymplecticPath phi = c.phi;
    MatrixXd I = c.I;
    const double total = ell * T;
    S = [phi, I, T, ell, total](double t) -> MatrixXd {
      t = std::clamp(t, 0.0, total);
      const int r = std::min(static_cast<int>(std::floor(t / T)), ell - 1);
      const int j = r / 2;
      if (r % 2 == 0) return phi.generator(t - 2 * j * T);
      return (I * phi.generator((2 * j + 2) * T - t) * I).eval();
    };
  }

  IteratedPath out;
  out.path = SymplecticPath(c.m(), ell * T, std::move(eval), std::move(S),
                            c.phi.suggested_samples() * ell);
  for (int r = 1; r < ell; ++r) out.junctions.push_back(r * T);
  return out;
}

MatrixXd chebyshev_power(const MatrixXd& M, int k, double form_tol) {
  if (k < 1) throw DimensionError("chebyshev_power: k must be positive");
  const auto b = block_decompose(M);
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((b.W - b.X.transpose()).cwiseAbs().maxCoeff() > form_tol * scale ||
      (b.Y - b.Y.transpose()).cwiseAbs().maxCoeff() > form_tol * scale ||
      (b.Z - b.Z.transpose()).cwiseAbs().maxCoeff() > form_tol * scale) {
    throw FormError("chebyshev_power: matrix is not of the doubled-chord block form");
  }
  const int m = static_cast<int>(b.X.rows());
  const MatrixXd& A = b.X;
  const MatrixXd Id = MatrixXd::Identity(m, m);

  // T_{k+1} = 2A T_k - T_{k-1}; same recurrence for U with U_0 = Id, U_1 = 2A.
  MatrixXd Tk_prev = Id, Tk = A;
  MatrixXd Ukm1 = Id, Uk = 2 * A;  // U_0, U_1
  for (int i = 1; i < k; ++i) {
    MatrixXd Tn = 2 * A * Tk - Tk_prev;
    Tk_prev = Tk;
    Tk = Tn;
    MatrixXd Un = 2 * A * Uk - Ukm1;
    Ukm1 = Uk;
    Uk = Un;
  }

  SymplecticBlocks out;
  out.X = Tk;
  out.Y = Ukm1 * b.Y;
  out.Z = b.Z * Ukm1;
  out.W = Tk.transpose();
  return assemble_blocks(out);
}

namespace {

// Segment l (1-based) of the iterate acting on a start frame: on [0, T],
//   l odd  (r = 2j):   t -> Phi(t) (P2^j F),            S_eff = S(t)
//   l even (r = 2j+1): t -> I Phi(T - t) (I P2^{j+1} F), S_eff = I S(T-t) I
// Only orthonormalized frames of the constant right factors enter, so the
// evaluation stays well-conditioned for arbitrarily large l.
class FrameLadder {
 public:
  FrameLadder(const ChordPath& c, const LagrangianFrame& F0)
      : cache_(make_cache(c)) {
    frames_.push_back(orthonormalized(F0.matrix()));
  }

  // Orthonormal frame of P2^j F0.
  const MatrixXd& frame(int j) {
    while (static_cast<int>(frames_.size()) <= j) {
      frames_.push_back(orthonormalized(cache_->P2 * frames_.back()));
    }
    return frames_[j];
  }

 private:
  std::shared_ptr<IterateCache> cache_;
  std::vector<MatrixXd> frames_;
};

LagrangianPath segment_path(const ChordPath& c, FrameLadder& ladder, int ell_segment) {
  const double T = c.T();
  const int r = ell_segment - 1;
  const int j = r / 2;
  SymplecticPath phi = c.phi;
  const MatrixXd I = c.I;

  if (r % 2 == 0) {
    const MatrixXd G = ladder.frame(j);
    auto frame = [phi, G](double t) { return orthonormalized(phi(t) * G); };
    std::optional<MatrixFn> S;
    if (phi.has_generator()) {
      S = [phi](double t) { return phi.generator(t); };
    }
    return LagrangianPath(c.m(), 0.0, T, std::move(frame), std::move(S),
                          phi.suggested_samples());
  }

  const MatrixXd H = orthonormalized(I * ladder.frame(j + 1));
  auto frame = [phi, I, H, T](double t) { return orthonormalized(I * (phi(T - t) * H)); };
  std::optional<MatrixFn> S;
  if (phi.has_generator()) {
    S = [phi, I, T](double t) { return (I * phi.generator(T - t) * I).eval(); };
  }
  return LagrangianPath(c.m(), 0.0, T, std::move(frame), std::move(S),
                        phi.suggested_samples());
}

}  // namespace

IndexTable::IndexTable(const ChordPath& c, int ell_max, const RsOptions& opts, bool with_l1) {
  if (ell_max < 1) throw DimensionError("IndexTable: ell_max must be positive");
  const int m = c.m();
  FrameLadder ladder0(c, LagrangianFrame::lambda0(m));
  FrameLadder ladder1(c, LagrangianFrame::lambda1(m));
  const LagrangianFrame L0 = LagrangianFrame::lambda0(m);
  const LagrangianFrame L1 = LagrangianFrame::lambda1(m);

  // One base-chord segment carries only a handful of crossings; a modest
  // scan grid plus refinement is enough and keeps long tables affordable.
  RsOptions seg_opts = opts;
  if (seg_opts.scan_points == 0) seg_opts.scan_points = 192;

  HalfInt acc0(0), acc1(0);
  mu0_.reserve(ell_max);
  for (int l = 1; l <= ell_max; ++l) {
    acc0 += rs_index(segment_path(c, ladder0, l), L0, seg_opts);
    mu0_.push_back(acc0);
    if (with_l1 || l == 1) {
      acc1 += rs_index(segment_path(c, ladder1, l), L1, seg_opts);
      mu1_.push_back(acc1);
    }
  }
}

HalfInt IndexTable::mu_I(int ell) const {
  if (ell < 1 || ell > static_cast<int>(mu0_.size())) {
    throw DimensionError("IndexTable: iteration order out of range");
  }
  return mu0_[static_cast<size_t>(ell - 1)];
}

HalfInt IndexTable::mu_minus_I(int ell) const {
  if (ell < 1 || ell > static_cast<int>(mu1_.size())) {
    throw DimensionError("IndexTable: iteration order out of range");
  }
  return mu1_[static_cast<size_t>(ell - 1)];
}

IterationReport mu_indices(const ChordPath& c, int ell, const MuIndexOptions& opts) {
  if (ell < 1) throw DimensionError("mu_indices: iteration order must be positive");
  const int m = c.m();
  const IteratedPath it = iterate_chord(c, ell);

  IterationReport rep;
  rep.ell = ell;

  RsOptions rs_opts = opts.rs;
  rs_opts.breaks = it.junctions;

  const LagrangianFrame L0 = LagrangianFrame::lambda0(m);
  const LagrangianFrame L1 = LagrangianFrame::lambda1(m);

  auto spectral_fallback = [&](const LagrangianFrame& L, BoundaryAxis axis) -> HalfInt {
    if (!it.path.has_generator()) {
      throw DegenerateCrossingError(
          "mu_indices: degenerate crossing and no generator for the spectral route");
    }
    rep.spectral_route_used = true;
    SymplecticPath p = it.path;
    SymmetricMatrixPath S{m, p.T(), [p](double t) { return p.generator(t); },
                          std::max(64, std::min(p.suggested_samples(), 512))};
    MuSpectralOptions sp = opts.spectral;
    const LagrangianFrame end = L.transformed(it.path(it.path.T()));
    sp.expected_kernel_dim = intersection_dimension(end, L, 1e-6);
    return mu_spectral(S, axis, sp);
  };

  try {
    rep.mu_I = rs_index(LagrangianPath::orbit(it.path, L0), L0, rs_opts);
  } catch (const DegenerateCrossingError&) {
    rep.mu_I = spectral_fallback(L0, BoundaryAxis::Real);
  }
  try {
    rep.mu_minus_I = rs_index(LagrangianPath::orbit(it.path, L1), L1, rs_opts);
  } catch (const DegenerateCrossingError&) {
    rep.mu_minus_I = spectral_fallback(L1, BoundaryAxis::Imaginary);
  }

  // Non-degeneracy through the endpoint pairing rank (the rank form of the
  // block-invertibility test): kernel beyond the forced orbit-plane
  // direction means a degenerate iterate.
  const MatrixXd end = it.path(it.path.T());
  rep.nondeg_L0 =
      intersection_dimension(L0.transformed(end), L0, 1e-6) == c.forced_kernel;
  rep.nondeg_L1 =
      intersection_dimension(L1.transformed(end), L1, 1e-6) == c.forced_kernel;

  if (opts.compute_cz && ell % 2 == 0) {
    RsOptions cz_opts = opts.rs;
    cz_opts.breaks = it.junctions;
    rep.mu_CZ_even = rs_index_graph(it.path, cz_opts);
  }
  return rep;
}

MeanIndexResult mean_index(const ChordPath& c, int ell_max, const RsOptions& opts) {
  if (ell_max < 8) throw PreconditionError("mean_index: ell_max must be at least 8");
  IndexTable table(c, ell_max, opts, /*with_l1=*/false);
  MeanIndexResult out;
  out.ell = ell_max;
  out.estimate = table.mu_I(ell_max).value() / ell_max;
  out.bound = static_cast<double>(c.m() + 1) / ell_max;
  return out;
}

HalfInt window_grading(HalfInt mu_I, int n) { return mu_I - HalfInt(n - 1); }

HalfInt cone_grading(HalfInt mu, int n) { return -mu - HalfInt(n); }

}  // namespace sympath
