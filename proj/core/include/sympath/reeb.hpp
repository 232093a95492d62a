#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sympath/halfint.hpp"
#include "sympath/iterate.hpp"
#include "sympath/paths.hpp"

namespace sympath {

/// A quartic monomial c * prod z_i^{e_i} over the 2n real coordinates
/// (q_1..q_n, p_1..p_n); exponents of the p-coordinates must be even so the
/// perturbation stays invariant under conjugation.
struct QuarticTerm {
  std::vector<int> exponents;  // size 2n, sum 4
  double coeff = 0.0;
};

/// Degree-2-homogeneous Hamiltonian H with Sigma = H^{-1}(1), invariant
/// under complex conjugation I(q, p) = (q, -p). Families:
///   ellipsoid:  H = sum_j pi |z_j|^2 / a_j
///   perturbed:  H = H_ellipsoid + sum_terms c z^e / |z|^2
class HypersurfaceModel {
 public:
  static HypersurfaceModel ellipsoid(const std::vector<double>& axes);
  static HypersurfaceModel perturbed_ellipsoid(const std::vector<double>& axes,
                                               const std::vector<QuarticTerm>& terms);

  int n() const { return n_; }
  const std::string& family() const { return family_; }
  const std::vector<double>& axes() const { return axes_; }
  bool convex_claim() const { return convex_claim_; }
  void set_convex_claim(bool c) { convex_claim_ = c; }

  double value(const VectorXd& z) const;
  VectorXd gradient(const VectorXd& z) const;
  MatrixXd hessian(const VectorXd& z) const;

  /// Hamiltonian vector field J0 grad H.
  VectorXd field(const VectorXd& z) const;

  /// Scale a direction u != 0 onto Sigma.
  VectorXd to_surface(const VectorXd& u) const;

  /// Spot-checks homogeneity H(rz) = r^2 H(z) and conjugation invariance
  /// H(Iz) = H(z) on random samples; throws InvariantError on failure.
  void validate(unsigned seed = 12345) const;

 private:
  int n_ = 0;
  std::string family_;
  std::vector<double> axes_;
  std::vector<QuarticTerm> terms_;
  bool convex_claim_ = true;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<VectorXd> states;
  double energy_drift = 0.0;

  const VectorXd& back_state() const { return states.back(); }
  VectorXd at(double t) const;  // linear interpolation between stored steps
};

struct FlowOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-13;
  double max_drift = 1e-9;
  double initial_step = 1e-3;
};

/// Integrates z' = J0 grad H(z) from z0 over [0, T] with embedded
/// Dormand-Prince stepping; raises StepControlError when the energy drift
/// exceeds max_drift.
Trajectory reeb_flow(const HypersurfaceModel& model, const VectorXd& z0, double T,
                     const FlowOptions& opts = {});

struct ReebChord {
  VectorXd q0;        // start point (p = 0), dimension n
  double T = 0.0;     // chord length
  double residual = 0.0;
  Trajectory trajectory;
  bool simple = true;
};

struct DegenerateFamily {
  VectorXd q0;
  double T = 0.0;
  double jacobian_sigma_min = 0.0;
};

struct ShootingResult {
  std::vector<ReebChord> chords;
  std::vector<DegenerateFamily> degenerate;
  int seeds_tried = 0;
  int seeds_failed = 0;
};

struct ShootingOptions {
  int sphere_seeds = 32;      // quasi-random direction seeds on {H(q,0)=1}
  double t_max_factor = 3.0;  // brake-time scan horizon, relative to max axis
  double newton_tol = 1e-10;
  int newton_max_iter = 60;
  double dedup_distance = 1e-6;
  unsigned seed = 2024;
  int threads = 1;
  FlowOptions flow;
};

/// Finds simple brake chords: Newton on (p(T; q0), H(q0,0) - 1) = 0 from
/// axis and quasi-random seeds, with deduplication up to the reflection
/// pairing and a simplicity scan for interior brake events.
ShootingResult find_brake_chords(const HypersurfaceModel& model,
                                 const ShootingOptions& opts = {});

/// Linearized flow Phi' = J0 Hess H(c(t)) Phi along the chord, returned
/// with the Hessian generator attached.
SymplecticPath linearized_flow(const HypersurfaceModel& model, const ReebChord& chord,
                               const FlowOptions& opts = {});

ChordPath chord_path(const HypersurfaceModel& model, const ReebChord& chord,
                     const FlowOptions& opts = {});

struct ChordIndices {
  HalfInt mu_I;
  HalfInt mu_minus_I;
  bool hessian_positive = false;     // Hessian positive-definite along the chord
  bool crossings_regular = false;
  bool spectral_route_used = false;
};

/// Ambient-route indices mu_I = mu_RS(Phi Lambda0, Lambda0) and
/// mu_-I = mu_RS(Phi Lambda1, Lambda1) of the linearized flow, with the
/// spectral-flow fallback on degenerate crossings.
ChordIndices chord_indices(const HypersurfaceModel& model, const ReebChord& chord,
                           const MuIndexOptions& opts = {});

/// Reduced-route cross-check: splits the ambient space into the orbit plane
/// span{z, X_H} and its symplectic complement when the orbit plane is a
/// fixed coordinate plane (ellipsoid axis chords), and sums the two
/// sub-indices. Returns nullopt when the splitting is not constant; frame
/// continuation across a moving splitting is deliberately not attempted.
std::optional<ChordIndices> chord_indices_reduced(const HypersurfaceModel& model,
                                                  const ReebChord& chord,
                                                  const MuIndexOptions& opts = {});

struct ConvexityChordReport {
  std::string label;
  HalfInt mu_I;
  HalfInt mu_minus_I;
  bool bound_ok = false;           // both >= (n+1)/2
  bool strict_increase_ok = false; // mu_I(c^{l+1}) > mu_I(c^l) up to ell_max
  std::vector<HalfInt> iterate_mu_I;
};

struct ConvexityReport {
  bool verdict = false;
  std::vector<ConvexityChordReport> chords;
};

/// Verifies the real-dynamical-convexity bounds mu_I, mu_-I >= (n+1)/2 and
/// strict index increase along iterates for every chord. Requires n >= 2.
ConvexityReport dynamical_convexity_check(const HypersurfaceModel& model,
                                          const std::vector<ReebChord>& chords, int ell_max,
                                          const MuIndexOptions& opts = {});

}  // namespace sympath
