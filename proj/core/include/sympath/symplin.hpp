#pragma once

#include <Eigen/Dense>

#include "sympath/halfint.hpp"

namespace sympath {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Standard symplectic structure on R^{2m}: J0 = [[0,-Id],[Id,0]],
/// omega(u,v) = <J0 u, v>. Coordinates are (q_1..q_m, p_1..p_m).
struct SymplecticForm {
  int m = 0;
  MatrixXd J0;

  static SymplecticForm standard(int m);
};

/// J0 for half-dimension m.
MatrixXd standard_J(int m);

/// diag(Id_m, -Id_m): complex conjugation (q,p) -> (q,-p).
MatrixXd conjugation_I(int m);

/// Membership test for Sp(2m): max-abs norm of M^T J0 M - J0 against tol.
/// Throws DimensionError for odd-dimensional input.
bool is_symplectic(const MatrixXd& M, double tol = 1e-9);

void require_symplectic(const MatrixXd& M, double tol, const char* where);

/// Exact inverse -J0 M^T J0. Throws InvariantError if M is not symplectic
/// within tol.
MatrixXd symplectic_inverse(const MatrixXd& M, double tol = 1e-9);

struct SymplecticBlocks {
  MatrixXd X, Y, Z, W;
};

/// Partition M = [[X,Y],[Z,W]] along the Lagrangian splitting L0 + L1.
SymplecticBlocks block_decompose(const MatrixXd& M);

MatrixXd assemble_blocks(const SymplecticBlocks& b);

/// A Lagrangian subspace given by a 2m x m frame with orthonormal columns.
/// Equality of Lagrangians is tested through intersection_dimension, never
/// through frame comparison.
class LagrangianFrame {
 public:
  LagrangianFrame() = default;

  /// Orthonormalizes the columns; verifies full rank and isotropy.
  static LagrangianFrame from_columns(const MatrixXd& F, double tol = 1e-9);

  /// R^m x {0}.
  static LagrangianFrame lambda0(int m);
  /// {0} x R^m.
  static LagrangianFrame lambda1(int m);
  /// Graph {(x, Ax)} of a symmetric matrix over lambda0.
  static LagrangianFrame graph(const MatrixXd& A, double tol = 1e-9);
  /// Graph {(By, y)} of a symmetric matrix over lambda1.
  static LagrangianFrame cograph(const MatrixXd& B, double tol = 1e-9);

  int m() const { return m_; }
  const MatrixXd& matrix() const { return F_; }

  /// Image frame under a symplectic (or anti-symplectic) map.
  LagrangianFrame transformed(const MatrixXd& M) const;

  /// ||F^T J0 F||_inf; zero for exact isotropy.
  double isotropy_defect() const;

 private:
  int m_ = 0;
  MatrixXd F_;  // 2m x m, orthonormal columns
};

/// dim(span F1 cap span F2) = m - rank(F1^T J0 F2). Numerical rank uses a
/// relative threshold tol * sigma_max; a singular value inside the band
/// (tol/2, 2 tol) * sigma_max raises IndeterminateRankError.
int intersection_dimension(const LagrangianFrame& F1, const LagrangianFrame& F2,
                           double tol = 1e-9);

/// Orthonormal basis of span F1 cap span F2 (2m x dim). Columns are exact
/// members of span F2 and members of span F1 up to the rank tolerance.
MatrixXd intersection_basis(const LagrangianFrame& F1, const LagrangianFrame& F2,
                            double tol = 1e-9);

/// Raw-frame variants used in crossing-scan hot paths; frames are assumed
/// orthonormal and isotropic and are not re-validated.
int intersection_dimension_raw(const MatrixXd& F1, const MatrixXd& F2, const MatrixXd& J,
                               double tol);
MatrixXd intersection_basis_raw(const MatrixXd& F1, const MatrixXd& F2, const MatrixXd& J,
                                double tol);

}  // namespace sympath
