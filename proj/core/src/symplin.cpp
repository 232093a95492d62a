#include "sympath/symplin.hpp"

#include <Eigen/SVD>
#include <ostream>
#include <sstream>

#include "sympath/errors.hpp"

namespace sympath {

std::string HalfInt::str() const {
  std::ostringstream os;
  if (twice_ % 2 == 0) {
    os << twice_ / 2;
  } else {
    os << twice_ << "/2";
  }
  return os.str();
}

std::ostream& operator<<(std::ostream& os, HalfInt h) { return os << h.str(); }

MatrixXd standard_J(int m) {
  MatrixXd J = MatrixXd::Zero(2 * m, 2 * m);
  J.topRightCorner(m, m) = -MatrixXd::Identity(m, m);
  J.bottomLeftCorner(m, m) = MatrixXd::Identity(m, m);
  return J;
}

MatrixXd conjugation_I(int m) {
  MatrixXd I = MatrixXd::Identity(2 * m, 2 * m);
  I.bottomRightCorner(m, m) *= -1.0;
  return I;
}

SymplecticForm SymplecticForm::standard(int m) { return SymplecticForm{m, standard_J(m)}; }

bool is_symplectic(const MatrixXd& M, double tol) {
  if (M.rows() != M.cols() || M.rows() % 2 != 0 || M.rows() == 0) {
    throw DimensionError("is_symplectic: matrix must be square of even dimension");
  }
  const int m = static_cast<int>(M.rows()) / 2;
  const MatrixXd J = standard_J(m);
  return ((M.transpose() * J * M - J).cwiseAbs().maxCoeff()) <= tol;
}

void require_symplectic(const MatrixXd& M, double tol, const char* where) {
  if (!is_symplectic(M, tol)) {
    throw InvariantError(std::string(where) + ": matrix is not symplectic within tol");
  }
}

MatrixXd symplectic_inverse(const MatrixXd& M, double tol) {
  require_symplectic(M, tol, "symplectic_inverse");
  const int m = static_cast<int>(M.rows()) / 2;
  const MatrixXd J = standard_J(m);
  return -J * M.transpose() * J;
}

SymplecticBlocks block_decompose(const MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() % 2 != 0) {
    throw DimensionError("block_decompose: matrix must be square of even dimension");
  }
  const int m = static_cast<int>(M.rows()) / 2;
  return SymplecticBlocks{M.topLeftCorner(m, m), M.topRightCorner(m, m),
                          M.bottomLeftCorner(m, m), M.bottomRightCorner(m, m)};
}

MatrixXd assemble_blocks(const SymplecticBlocks& b) {
  const int m = static_cast<int>(b.X.rows());
  MatrixXd M(2 * m, 2 * m);
  M << b.X, b.Y, b.Z, b.W;
  return M;
}

LagrangianFrame LagrangianFrame::from_columns(const MatrixXd& F, double tol) {
  if (F.rows() % 2 != 0 || F.cols() * 2 != F.rows() || F.cols() == 0) {
    throw DimensionError("LagrangianFrame: frame must be 2m x m");
  }
  const int m = static_cast<int>(F.cols());

  Eigen::HouseholderQR<MatrixXd> qr(F);
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(2 * m, m);
  const MatrixXd R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j) {
    if (std::abs(R(j, j)) < tol * std::max(1.0, F.cwiseAbs().maxCoeff())) {
      throw InvariantError("LagrangianFrame: frame is rank-deficient");
    }
    // Sign-fix so the map F -> Q is continuous along smooth frame paths.
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  }

  LagrangianFrame out;
  out.m_ = m;
  out.F_ = Q;
  if (out.isotropy_defect() > std::max(tol, 1e-12) * 100) {
    throw InvariantError("LagrangianFrame: columns do not span an isotropic subspace");
  }
  return out;
}

LagrangianFrame LagrangianFrame::lambda0(int m) {
  MatrixXd F = MatrixXd::Zero(2 * m, m);
  F.topRows(m) = MatrixXd::Identity(m, m);
  LagrangianFrame out;
  out.m_ = m;
  out.F_ = F;
  return out;
}

LagrangianFrame LagrangianFrame::lambda1(int m) {
  MatrixXd F = MatrixXd::Zero(2 * m, m);
  F.bottomRows(m) = MatrixXd::Identity(m, m);
  LagrangianFrame out;
  out.m_ = m;
  out.F_ = F;
  return out;
}

LagrangianFrame LagrangianFrame::graph(const MatrixXd& A, double tol) {
  if (A.rows() != A.cols()) throw DimensionError("graph: A must be square");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, A.cwiseAbs().maxCoeff())) {
    throw InvariantError("graph: A must be symmetric");
  }
  const int m = static_cast<int>(A.rows());
  MatrixXd F(2 * m, m);
  F.topRows(m) = MatrixXd::Identity(m, m);
  F.bottomRows(m) = A;
  return from_columns(F, tol);
}

LagrangianFrame LagrangianFrame::cograph(const MatrixXd& B, double tol) {
  if (B.rows() != B.cols()) throw DimensionError("cograph: B must be square");
  if ((B - B.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, B.cwiseAbs().maxCoeff())) {
    throw InvariantError("cograph: B must be symmetric");
  }
  const int m = static_cast<int>(B.rows());
  MatrixXd F(2 * m, m);
  F.topRows(m) = B;
  F.bottomRows(m) = MatrixXd::Identity(m, m);
  return from_columns(F, tol);
}

LagrangianFrame LagrangianFrame::transformed(const MatrixXd& M) const {
  if (M.rows() != 2 * m_ || M.cols() != 2 * m_) {
    throw DimensionError("transformed: dimension mismatch");
  }
  return from_columns(M * F_);
}

double LagrangianFrame::isotropy_defect() const {
  const MatrixXd J = standard_J(m_);
  return (F_.transpose() * J * F_).cwiseAbs().maxCoeff();
}

int intersection_dimension_raw(const MatrixXd& F1, const MatrixXd& F2, const MatrixXd& J,
                               double tol) {
  // Pairing whose kernel is F1 cap F2: y in ker(F1^T J0 F2) iff F2 y lies
  // in span F1 (a Lagrangian equals its own omega-orthogonal complement).
  const int m = static_cast<int>(F1.cols());
  const MatrixXd P = F1.transpose() * J * F2;
  Eigen::JacobiSVD<MatrixXd> svd(P);
  const VectorXd s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (smax < 1e-13) return m;  // frames span the same Lagrangian

  // Orthonormal frames pair with singular values in [0, 1] (sines of the
  // principal angles), so the threshold scale is floored at one; otherwise
  // a near-total intersection would defeat a purely relative test.
  const double thresh = tol * std::max(smax, 1.0);
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) {
    const double si = s(i);
    if (si > 2.0 * thresh) {
      ++rank;
    } else if (si > 0.5 * thresh) {
      std::ostringstream os;
      os << "intersection_dimension: singular value " << si
         << " is inside the tolerance band around " << thresh << "; refine tol";
      throw IndeterminateRankError(os.str());
    }
  }
  return m - rank;
}

MatrixXd intersection_basis_raw(const MatrixXd& F1, const MatrixXd& F2, const MatrixXd& J,
                                double tol) {
  const int m = static_cast<int>(F1.cols());
  const int dim = intersection_dimension_raw(F1, F2, J, tol);
  if (dim == 0) return MatrixXd::Zero(2 * m, 0);
  if (dim == m) return F1;

  const MatrixXd P = F1.transpose() * J * F2;
  Eigen::JacobiSVD<MatrixXd> svd(P, Eigen::ComputeFullV);
  const MatrixXd V = svd.matrixV().rightCols(dim);
  MatrixXd B = F2 * V;
  Eigen::HouseholderQR<MatrixXd> qr(B);
  return qr.householderQ() * MatrixXd::Identity(2 * m, dim);
}

int intersection_dimension(const LagrangianFrame& F1, const LagrangianFrame& F2, double tol) {
  if (F1.m() != F2.m()) throw DimensionError("intersection: half-dimensions differ");
  return intersection_dimension_raw(F1.matrix(), F2.matrix(), standard_J(F1.m()), tol);
}

MatrixXd intersection_basis(const LagrangianFrame& F1, const LagrangianFrame& F2, double tol) {
  if (F1.m() != F2.m()) throw DimensionError("intersection: half-dimensions differ");
  return intersection_basis_raw(F1.matrix(), F2.matrix(), standard_J(F1.m()), tol);
}

}  // namespace sympath
