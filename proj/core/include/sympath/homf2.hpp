#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sympath/halfint.hpp"

namespace sympath {

/// Dense bit-packed matrix over F2. Vectors are single-column matrices.
class F2Matrix {
 public:
  F2Matrix() = default;
  F2Matrix(int rows, int cols);
  static F2Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  bool get(int i, int j) const;
  void set(int i, int j, bool v);

  F2Matrix operator*(const F2Matrix& o) const;
  F2Matrix operator+(const F2Matrix& o) const;
  bool operator==(const F2Matrix& o) const;
  F2Matrix transposed() const;
  bool is_zero() const;

  /// Columns of `o` appended on the right.
  F2Matrix hcat(const F2Matrix& o) const;
  F2Matrix col(int j) const;

  int rank() const;
  /// Basis of the null space, as columns.
  F2Matrix kernel_basis() const;
  /// Solves A X = B; nullopt when inconsistent.
  std::optional<F2Matrix> solve(const F2Matrix& B) const;
  /// A maximal independent subset of the columns (echelon filter).
  F2Matrix independent_columns() const;

 private:
  int rows_ = 0, cols_ = 0, words_ = 0;
  std::vector<std::uint64_t> bits_;  // row-major

  friend struct F2RowEchelon;
};

/// Z-graded chain complex over F2 with differential of degree -1.
struct F2Complex {
  int lo = 0;                     // lowest degree present
  std::vector<int> dims;          // dims[k - lo]
  std::map<int, F2Matrix> d;      // d[k]: C_k -> C_{k-1}

  int dim(int k) const;
  const F2Matrix* diff(int k) const;
  int top() const { return lo + static_cast<int>(dims.size()) - 1; }
  void validate() const;  // shapes and d о d = 0
};

/// Graded dimensions of homology, exact over F2.
std::map<int, int> homology(const F2Complex& C);

/// Z2-complex: chain complex with higher operations phi_j of degree j-1
/// (phi_0 = d) obeying sum_{i+j=k} phi_i phi_j = 0.
struct Z2ComplexStructure {
  F2Complex base;
  // phi[j][k]: C_k -> C_{k+j-1}; phi[0] mirrors base.d. Maps absent from
  // the table are zero.
  std::vector<std::map<int, F2Matrix>> phi;

  const F2Matrix* map_of(int j, int k) const;
  int order() const { return static_cast<int>(phi.size()) - 1; }

  /// Verifies the relations up to order k_max; names the first failing
  /// order in the error.
  void validate(int k_max) const;
};

/// Truncated equivariant complex F2[w]/{w^{N+1}} (x) C with the twisted
/// differential d(w^l x) = sum_{j<=l} w^{l-j} phi_j(x).
struct EquivariantComplex {
  int N = 0;
  Z2ComplexStructure z2;
  F2Complex total;  // assembled; generator (l, x) has degree l + |x|

  /// Index of generator (l, i) inside degree k = l + base-degree.
  int index_of(int k, int l, int i) const;
  /// Number of w-powers l contributing to degree k, and base offsets.
  std::vector<std::pair<int, int>> layout(int k) const;  // (l, base_degree)
};

EquivariantComplex build_equivariant(const Z2ComplexStructure& Z, int N);

std::map<int, int> equivariant_homology(const EquivariantComplex& E);

/// One page of a spectral sequence: group dimensions and differentials
/// d^r: (p, q) -> (p - r, q + r - 1).
struct SSPage {
  int r = 0;
  std::map<std::pair<int, int>, int> dims;
  std::map<std::pair<int, int>, F2Matrix> d;

  int dim(int p, int q) const;
  bool collapsed() const;  // all differentials zero
};

/// Pages r = 1..r_max of the w-degree filtration spectral sequence.
/// Page 1 is verified against H_q(C) with d^1 = phi_1; the subquotient
/// dimensions of each next page are verified against ker/im of d^r.
std::vector<SSPage> spectral_sequence(const EquivariantComplex& E, int r_max);

/// One action value of a chord spectrum with its Morse-Bott components.
struct SpectrumComponent {
  HalfInt mu;                  // Maslov index of chords on the component
  int dim = 0;                 // dimension of the component
  std::vector<int> h_z2;       // equivariant homology dims, degree 0 upward
};

struct SpectrumEntry {
  double T = 0.0;
  std::vector<SpectrumComponent> components;
};

/// First page of the action-filtration Morse-Bott spectral sequence:
/// a component at spectrum position p contributes its equivariant homology
/// in total degree s + mu - (dim - 1)/2 - n/2 for each homology degree s.
/// In the chord-non-degenerate case each component is a Z2-pair of points
/// (dim 0, h_z2 = {1}) sitting in total degree mu - n/2 + 1/2.
SSPage morse_bott_e1(const std::vector<SpectrumEntry>& spectrum, int n);

/// Graded dimensions of (relative_homology (x) F2[w]/{w^{N+1}})[n-1]:
/// out[k] = sum_{l=0..N} rel[k + n - 1 - l].
std::map<int, int> expected_positive_hw(const std::map<int, int>& relative_homology, int n,
                                        int N);

/// Built-in fixtures.
Z2ComplexStructure fixture_point();
/// A point with phi_1 = id. Deliberately violates the relations
/// (phi_1^2 = id has no compensating phi_2 on a point), so build_equivariant
/// rejects it naming order 2; kept as the canonical error-path fixture.
Z2ComplexStructure fixture_point_phi1_id();
Z2ComplexStructure fixture_two_point_swap();
/// Free antipodal sphere model: generators in degrees 0 and n with
/// phi_{n+1} connecting them; equivariant homology is that of the quotient.
Z2ComplexStructure fixture_sphere_antipodal(int n);
/// Ball/boundary triple (sub, total, quotient) modelling (B^n, S^{n-1})
/// with a free boundary action and an interior fixed point.
struct BallPairFixture {
  Z2ComplexStructure sub, total, quotient;
};
BallPairFixture fixture_ball_pair(int n);

}  // namespace sympath
