#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sympath/halfint.hpp"
#include "sympath/iterate.hpp"

namespace sympath {

struct ChordEntry {
  std::string label;
  ChordPath path;
  double period = 0.0;  // chord length T
  std::optional<bool> doubly_symmetric;
};

/// A finite system of Reeb chords on a common contact manifold model.
/// `n` is the ambient half-dimension used in gradings and window widths;
/// `ambient_indices` records whether the chord paths act on C^n (ambient
/// linearized flows) or on the reduced C^{n-1}.
struct ChordSystem {
  std::vector<ChordEntry> chords;
  int n = 0;
  bool ambient_indices = true;

  void validate() const;
};

struct JumpVector {
  long long K = 0;
  std::vector<long long> m;
  std::vector<HalfInt> residual_lower;  // mu_I(c^{2m-1}) - (K - mu_{-I}(c))
  std::vector<HalfInt> residual_upper;  // mu_I(c^{2m+1}) - (K + mu_I(c))

  bool exact() const;
};

struct JumpSearchOptions {
  RsOptions rs;
};

/// Per-chord iterate index tables, shareable between the search and the
/// window censuses that follow it.
struct SystemTables {
  std::vector<IndexTable> per_chord;

  static SystemTables build(const ChordSystem& sys, int ell_max, const RsOptions& rs = {});
};

/// Exhaustive search for common index-jump vectors (K, m_1..m_k) with
/// m_j <= m_max and K <= K_max: per chord, each m_j determines a candidate
/// K from the lower relation, kept when the upper relation agrees exactly;
/// the per-chord candidate sets are then intersected. Requires a certified
/// positive mean index per chord (HypothesisError otherwise). `tables`,
/// when given, must cover 2 m_max + 1 iterates.
std::vector<JumpVector> jump_search(const ChordSystem& sys, long long K_max, long long m_max,
                                    const JumpSearchOptions& opts = {},
                                    const SystemTables* tables = nullptr);

struct WindowHit {
  int ell = 0;
  HalfInt grading;
};

struct ChordWindowReport {
  std::string label;
  std::vector<WindowHit> hits;
  bool only_even_jump_iterate = true;  // all hits at ell = 2 m_j
  bool index_increase_ok = true;
};

struct CensusReport {
  long long K = 0;
  int n = 0;
  std::vector<ChordWindowReport> chords;
  int distinct_chords_hit = 0;
  bool verdict = false;  // distinct_chords_hit >= n
  std::optional<std::string> warning;
};

/// For an exact jump vector, lists the iterates of each chord whose window
/// grading mu_I - (n-1)/2 lies in [K-n+1, K], checks through the
/// index-increase property that only the 2 m_j-th iterate can hit, and
/// counts the distinct chords hitting the window.
CensusReport window_census(const ChordSystem& sys, const JumpVector& v,
                           const JumpSearchOptions& opts = {},
                           const SystemTables* tables = nullptr);

struct DoublySymmetricCensus {
  int k = 0;      // doubly symmetric chords
  int l = 0;      // Z2-pairs of the rest
  int bound = 0;  // n + l
  int total = 0;  // k + 2l
  bool verdict = false;
};

/// Counting bound k + 2l >= n + l for systems with doubly-symmetric flags.
/// Chords without flags raise PreconditionError; an odd number of
/// non-doubly-symmetric chords raises PairingError.
DoublySymmetricCensus doubly_symmetric_census(const ChordSystem& sys);

}  // namespace sympath
