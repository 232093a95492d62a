#include "sympath/census.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>

#include "sympath/errors.hpp"

namespace sympath {

void ChordSystem::validate() const {
  if (n < 1) throw DimensionError("ChordSystem: n must be positive");
  std::vector<std::string> labels;
  const int expect_m = ambient_indices ? n : n - 1;
  for (const auto& ce : chords) {
    if (ce.path.m() != expect_m) {
      throw DimensionError("ChordSystem: chord '" + ce.label +
                           "' has mismatched half-dimension");
    }
    labels.push_back(ce.label);
  }
  std::sort(labels.begin(), labels.end());
  if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) {
    throw InvariantError("ChordSystem: labels must be unique");
  }
}

bool JumpVector::exact() const {
  for (const auto& r : residual_lower) {
    if (r != HalfInt(0)) return false;
  }
  for (const auto& r : residual_upper) {
    if (r != HalfInt(0)) return false;
  }
  return true;
}

SystemTables SystemTables::build(const ChordSystem& sys, int ell_max, const RsOptions& rs) {
  sys.validate();
  SystemTables out;
  out.per_chord.reserve(sys.chords.size());
  for (const auto& ce : sys.chords) {
    out.per_chord.emplace_back(ce.path, ell_max, rs, /*with_l1=*/false);
  }
  return out;
}

std::vector<JumpVector> jump_search(const ChordSystem& sys, long long K_max, long long m_max,
                                    const JumpSearchOptions& opts,
                                    const SystemTables* shared) {
  sys.validate();
  if (sys.chords.empty()) return {};
  if (K_max < 1 || m_max < 1) throw DimensionError("jump_search: bounds must be positive");

  const int k = static_cast<int>(sys.chords.size());
  const int ell_max = static_cast<int>(2 * m_max + 1);

  SystemTables own;
  if (!shared) {
    own = SystemTables::build(sys, ell_max, opts.rs);
    shared = &own;
  }
  const auto& tables = shared->per_chord;
  if (static_cast<int>(tables.size()) != k) {
    throw DimensionError("jump_search: table count does not match the system");
  }

  // Hypothesis: positive mean index per chord, certified through the
  // estimate-with-bound read off the full tables.
  for (int j = 0; j < k; ++j) {
    const int le = std::min(tables[j].ell_max(), ell_max);
    if (le < 8) throw PreconditionError("jump_search: tables too short for the mean index");
    const double est = tables[j].mu_I(le).value() / le;
    const double bound = static_cast<double>(sys.chords[j].path.m() + 1) / le;
    if (est - bound <= 0.0) {
      std::ostringstream os;
      os << "jump_search: mean index of chord '" << sys.chords[j].label
         << "' not certified positive (estimate " << est << " +- " << bound << ")";
      throw HypothesisError(os.str());
    }
  }

  // Per chord, each admissible m determines its K from the lower relation;
  // indices increase strictly in the iterate order, so each K admits at
  // most one m per chord.
  std::vector<std::map<long long, long long>> per_chord(k);
  for (int j = 0; j < k; ++j) {
    const HalfInt base_mu_I = tables[j].mu_I(1);
    const HalfInt base_mu_mI = tables[j].mu_minus_I(1);
    for (long long m = 1; m <= m_max; ++m) {
      const HalfInt lower = tables[j].mu_I(static_cast<int>(2 * m - 1)) + base_mu_mI;
      const HalfInt upper = tables[j].mu_I(static_cast<int>(2 * m + 1)) - base_mu_I;
      if (lower != upper) continue;
      if (!lower.is_integer()) continue;
      const long long K = lower.twice() / 2;
      if (K < 1 || K > K_max) continue;
      per_chord[j].emplace(K, m);
    }
  }

  // Intersect the K sets across chords and re-verify with exact arithmetic.
  std::vector<JumpVector> out;
  for (const auto& [K, m0] : per_chord[0]) {
    JumpVector v;
    v.K = K;
    v.m.assign(k, 0);
    v.m[0] = m0;
    bool all = true;
    for (int j = 1; j < k; ++j) {
      const auto it = per_chord[j].find(K);
      if (it == per_chord[j].end()) {
        all = false;
        break;
      }
      v.m[j] = it->second;
    }
    if (!all) continue;
    for (int j = 0; j < k; ++j) {
      const HalfInt lhs_low = tables[j].mu_I(static_cast<int>(2 * v.m[j] - 1));
      const HalfInt lhs_up = tables[j].mu_I(static_cast<int>(2 * v.m[j] + 1));
      v.residual_lower.push_back(lhs_low - (HalfInt::whole(K) - tables[j].mu_minus_I(1)));
      v.residual_upper.push_back(lhs_up - (HalfInt::whole(K) + tables[j].mu_I(1)));
    }
    if (v.exact()) out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end(),
            [](const JumpVector& a, const JumpVector& b) { return a.K < b.K; });
  return out;
}

CensusReport window_census(const ChordSystem& sys, const JumpVector& v,
                           const JumpSearchOptions& opts, const SystemTables* shared) {
  sys.validate();
  if (!v.exact()) throw PreconditionError("window_census: jump vector is not exact");
  if (v.m.size() != sys.chords.size()) {
    throw DimensionError("window_census: vector length does not match the system");
  }
  const int n = sys.n;

  CensusReport rep;
  rep.K = v.K;
  rep.n = n;
  if (v.K < n + 2) {
    std::ostringstream os;
    os << "window K = " << v.K << " is below n + 2 = " << (n + 2)
       << "; the counting argument needs K >= n + 2";
    rep.warning = os.str();
  }

  const HalfInt lo = HalfInt::whole(v.K - n + 1);
  const HalfInt hi = HalfInt::whole(v.K);

  for (size_t j = 0; j < sys.chords.size(); ++j) {
    const auto& ce = sys.chords[j];
    ChordWindowReport cw;
    cw.label = ce.label;

    const int ell_scan = static_cast<int>(2 * v.m[j] + 1);
    std::optional<IndexTable> own;
    if (!shared || shared->per_chord[j].ell_max() < ell_scan) {
      own.emplace(ce.path, ell_scan, opts.rs, /*with_l1=*/false);
    }
    const IndexTable& table = own ? *own : shared->per_chord[j];

    // Strict index increase underpins the isolation of the 2m_j-th iterate
    // in the window; a violation invalidates the convexity assumption.
    HalfInt prev = table.mu_I(1);
    for (int l = 2; l <= ell_scan; ++l) {
      const HalfInt cur = table.mu_I(l);
      if (!(cur > prev)) cw.index_increase_ok = false;
      prev = cur;
    }

    for (int l = 1; l <= ell_scan; ++l) {
      const HalfInt g = window_grading(table.mu_I(l), n);
      if (g >= lo && g <= hi) {
        cw.hits.push_back(WindowHit{l, g});
        if (l != 2 * v.m[j]) cw.only_even_jump_iterate = false;
      }
    }
    if (!cw.hits.empty()) ++rep.distinct_chords_hit;
    rep.chords.push_back(std::move(cw));
  }

  rep.verdict = rep.distinct_chords_hit >= n;
  return rep;
}

DoublySymmetricCensus doubly_symmetric_census(const ChordSystem& sys) {
  sys.validate();
  DoublySymmetricCensus out;
  int others = 0;
  for (const auto& ce : sys.chords) {
    if (!ce.doubly_symmetric.has_value()) {
      throw PreconditionError("doubly_symmetric_census: chord '" + ce.label +
                              "' is missing its doubly-symmetric flag");
    }
    if (*ce.doubly_symmetric) {
      ++out.k;
    } else {
      ++others;
    }
  }
  if (others % 2 != 0) {
    throw PairingError("doubly_symmetric_census: non-doubly-symmetric chords must come in "
                       "Z2-pairs (odd count found)");
  }
  out.l = others / 2;
  out.bound = sys.n + out.l;
  out.total = out.k + 2 * out.l;
  out.verdict = out.total >= out.bound;
  return out;
}

}  // namespace sympath
