#pragma once

// Integer homology of cell complexes through the Smith normal form, the
// closed-form homology of catalog complements, and the shadow verdict.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "shadow/divisor.hpp"
#include "shadow/errors.hpp"

namespace shadow {

using BigInt = boost::multiprecision::cpp_int;

template <typename Int>
struct IntMatrix {
  int rows = 0, cols = 0;
  std::vector<Int> data;

  IntMatrix() = default;
  IntMatrix(int r, int c) : rows(r), cols(c), data(std::size_t(r) * c, Int(0)) {}
  static IntMatrix identity(int n) {
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = Int(1);
    return m;
  }
  Int& operator()(int i, int j) { return data[std::size_t(i) * cols + j]; }
  const Int& operator()(int i, int j) const { return data[std::size_t(i) * cols + j]; }
  bool operator==(const IntMatrix&) const = default;

  template <typename Other>
  IntMatrix<Other> cast() const {
    IntMatrix<Other> m(rows, cols);
    for (std::size_t i = 0; i < data.size(); ++i) m.data[i] = Other(data[i]);
    return m;
  }
  bool is_zero() const {
    return std::all_of(data.begin(), data.end(), [](const Int& x) { return x == 0; });
  }
};

namespace detail {

// Checked arithmetic: overflow on int64 raises OverflowGuard, BigInt never does.
inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowGuard("int64 overflow in Smith normal form");
  return r;
}
inline std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowGuard("int64 overflow in Smith normal form");
  return r;
}
inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowGuard("int64 overflow in Smith normal form");
  return r;
}
inline std::int64_t checked_neg(std::int64_t a) { return checked_sub(0, a); }
inline BigInt checked_mul(const BigInt& a, const BigInt& b) { return a * b; }
inline BigInt checked_sub(const BigInt& a, const BigInt& b) { return a - b; }
inline BigInt checked_add(const BigInt& a, const BigInt& b) { return a + b; }
inline BigInt checked_neg(const BigInt& a) { return -a; }

template <typename Int>
Int abs_of(const Int& x) {
  return x < 0 ? checked_neg(x) : x;
}

// Quotient rounded to nearest so that |a - q b| <= |b| / 2.
template <typename Int>
Int nearest_quotient(const Int& a, const Int& b) {
  Int q = a / b;
  const Int r = checked_sub(a, checked_mul(q, b));
  if (abs_of(checked_add(r, r)) > abs_of(b)) q = ((r < 0) == (b < 0)) ? checked_add(q, Int(1)) : checked_sub(q, Int(1));
  return q;
}

}  // namespace detail

template <typename Int>
IntMatrix<Int> multiply(const IntMatrix<Int>& a, const IntMatrix<Int>& b) {
  if (a.cols != b.rows) throw InvalidInput("matrix shapes do not compose");
  IntMatrix<Int> c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      if (a(i, k) == 0) continue;
      for (int j = 0; j < b.cols; ++j)
        c(i, j) = detail::checked_add(c(i, j), detail::checked_mul(a(i, k), b(k, j)));
    }
  return c;
}

/// U * A * V = D with U, V unimodular and D diagonal, d1 | d2 | ... , d_i >= 0.
template <typename Int>
struct SmithForm {
  IntMatrix<Int> U, D, V;
  std::vector<Int> diagonal() const {
    std::vector<Int> d;
    for (int i = 0; i < std::min(D.rows, D.cols); ++i)
      if (D(i, i) != 0) d.push_back(D(i, i));
    return d;
  }
};

template <typename Int>
SmithForm<Int> smith_normal_form(const IntMatrix<Int>& a) {
  using detail::checked_add;
  using detail::checked_mul;
  using detail::checked_neg;
  using detail::checked_sub;
  const int m = a.rows, n = a.cols;
  SmithForm<Int> s{IntMatrix<Int>::identity(m), a, IntMatrix<Int>::identity(n)};
  auto& d = s.D;

  auto swap_rows = [&](int i, int j) {
    if (i == j) return;
    for (int c = 0; c < n; ++c) std::swap(d(i, c), d(j, c));
    for (int c = 0; c < m; ++c) std::swap(s.U(i, c), s.U(j, c));
  };
  auto swap_cols = [&](int i, int j) {
    if (i == j) return;
    for (int r = 0; r < m; ++r) std::swap(d(r, i), d(r, j));
    for (int r = 0; r < n; ++r) std::swap(s.V(r, i), s.V(r, j));
  };
  // row_i -= q row_j
  auto row_axpy = [&](int i, int j, const Int& q) {
    for (int c = 0; c < n; ++c) d(i, c) = checked_sub(d(i, c), checked_mul(q, d(j, c)));
    for (int c = 0; c < m; ++c) s.U(i, c) = checked_sub(s.U(i, c), checked_mul(q, s.U(j, c)));
  };
  auto col_axpy = [&](int i, int j, const Int& q) {
    for (int r = 0; r < m; ++r) d(r, i) = checked_sub(d(r, i), checked_mul(q, d(r, j)));
    for (int r = 0; r < n; ++r) s.V(r, i) = checked_sub(s.V(r, i), checked_mul(q, s.V(r, j)));
  };

  for (int t = 0; t < std::min(m, n); ++t) {
    // Pivot: smallest non-zero magnitude in the trailing block.
    int pi = -1, pj = -1;
    Int best = 0;
    for (int i = t; i < m; ++i)
      for (int j = t; j < n; ++j)
        if (d(i, j) != 0 && (pi < 0 || detail::abs_of(d(i, j)) < best)) {
          best = detail::abs_of(d(i, j));
          pi = i;
          pj = j;
        }
    if (pi < 0) break;
    swap_rows(t, pi);
    swap_cols(t, pj);

    for (;;) {
      bool dirty = false;
      for (int i = t + 1; i < m; ++i) {
        if (d(i, t) == 0) continue;
        row_axpy(i, t, detail::nearest_quotient(d(i, t), d(t, t)));
        if (d(i, t) != 0) {
          swap_rows(t, i);
          dirty = true;
        }
      }
      for (int j = t + 1; j < n; ++j) {
        if (d(t, j) == 0) continue;
        col_axpy(j, t, detail::nearest_quotient(d(t, j), d(t, t)));
        if (d(t, j) != 0) {
          swap_cols(t, j);
          dirty = true;
        }
      }
      if (dirty) continue;
      // Enforce divisibility of the trailing block by the pivot.
      int bad = -1;
      for (int i = t + 1; i < m && bad < 0; ++i)
        for (int j = t + 1; j < n; ++j)
          if (d(i, j) % d(t, t) != 0) {
            bad = i;
            break;
          }
      if (bad < 0) break;
      // row_t += row_bad
      for (int c = 0; c < n; ++c) d(t, c) = checked_add(d(t, c), d(bad, c));
      for (int c = 0; c < m; ++c) s.U(t, c) = checked_add(s.U(t, c), s.U(bad, c));
    }
    if (d(t, t) < 0) {
      for (int c = 0; c < n; ++c) d(t, c) = checked_neg(d(t, c));
      for (int c = 0; c < m; ++c) s.U(t, c) = checked_neg(s.U(t, c));
    }
  }
  return s;
}

/// C_0 <- C_1 <- ... ; boundaries[k-1] is the matrix of d_k : C_k -> C_{k-1}
/// with shape dims[k-1] x dims[k].
struct ChainComplex {
  std::vector<int> dims;
  std::vector<IntMatrix<std::int64_t>> boundaries;

  int top() const { return static_cast<int>(dims.size()) - 1; }
  int euler() const {
    int chi = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) chi += (k % 2 ? -1 : 1) * dims[k];
    return chi;
  }
  void validate() const {
    if (dims.empty()) {
      if (!boundaries.empty()) throw InvalidInput("boundaries without cells");
      return;
    }
    if (boundaries.size() + 1 != dims.size()) throw InvalidInput("one boundary matrix per positive degree");
    for (std::size_t k = 0; k < boundaries.size(); ++k)
      if (boundaries[k].rows != dims[k] || boundaries[k].cols != dims[k + 1])
        throw InvalidInput("boundary matrix " + std::to_string(k + 1) + " has the wrong shape");
  }
  /// Exact check of d_{k} d_{k+1} = 0 for all k.
  bool boundary_squared_zero() const {
    for (std::size_t k = 0; k + 1 < boundaries.size(); ++k)
      if (!multiply(boundaries[k].cast<BigInt>(), boundaries[k + 1].cast<BigInt>()).is_zero()) return false;
    return true;
  }
};

/// Cellular chain complex of a graph; loops have zero boundary.
inline ChainComplex graph_complex(int vertices, const std::vector<std::pair<int, int>>& edges) {
  ChainComplex c;
  if (vertices == 0 && edges.empty()) return c;
  c.dims = {vertices, static_cast<int>(edges.size())};
  IntMatrix<std::int64_t> d1(vertices, static_cast<int>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    if (a < 0 || b < 0 || a >= vertices || b >= vertices) throw DanglingEdge("edge endpoint out of range");
    d1(b, int(e)) += 1;
    d1(a, int(e)) -= 1;
  }
  c.boundaries.push_back(d1);
  return c;
}

struct HomologyResult {
  std::vector<int> betti;
  std::vector<std::vector<long>> torsion;  // invariant factors > 1, per degree

  int rank(int k) const { return k < int(betti.size()) ? betti[k] : 0; }
  bool trivial_in(int k) const {
    return rank(k) == 0 && (k >= int(torsion.size()) || torsion[k].empty());
  }
  int euler() const {
    int chi = 0;
    for (std::size_t k = 0; k < betti.size(); ++k) chi += (k % 2 ? -1 : 1) * betti[k];
    return chi;
  }
  bool operator==(const HomologyResult&) const = default;
};

namespace detail {

template <typename Int>
std::vector<Int> invariant_factors(const IntMatrix<Int>& m) {
  if (m.rows == 0 || m.cols == 0) return {};
  return smith_normal_form(m).diagonal();
}

template <typename Int>
HomologyResult homology_with(const ChainComplex& c) {
  HomologyResult h;
  const int top = c.top();
  std::vector<std::vector<Int>> factors(c.boundaries.size());
  for (std::size_t k = 0; k < c.boundaries.size(); ++k)
    factors[k] = invariant_factors(c.boundaries[k].template cast<Int>());
  auto rank_of = [&](int k) {  // rank of d_k, zero outside the complex
    return (k >= 1 && k <= int(factors.size())) ? int(factors[k - 1].size()) : 0;
  };
  for (int k = 0; k <= top; ++k) {
    h.betti.push_back(c.dims[k] - rank_of(k) - rank_of(k + 1));
    std::vector<long> tors;
    if (k + 1 <= int(factors.size()))
      for (const Int& f : factors[k])
        if (f > 1) tors.push_back(static_cast<long>(f));
    h.torsion.push_back(tors);
  }
  return h;
}

}  // namespace detail

/// Betti numbers and torsion over Z. Runs on int64 and falls back to
/// arbitrary precision when an intermediate entry would overflow.
inline HomologyResult homology(const ChainComplex& c) {
  c.validate();
  try {
    return detail::homology_with<std::int64_t>(c);
  } catch (const OverflowGuard&) {
    return detail::homology_with<BigInt>(c);
  }
}

/// Homology of X \ D up to degree n for the catalog divisors.
inline HomologyResult oracle_complement(const DivisorDescriptor& d) {
  const auto& var = d.variety;
  HomologyResult h;
  switch (var.kind()) {
    case VarietyKind::CP1: {
      const int m = d.distinct_points();
      if (m < 1) throw OutOfCatalog("empty divisor");
      h.betti = {1, m - 1};
      h.torsion = {{}, {}};
      return h;
    }
    case VarietyKind::CP2: {
      const int k = var.factors()[0].level;
      if (d.type == DivisorType::Smooth) {
        h.betti = {1, 0, (k - 1) * (k - 2)};
        h.torsion = {{}, k > 1 ? std::vector<long>{k} : std::vector<long>{}, {}};
        return h;
      }
      if (k == 2 && d.type == DivisorType::Reducible) {  // C x C*
        h.betti = {1, 1, 0};
        h.torsion = {{}, {}, {}};
        return h;
      }
      if (k == 2 && d.type == DivisorType::NonReduced) {  // C^2
        h.betti = {1, 0, 0};
        h.torsion = {{}, {}, {}};
        return h;
      }
      break;
    }
    case VarietyKind::QuadricP1xP1: {
      const int a = var.factors()[0].level, b = var.factors()[1].level;
      if (a >= 1 && b >= 1 && d.type == DivisorType::Smooth) {
        const int g = std::gcd(a, b);
        h.betti = {1, 0, 1 + 2 * (a - 1) * (b - 1)};
        h.torsion = {{}, g > 1 ? std::vector<long>{g} : std::vector<long>{}, {}};
        return h;
      }
      if (a == 1 && b == 1 && d.type == DivisorType::Reducible) {  // C x C
        h.betti = {1, 0, 0};
        h.torsion = {{}, {}, {}};
        return h;
      }
      break;
    }
  }
  throw OutOfCatalog("no closed-form complement homology for " + var.name() + " with a " +
                     to_string(d.type) + " divisor");
}

enum class VerdictSource { NumericSkeleton, AnalyticOracle, Both };

inline std::string to_string(VerdictSource s) {
  switch (s) {
    case VerdictSource::NumericSkeleton: return "numeric-skeleton";
    case VerdictSource::AnalyticOracle: return "analytic-oracle";
    case VerdictSource::Both: return "both";
  }
  return "?";
}

struct ShadowVerdict {
  bool nonempty = false;
  int components = 0;
  VerdictSource source = VerdictSource::AnalyticOracle;
  bool agreement = true;
};

/// Shadow is non-empty iff H_n(X \ D) != 0, with rank H_n components.
/// Throws Inconsistent when both sources are given and differ in degrees <= n.
inline ShadowVerdict verdict(int n, const std::optional<HomologyResult>& skeleton,
                             const std::optional<HomologyResult>& oracle) {
  if (!skeleton && !oracle) throw InvalidInput("verdict needs at least one homology source");
  ShadowVerdict v;
  const HomologyResult& primary = oracle ? *oracle : *skeleton;
  if (skeleton && oracle) {
    v.source = VerdictSource::Both;
    for (int k = 0; k <= n; ++k) {
      // The skeleton is a deformation retract of the complement, so all
      // degrees must match, torsion included.
      const auto tk = [&](const HomologyResult& h) {
        return k < int(h.torsion.size()) ? h.torsion[k] : std::vector<long>{};
      };
      if (skeleton->rank(k) != oracle->rank(k) || tk(*skeleton) != tk(*oracle)) v.agreement = false;
    }
    if (!v.agreement)
      throw Inconsistent("skeleton homology disagrees with the analytic oracle in degree <= " +
                         std::to_string(n));
  } else {
    v.source = oracle ? VerdictSource::AnalyticOracle : VerdictSource::NumericSkeleton;
  }
  v.components = primary.rank(n);
  v.nonempty = !primary.trivial_in(n);
  return v;
}

}  // namespace shadow
