#pragma once

// Truncated tensor-algebra functionals on grid pairs: the Chen product,
// construction from level-2 rough paths, extension to higher levels through
// dyadic sub-chaining, multiplicative-defect measurement and the
// almost-multiplicative -> multiplicative correction.
//
// Storage is adjacent-pair only; values on general pairs are derived by Chen
// chaining, which keeps the multiplicativity invariant self-maintaining.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "rough/controlled.hpp"
#include "rough/grid.hpp"

namespace rough {

/// An element of the truncated tensor algebra T^(n)(R^d): one flat row-major
/// tensor per level k = 0..n (level k holds d^k entries).
struct TensorSeries {
  std::size_t dim = 0;
  std::vector<std::vector<double>> levels;

  std::size_t depth() const { return levels.empty() ? 0 : levels.size() - 1; }

  static std::size_t level_size(std::size_t dim, std::size_t k) {
    std::size_t s = 1;
    for (std::size_t i = 0; i < k; ++i) s *= dim;
    return s;
  }

  static TensorSeries zero(std::size_t dim, std::size_t depth) {
    TensorSeries t;
    t.dim = dim;
    t.levels.resize(depth + 1);
    for (std::size_t k = 0; k <= depth; ++k) t.levels[k].assign(level_size(dim, k), 0.0);
    return t;
  }

  static TensorSeries unit(std::size_t dim, std::size_t depth) {
    TensorSeries t = zero(dim, depth);
    t.levels[0][0] = 1.0;
    return t;
  }

  TensorSeries truncated(std::size_t depth) const {
    TensorSeries t;
    t.dim = dim;
    for (std::size_t k = 0; k <= depth; ++k)
      t.levels.push_back(k < levels.size() ? levels[k]
                                           : std::vector<double>(level_size(dim, k), 0.0));
    return t;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& lvl : levels)
      for (double v : lvl) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Truncated tensor product accumulated into a preallocated output (zeroed
/// here); out must not alias a or b.
inline void chen_mul_into(TensorSeries& out, const TensorSeries& a,
                          const TensorSeries& b, std::size_t depth) {
  for (std::size_t k = 0; k <= depth; ++k) {
    auto& dst = out.levels[k];
    std::fill(dst.begin(), dst.end(), 0.0);
    for (std::size_t i = 0; i <= k; ++i) {
      const auto& la = a.levels[i];
      const auto& lb = b.levels[k - i];
      std::size_t idx = 0;
      for (double va : la)
        for (double vb : lb) dst[idx++] += va * vb;
    }
  }
}

/// Truncated tensor product: out_k = sum_{i+j=k} a_i (x) b_j.
inline TensorSeries chen_mul(const TensorSeries& a, const TensorSeries& b,
                             std::size_t depth) {
  detail::require(a.dim == b.dim, "chen_mul: dimension mismatch");
  detail::require(a.depth() >= depth && b.depth() >= depth,
                  "chen_mul: inputs shallower than requested depth");
  TensorSeries out = TensorSeries::zero(a.dim, depth);
  chen_mul_into(out, a, b, depth);
  return out;
}

inline TensorSeries chen_mul(const TensorSeries& a, const TensorSeries& b) {
  return chen_mul(a, b, std::min(a.depth(), b.depth()));
}

namespace detail {

inline TensorSeries ts_axpy(const TensorSeries& a, double c, const TensorSeries& b) {
  TensorSeries out = a;
  for (std::size_t k = 0; k < out.levels.size() && k < b.levels.size(); ++k)
    for (std::size_t q = 0; q < out.levels[k].size(); ++q)
      out.levels[k][q] += c * b.levels[k][q];
  return out;
}

inline TensorSeries ts_scale(const TensorSeries& a, double c) {
  TensorSeries out = a;
  for (auto& lvl : out.levels)
    for (double& v : lvl) v *= c;
  return out;
}

}  // namespace detail

/// Tensor logarithm of a series with unit scalar part; the expansion
/// terminates because (z - 1) has no level-0 component.
inline TensorSeries tensor_log(const TensorSeries& z) {
  const std::size_t depth = z.depth();
  TensorSeries x = z;
  x.levels[0][0] -= 1.0;
  TensorSeries acc = TensorSeries::zero(z.dim, depth);
  TensorSeries power = TensorSeries::unit(z.dim, depth);
  for (std::size_t k = 1; k <= depth; ++k) {
    power = chen_mul(power, x, depth);
    acc = detail::ts_axpy(acc, (k % 2 == 1 ? 1.0 : -1.0) / double(k), power);
  }
  return acc;
}

/// Tensor exponential of a series with zero scalar part.
inline TensorSeries tensor_exp(const TensorSeries& y) {
  const std::size_t depth = y.depth();
  TensorSeries acc = TensorSeries::unit(y.dim, depth);
  TensorSeries power = TensorSeries::unit(y.dim, depth);
  double fact = 1.0;
  for (std::size_t k = 1; k <= depth; ++k) {
    power = chen_mul(power, y, depth);
    fact *= double(k);
    acc = detail::ts_axpy(acc, 1.0 / fact, power);
  }
  return acc;
}

/// Multiplicative tensor functional stored on adjacent pairs; values on
/// general pairs are Chen products of the stored cells.
class TensorFunc {
 public:
  TensorFunc(TimeGrid grid, std::size_t dim, std::size_t depth,
             std::vector<TensorSeries> adjacent, double p_rough)
      : grid_(std::move(grid)),
        dim_(dim),
        depth_(depth),
        adjacent_(std::move(adjacent)),
        p_rough_(p_rough) {
    detail::require(adjacent_.size() == grid_.cells(),
                    "TensorFunc: one series per adjacent pair required");
    for (auto& s : adjacent_) {
      detail::require(s.dim == dim_ && s.depth() == depth_,
                      "TensorFunc: inconsistent cell series");
      detail::require(std::abs(s.levels[0][0] - 1.0) <= 1e-14,
                      "TensorFunc: level-0 component must be 1");
      detail::require(std::isfinite(s.max_abs()), "TensorFunc: non-finite cell value");
    }
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  std::size_t depth() const { return depth_; }
  double p_rough() const { return p_rough_; }
  const std::vector<TensorSeries>& adjacent() const { return adjacent_; }

  /// Z(i,j) by chaining; Z(i,i) is the unit.
  TensorSeries value(std::size_t i, std::size_t j) const {
    detail::require(i <= j && j < grid_.points(), "TensorFunc::value: bad pair");
    TensorSeries acc = TensorSeries::unit(dim_, depth_);
    for (std::size_t k = i; k < j; ++k) acc = chen_mul(acc, adjacent_[k], depth_);
    return acc;
  }

 private:
  TimeGrid grid_;
  std::size_t dim_;
  std::size_t depth_;
  std::vector<TensorSeries> adjacent_;
  double p_rough_;
};

/// Pair-evaluable tensor functional, used for almost-multiplicative inputs
/// that cannot be represented by adjacent chaining.
struct TensorPairFn {
  TimeGrid grid;
  std::size_t dim = 0;
  std::size_t depth = 0;
  double z_decl = 0.0;  // declared remainder exponent of the defect
  std::function<TensorSeries(std::size_t, std::size_t)> eval;
};

inline TensorPairFn as_pair_fn(const TensorFunc& z, double z_decl = 2.0) {
  auto shared = std::make_shared<TensorFunc>(z);
  return TensorPairFn{z.grid(), z.dim(), z.depth(), z_decl,
                      [shared](std::size_t i, std::size_t j) {
                        return shared->value(i, j);
                      }};
}

/// Level-2 functional of a rough path: level 1 = deltaX, level 2 = XX per
/// cell. Chaining must reproduce XX on every pair (the Chen relation in
/// tensor form); a violation beyond tolerance rejects the input.
inline TensorFunc from_rough2(const RoughPath2& rp, double tol = 1e-12) {
  const std::size_t d = rp.dim();
  const std::size_t n = rp.grid().points();
  std::vector<TensorSeries> adj;
  adj.reserve(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    TensorSeries s = TensorSeries::unit(d, 2);
    auto xi = rp.x().value(k);
    auto xj = rp.x().value(k + 1);
    for (std::size_t c = 0; c < d; ++c) s.levels[1][c] = xj[c] - xi[c];
    auto x2 = rp.xx().pair(k, k + 1);
    s.levels[2].assign(x2.begin(), x2.end());
    adj.push_back(std::move(s));
  }
  TensorFunc z(rp.grid(), d, 2, std::move(adj), 1.0 / rp.gamma());

  const double scale = std::max({rp.xx().scale(), rp.x().scale() * rp.x().scale(), 1.0});
  double defect = 0.0;
  TensorSeries acc = TensorSeries::unit(d, 2);
  TensorSeries next = TensorSeries::zero(d, 2);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc = TensorSeries::unit(d, 2);
    for (std::size_t j = i + 1; j < n; ++j) {
      chen_mul_into(next, acc, z.adjacent()[j - 1], 2);
      std::swap(acc, next);
      auto want = rp.xx().pair(i, j);
      for (std::size_t q = 0; q < d * d; ++q)
        defect = std::max(defect, std::abs(acc.levels[2][q] - want[q]));
    }
  }
  if (defect > tol * scale)
    throw std::invalid_argument("from_rough2: Chen relation violated in tensor form");
  return z;
}

/// Max over sampled triples and levels of |Z(i,j) - Z(i,u) (x) Z(u,j)|.
inline double mult_defect(const TensorPairFn& fn,
                          ScanPolicy policy = ScanPolicy::automatic) {
  const std::size_t last = fn.grid.points() - 1;
  double defect = 0.0;
  detail::for_triples(0, last,
                      detail::use_exact(policy, fn.grid.points(), kExactTriplePoints),
                      [&](std::size_t i, std::size_t u, std::size_t j) {
                        const TensorSeries whole = fn.eval(i, j);
                        const TensorSeries prod =
                            chen_mul(fn.eval(i, u), fn.eval(u, j), fn.depth);
                        for (std::size_t k = 0; k <= fn.depth; ++k)
                          for (std::size_t q = 0; q < whole.levels[k].size(); ++q)
                            defect = std::max(defect, std::abs(whole.levels[k][q] -
                                                               prod.levels[k][q]));
                      });
  return defect;
}

/// Defect scan specialized to adjacent-pair storage. The exact mode chains a
/// full pair table left-to-right and checks every split against it; the
/// dyadic mode builds a doubling table and cross-checks opposite splits.
inline double mult_defect(const TensorFunc& z, ScanPolicy policy = ScanPolicy::automatic) {
  const std::size_t n = z.grid().points();
  const std::size_t d = z.dim();
  const std::size_t depth = z.depth();
  std::size_t series_len = 0;
  for (std::size_t k = 0; k <= depth; ++k) series_len += TensorSeries::level_size(d, k);
  const bool exact = detail::use_exact(policy, n, kExactTriplePoints) &&
                     Increment2::pair_count(n) * series_len <= (std::size_t{8} << 20);

  auto gap_against = [&](const TensorSeries& whole, const TensorSeries& left,
                         const TensorSeries& right, TensorSeries& buf) {
    chen_mul_into(buf, left, right, depth);
    double gap = 0.0;
    for (std::size_t k = 0; k <= depth; ++k)
      for (std::size_t q = 0; q < buf.levels[k].size(); ++q)
        gap = std::max(gap, std::abs(whole.levels[k][q] - buf.levels[k][q]));
    return gap;
  };

  TensorSeries buf = TensorSeries::zero(d, depth);
  double defect = 0.0;
  if (exact) {
    // W[i][j] left-chained once, O(n^2) products.
    std::vector<std::vector<TensorSeries>> table(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      table[i].reserve(n - 1 - i);
      TensorSeries acc = z.adjacent()[i];
      table[i].push_back(acc);
      for (std::size_t j = i + 2; j < n; ++j) {
        chen_mul_into(buf, acc, z.adjacent()[j - 1], depth);
        std::swap(acc, buf);
        table[i].push_back(acc);
      }
    }
    auto value_of = [&](std::size_t i, std::size_t j) -> const TensorSeries& {
      return table[i][j - i - 1];
    };
    for (std::size_t i = 0; i + 2 < n; ++i)
      for (std::size_t u = i + 1; u + 1 < n; ++u)
        for (std::size_t j = u + 1; j < n; ++j)
          defect = std::max(defect, gap_against(value_of(i, j), value_of(i, u),
                                                value_of(u, j), buf));
    return defect;
  }

  // Doubling table: dy[k][i] = Z(i, i + 2^k).
  std::vector<std::vector<TensorSeries>> dy;
  dy.push_back(z.adjacent());
  for (std::size_t k = 1; (std::size_t{1} << k) <= n - 1; ++k) {
    const std::size_t gap = std::size_t{1} << k;
    std::vector<TensorSeries> row;
    row.reserve(n - gap);
    for (std::size_t i = 0; i + gap < n; ++i)
      row.push_back(chen_mul(dy[k - 1][i], dy[k - 1][i + gap / 2], depth));
    dy.push_back(std::move(row));
  }
  for (std::size_t a = 0; (std::size_t{1} << a) < n; ++a)
    for (std::size_t b = 0; (std::size_t{1} << a) + (std::size_t{1} << b) < n; ++b) {
      const std::size_t g1 = std::size_t{1} << a, g2 = std::size_t{1} << b;
      for (std::size_t i = 0; i + g1 + g2 < n; ++i) {
        // Whole value associated at the opposite split so that the check is
        // not tautological (for g1 = g2 the doubling entry itself is used).
        TensorSeries whole = (a == b) ? dy[a + 1][i]
                                      : chen_mul(dy[b][i], dy[a][i + g2], depth);
        defect = std::max(defect, gap_against(whole, dy[a][i], dy[b][i + g1], buf));
      }
    }
  return defect;
}

/// Extension to level k+1: every cell is split into M equal sub-chains of
/// the geodesic root exp(log(cell)/M) with the new top level starting at 0;
/// chaining the sub-chain realizes the unique multiplicative continuation in
/// the M -> infinity limit. Requires (k+1) > p for the declared roughness.
inline TensorFunc extend_level(const TensorFunc& z, std::size_t fine_factor,
                               double defect_tol = 1e-10) {
  detail::require(fine_factor >= 1, "extend_level: fine factor must be >= 1");
  const std::size_t k = z.depth();
  detail::require(double(k + 1) > z.p_rough(),
                  "extend_level: need (k+1) > p for the declared roughness");
  const double scale = std::max(1.0, [&] {
    double m = 0.0;
    for (const auto& s : z.adjacent()) m = std::max(m, s.max_abs());
    return m;
  }());
  if (mult_defect(z) > defect_tol * scale)
    throw std::invalid_argument("extend_level: input defect above tolerance");

  std::vector<TensorSeries> adj;
  adj.reserve(z.grid().cells());
  for (const auto& cell : z.adjacent()) {
    const TensorSeries root = tensor_exp(detail::ts_scale(tensor_log(cell), 1.0 / double(fine_factor)));
    const TensorSeries sub = root.truncated(k + 1);  // top level starts at 0
    TensorSeries prod = TensorSeries::unit(z.dim(), k + 1);
    for (std::size_t s = 0; s < fine_factor; ++s) prod = chen_mul(prod, sub, k + 1);
    // Keep the exact lower levels; only the top level is new.
    TensorSeries out = cell.truncated(k + 1);
    out.levels[k + 1] = prod.levels[k + 1];
    adj.push_back(std::move(out));
  }
  return TensorFunc(z.grid(), z.dim(), k + 1, std::move(adj), z.p_rough());
}

struct MultiplicativizeResult {
  TensorFunc corrected;
  bool converged = false;
  std::vector<double> cauchy;  // gap between consecutive dyadic-level products
};

/// Corrects an almost-multiplicative functional by taking Chen products over
/// dyadic refinements of the interval; the finest (adjacent-cell) product is
/// returned as an exactly multiplicative functional. Convergence of the
/// refinement is monitored on the full interval and reported, since a defect
/// exponent z <= 1 makes the compensated limit diverge.
inline MultiplicativizeResult multiplicativize(const TensorPairFn& fn,
                                               std::size_t refinement_levels) {
  detail::require(fn.z_decl > 1.0,
                  "multiplicativize: declared defect exponent must exceed 1");
  detail::require(refinement_levels >= 2, "multiplicativize: need at least 2 levels");
  const std::size_t cells = fn.grid.cells();
  const std::size_t chunks = std::size_t{1} << refinement_levels;
  detail::require(cells % chunks == 0 && chunks <= cells,
                  "multiplicativize: cell count not divisible by 2^levels");

  auto product_at_level = [&](std::size_t lvl) {
    const std::size_t parts = std::size_t{1} << lvl;
    const std::size_t step = cells / parts;
    TensorSeries acc = TensorSeries::unit(fn.dim, fn.depth);
    for (std::size_t q = 0; q < parts; ++q)
      acc = chen_mul(acc, fn.eval(q * step, (q + 1) * step), fn.depth);
    return acc;
  };

  MultiplicativizeResult res{
      TensorFunc(fn.grid, fn.dim, fn.depth,
                 [&] {
                   std::vector<TensorSeries> adj;
                   adj.reserve(cells);
                   for (std::size_t c = 0; c < cells; ++c)
                     adj.push_back(fn.eval(c, c + 1));
                   return adj;
                 }(),
                 /*p_rough=*/fn.z_decl),
      false,
      {}};

  TensorSeries prev = product_at_level(0);
  for (std::size_t lvl = 1; lvl <= refinement_levels; ++lvl) {
    TensorSeries cur = product_at_level(lvl);
    double gap = 0.0;
    for (std::size_t k = 0; k <= fn.depth; ++k)
      for (std::size_t q = 0; q < cur.levels[k].size(); ++q)
        gap = std::max(gap, std::abs(cur.levels[k][q] - prev.levels[k][q]));
    res.cauchy.push_back(gap);
    prev = std::move(cur);
  }
  // Converged when the Cauchy gaps decrease on the whole (tiny gaps at the
  // round-off floor count as converged outright).
  const double floor = 1e-14 * std::max(1.0, prev.max_abs());
  if (res.cauchy.back() <= floor) {
    res.converged = true;
  } else {
    double log_ratio = 0.0;
    std::size_t cnt = 0;
    for (std::size_t q = 1; q < res.cauchy.size(); ++q) {
      if (res.cauchy[q - 1] <= 0.0 || res.cauchy[q] <= 0.0) continue;
      log_ratio += std::log(res.cauchy[q] / res.cauchy[q - 1]);
      ++cnt;
    }
    res.converged = cnt == 0 || (res.cauchy.back() < res.cauchy.front() &&
                                 std::exp(log_ratio / double(cnt)) < 0.97);
  }
  return res;
}

}  // namespace rough
