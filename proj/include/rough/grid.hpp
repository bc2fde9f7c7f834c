#pragma once

// Time grids, grid paths, 1- and 2-increments and the finite-difference
// operators delta / N / N2, together with Holder-type seminorm estimators.
//
// All values are immutable after construction and every operation is a pure
// function, so concurrent reads are safe.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rough {

/// Evaluation rule for a 2-increment: writes the tensor value for the ordered
/// pair (i, j), i <= j, into `out` (flattened row-major components).
using PairEval = std::function<void(std::size_t i, std::size_t j, double* out)>;

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

// Scan budgets: full pair scans are O(n^2) and full triple scans O(n^3), so
// past these point counts the norm estimators fall back to dyadic-scale
// subsampling (all pairs (i, i + 2^k), triples (i, i + 2^k, i + 2^k + 2^m)).
inline constexpr std::size_t kExactPairPoints = 4097;
inline constexpr std::size_t kExactTriplePoints = 257;

enum class ScanPolicy { automatic, exact, dyadic };

/// Strictly increasing sample times t_0 < t_1 < ... < t_n.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    detail::require(times_.size() >= 2, "TimeGrid: need at least 2 points");
    for (std::size_t i = 0; i + 1 < times_.size(); ++i)
      detail::require(times_[i] < times_[i + 1],
                      "TimeGrid: times must be strictly increasing");
  }

  static TimeGrid uniform(double t0, double t1, std::size_t cells) {
    detail::require(cells >= 1 && t1 > t0, "TimeGrid::uniform: bad range");
    std::vector<double> ts(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
      ts[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(cells);
    ts[cells] = t1;
    return TimeGrid(std::move(ts));
  }

  std::size_t points() const { return times_.size(); }
  std::size_t cells() const { return times_.size() - 1; }
  double operator[](std::size_t i) const { return times_[i]; }
  const std::vector<double>& times() const { return times_; }
  double front() const { return times_.front(); }
  double back() const { return times_.back(); }
  double span() const { return times_.back() - times_.front(); }

  double mesh() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < times_.size(); ++i)
      m = std::max(m, times_[i + 1] - times_[i]);
    return m;
  }

  /// Sub-grid on the inclusive index range [lo, hi].
  TimeGrid restrict(std::size_t lo, std::size_t hi) const {
    detail::require(lo < hi && hi < times_.size(), "TimeGrid::restrict: bad range");
    return TimeGrid(std::vector<double>(times_.begin() + static_cast<std::ptrdiff_t>(lo),
                                        times_.begin() + static_cast<std::ptrdiff_t>(hi) + 1));
  }

  /// Keeps every `stride`-th point; cells() must be divisible by stride.
  TimeGrid coarsen(std::size_t stride) const {
    detail::require(stride >= 1 && cells() % stride == 0,
                    "TimeGrid::coarsen: cells not divisible by stride");
    std::vector<double> ts;
    ts.reserve(cells() / stride + 1);
    for (std::size_t i = 0; i < times_.size(); i += stride) ts.push_back(times_[i]);
    return TimeGrid(std::move(ts));
  }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.times_ == b.times_;
  }

 private:
  std::vector<double> times_;
};

/// A path sampled on a grid: one vector in R^dim per grid time.
class GridPath {
 public:
  GridPath(TimeGrid grid, std::size_t dim)
      : grid_(std::move(grid)), dim_(dim), data_(grid_.points() * dim, 0.0) {
    detail::require(dim >= 1, "GridPath: dim must be >= 1");
  }

  GridPath(TimeGrid grid, std::size_t dim, std::vector<double> data)
      : grid_(std::move(grid)), dim_(dim), data_(std::move(data)) {
    detail::require(dim >= 1, "GridPath: dim must be >= 1");
    detail::require(data_.size() == grid_.points() * dim_,
                    "GridPath: values.length must equal grid.times.length");
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t dim() const { return dim_; }
  std::size_t points() const { return grid_.points(); }

  std::span<const double> value(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> at(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double scale() const { return detail::max_abs(data_); }

  GridPath restrict(std::size_t lo, std::size_t hi) const {
    TimeGrid g = grid_.restrict(lo, hi);
    std::vector<double> d(data_.begin() + static_cast<std::ptrdiff_t>(lo * dim_),
                          data_.begin() + static_cast<std::ptrdiff_t>((hi + 1) * dim_));
    return GridPath(std::move(g), dim_, std::move(d));
  }

 private:
  TimeGrid grid_;
  std::size_t dim_;
  std::vector<double> data_;
};

/// A 2-increment: tensor values on ordered grid pairs (i < j), zero on the
/// diagonal (the diagonal is implied, not stored).
class Increment2 {
 public:
  Increment2(TimeGrid grid, std::size_t comps)
      : grid_(std::move(grid)),
        comps_(comps),
        data_(pair_count(grid_.points()) * comps, 0.0) {
    detail::require(comps >= 1, "Increment2: comps must be >= 1");
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t comps() const { return comps_; }
  std::size_t points() const { return grid_.points(); }

  /// Mutable access, strictly i < j.
  std::span<double> at(std::size_t i, std::size_t j) {
    detail::require(i < j && j < points(), "Increment2::at: need i < j < points");
    return {data_.data() + index(i, j) * comps_, comps_};
  }

  std::span<const double> pair(std::size_t i, std::size_t j) const {
    detail::require(i < j && j < points(), "Increment2::pair: need i < j < points");
    return {data_.data() + index(i, j) * comps_, comps_};
  }

  /// Writes the value for any ordered pair i <= j (diagonal gives zeros).
  void value(std::size_t i, std::size_t j, double* out) const {
    if (i == j) {
      std::fill(out, out + comps_, 0.0);
      return;
    }
    auto v = pair(i, j);
    std::copy(v.begin(), v.end(), out);
  }

  double scale() const { return detail::max_abs(data_); }

  Increment2 restrict(std::size_t lo, std::size_t hi) const {
    Increment2 r(grid_.restrict(lo, hi), comps_);
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = i + 1; j <= hi; ++j) {
        auto src = pair(i, j);
        auto dst = r.at(i - lo, j - lo);
        std::copy(src.begin(), src.end(), dst.begin());
      }
    return r;
  }

  static std::size_t pair_count(std::size_t points) {
    return points * (points - 1) / 2;
  }

 private:
  // Row-major over i: row i holds pairs (i, i+1) .. (i, n-1).
  std::size_t index(std::size_t i, std::size_t j) const {
    const std::size_t p = points();
    return i * (2 * p - i - 1) / 2 + (j - i - 1);
  }

  TimeGrid grid_;
  std::size_t comps_;
  std::vector<double> data_;
};

/// Lazily evaluated 3-increment (values on ordered triples i <= u <= j).
/// Never stored densely; degenerate triples follow the defining formula of
/// the producing rule.
struct Increment3View {
  const TimeGrid* grid = nullptr;
  std::size_t comps = 0;
  std::function<void(std::size_t i, std::size_t u, std::size_t j, double* out)> eval;
};

/// Lazily evaluated rule on ordered quadruples i <= u <= v <= j.
struct Increment4View {
  const TimeGrid* grid = nullptr;
  std::size_t comps = 0;
  std::function<void(std::size_t i, std::size_t u, std::size_t v, std::size_t j,
                     double* out)>
      eval;
};

/// (delta A)_{st} = A_t - A_s.
inline Increment2 delta(const GridPath& path) {
  Increment2 r(path.grid(), path.dim());
  const std::size_t n = path.points();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    auto vi = path.value(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto vj = path.value(j);
      auto out = r.at(i, j);
      for (std::size_t c = 0; c < path.dim(); ++c) out[c] = vj[c] - vi[c];
    }
  }
  return r;
}

/// N applied to an arbitrary pair rule: (N R)_{sut} = R_{st} - R_{ut} - R_{su}.
inline Increment3View n_view(const TimeGrid& grid, std::size_t comps, PairEval eval) {
  Increment3View v;
  v.grid = &grid;
  v.comps = comps;
  v.eval = [comps, eval = std::move(eval)](std::size_t i, std::size_t u, std::size_t j,
                                           double* out) {
    std::vector<double> a(comps), b(comps);
    eval(i, j, out);
    eval(u, j, a.data());
    eval(i, u, b.data());
    for (std::size_t c = 0; c < comps; ++c) out[c] -= a[c] + b[c];
  };
  return v;
}

/// N of a stored 2-increment. The increment must outlive the view; rvalues
/// are rejected so the view cannot dangle.
inline Increment3View n_op(const Increment2& r) {
  return n_view(r.grid(), r.comps(),
                [rp = &r](std::size_t i, std::size_t j, double* out) {
                  rp->value(i, j, out);
                });
}
Increment3View n_op(Increment2&&) = delete;

/// (N2 A)_{suvt} = -A_{uvt} + A_{svt} - A_{sut} + A_{suv}.
inline Increment4View n2_op(const Increment3View& a) {
  Increment4View v;
  v.grid = a.grid;
  v.comps = a.comps;
  v.eval = [comps = a.comps, eval = a.eval](std::size_t i, std::size_t u, std::size_t w,
                                            std::size_t j, double* out) {
    std::vector<double> t1(comps), t2(comps), t3(comps);
    eval(u, w, j, out);
    eval(i, w, j, t1.data());
    eval(i, u, j, t2.data());
    eval(i, u, w, t3.data());
    for (std::size_t c = 0; c < comps; ++c) out[c] = -out[c] + t1[c] - t2[c] + t3[c];
  };
  return v;
}

namespace detail {

inline bool use_exact(ScanPolicy policy, std::size_t points, std::size_t limit) {
  switch (policy) {
    case ScanPolicy::exact: return true;
    case ScanPolicy::dyadic: return false;
    case ScanPolicy::automatic: return points <= limit;
  }
  return true;
}

template <typename Fn>
void for_pairs(std::size_t lo, std::size_t hi, bool exact, Fn&& fn) {
  if (exact) {
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t j = i + 1; j <= hi; ++j) fn(i, j);
    return;
  }
  for (std::size_t gap = 1; gap <= hi - lo; gap *= 2)
    for (std::size_t i = lo; i + gap <= hi; ++i) fn(i, i + gap);
}

template <typename Fn>
void for_triples(std::size_t lo, std::size_t hi, bool exact, Fn&& fn) {
  if (exact) {
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t u = i + 1; u < hi; ++u)
        for (std::size_t j = u + 1; j <= hi; ++j) fn(i, u, j);
    return;
  }
  for (std::size_t g1 = 1; g1 <= hi - lo; g1 *= 2)
    for (std::size_t g2 = 1; g1 + g2 <= hi - lo; g2 *= 2)
      for (std::size_t i = lo; i + g1 + g2 <= hi; ++i) fn(i, i + g1, i + g1 + g2);
}

}  // namespace detail

/// sup over sampled ordered pairs of |R_{st}| / |t-s|^gamma on [lo, hi].
inline double holder_norm(const Increment2& r, double gamma,
                          ScanPolicy policy = ScanPolicy::automatic,
                          std::size_t lo = 0,
                          std::size_t hi = std::numeric_limits<std::size_t>::max()) {
  detail::require(gamma > 0.0, "holder_norm: gamma must be > 0");
  if (hi == std::numeric_limits<std::size_t>::max()) hi = r.points() - 1;
  detail::require(lo < hi && hi < r.points(), "holder_norm: bad index range");
  const auto& t = r.grid().times();
  const bool exact = detail::use_exact(policy, hi - lo + 1, kExactPairPoints);
  double sup = 0.0;
  detail::for_pairs(lo, hi, exact, [&](std::size_t i, std::size_t j) {
    const double num = detail::max_abs(r.pair(i, j));
    if (num == 0.0) return;
    sup = std::max(sup, num / std::pow(t[j] - t[i], gamma));
  });
  return sup;
}

/// sup over sampled ordered triples of |A_{sut}| / (|u-s|^rho |t-u|^gamma).
/// Degenerate triples (u = s or t = u), where numerator and denominator both
/// vanish, are skipped.
inline double holder_norm2(const Increment3View& a, double rho, double gamma,
                           ScanPolicy policy = ScanPolicy::automatic,
                           std::size_t lo = 0,
                           std::size_t hi = std::numeric_limits<std::size_t>::max()) {
  detail::require(rho > 0.0 && gamma > 0.0, "holder_norm2: exponents must be > 0");
  if (hi == std::numeric_limits<std::size_t>::max()) hi = a.grid->points() - 1;
  detail::require(lo < hi && hi < a.grid->points(), "holder_norm2: bad index range");
  const auto& t = a.grid->times();
  const bool exact = detail::use_exact(policy, hi - lo + 1, kExactTriplePoints);
  std::vector<double> buf(a.comps);
  double sup = 0.0;
  detail::for_triples(lo, hi, exact, [&](std::size_t i, std::size_t u, std::size_t j) {
    a.eval(i, u, j, buf.data());
    const double num = detail::max_abs(buf);
    if (num == 0.0) return;
    sup = std::max(sup, num / (std::pow(t[u] - t[i], rho) * std::pow(t[j] - t[u], gamma)));
  });
  return sup;
}

struct PatchBound {
  double lhs;  // measured ||R||_{gamma} on the full interval
  double rhs;  // 2 (||R||_{gamma,I} + ||R||_{gamma,J}) + ||N R||_{rho1,rho2}
};

/// Full-interval Holder norm against the patching bound across a split index.
/// Requires rho1 + rho2 = gamma.
inline PatchBound patch_norm_bound(const Increment2& r, std::size_t split, double gamma,
                                   double rho1, double rho2,
                                   ScanPolicy policy = ScanPolicy::automatic) {
  const std::size_t last = r.points() - 1;
  detail::require(split > 0 && split < last, "patch_norm_bound: split index out of range");
  detail::require(std::abs(rho1 + rho2 - gamma) < 1e-12,
                  "patch_norm_bound: need rho1 + rho2 = gamma");
  PatchBound b{};
  b.lhs = holder_norm(r, gamma, policy);
  const double left = holder_norm(r, gamma, policy, 0, split);
  const double right = holder_norm(r, gamma, policy, split, last);
  const double nr = holder_norm2(n_op(r), rho1, rho2, policy);
  b.rhs = 2.0 * (left + right) + nr;
  return b;
}

}  // namespace rough
