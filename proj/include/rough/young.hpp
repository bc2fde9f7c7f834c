#pragma once

// Young integration of C^rho paths against C^gamma paths (gamma + rho > 1)
// via compensated left sums, with the remainder bound of the sewing map and
// dyadic convergence-rate measurement.

#include <cmath>
#include <cstddef>
#include <vector>

#include "rough/grid.hpp"
#include "rough/sewing.hpp"

namespace rough {

/// Germ F_s . deltaX(s,t). When f is operator-valued (dim m*d against a
/// driver of dim d) the contraction is matrix-vector, row-major.
inline Germ young_germ(const GridPath& f, const GridPath& x, double rho = 1.0,
                       double gamma = 1.0) {
  detail::require(f.grid() == x.grid(), "young_germ: mismatched grids");
  const std::size_t d = x.dim();
  detail::require(f.dim() % d == 0,
                  "young_germ: f.dim must be a multiple of x.dim");
  const std::size_t m = f.dim() / d;
  std::vector<double> fd = f.data();
  std::vector<double> xd = x.data();
  auto eval = [m, d, fd = std::move(fd), xd = std::move(xd)](
                  std::size_t i, std::size_t j, double* out) {
    const double* fi = fd.data() + i * m * d;
    const double* xi = xd.data() + i * d;
    const double* xj = xd.data() + j * d;
    for (std::size_t r = 0; r < m; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += fi[r * d + c] * (xj[c] - xi[c]);
      out[r] = acc;
    }
  };
  return Germ(x.grid(), m, std::move(eval), {{rho, gamma}});
}

/// I(t_k) = sum_{j<k} F(t_j) . deltaX(t_j, t_{j+1}); identical to sewing the
/// Young germ on the same grid.
inline GridPath young_integral(const GridPath& f, const GridPath& x) {
  return sew(young_germ(f, x));
}

/// Remainder bound (1 / (2^{gamma+rho} - 2)) ||deltaF||_rho ||deltaX||_gamma.
inline double young_remainder_bound(const GridPath& f, const GridPath& x, double gamma,
                                    double rho, ScanPolicy policy = ScanPolicy::automatic) {
  detail::require(gamma + rho > 1.0, "young_remainder_bound: need gamma + rho > 1");
  const double nf = holder_norm(delta(f), rho, policy);
  const double nx = holder_norm(delta(x), gamma, policy);
  return nf * nx / (std::pow(2.0, gamma + rho) - 2.0);
}

/// Measured sup of |int_s^t (F_u - F_s) dX_u| / |t-s|^{gamma+rho} on the grid,
/// i.e. the Holder norm of Lambda N (F deltaX).
inline double young_remainder_measured(const GridPath& f, const GridPath& x, double gamma,
                                       double rho,
                                       ScanPolicy policy = ScanPolicy::automatic) {
  return holder_norm(lambda_of_germ(young_germ(f, x, rho, gamma)), gamma + rho, policy);
}

/// Result of a dyadic refinement study. `exact` flags the degenerate case
/// where every coarsened sum equals the finest one, so no order can be (or
/// needs to be) fitted.
struct RateStudy {
  bool exact = false;
  double order = 0.0;
  std::vector<DyadicSumRow> rows;
  std::size_t fit_points = 0;
};

/// Least-squares slope of log(diff-to-finest) against log(mesh). The two
/// coarsest levels are pre-asymptotic and excluded whenever at least two
/// fit points remain. Differences at the floating round-off floor count as
/// zero, so telescoping sums report "exact" rather than a noise slope.
inline RateStudy fit_rate(std::vector<DyadicSumRow> rows) {
  RateStudy rs;
  rs.rows = std::move(rows);
  double value_scale = 1.0;
  if (!rs.rows.empty())
    for (double v : rs.rows.front().value)
      value_scale = std::max(value_scale, std::abs(v));
  const double floor = 1e-13 * value_scale;
  std::vector<std::pair<double, double>> pts;  // (log mesh, log diff)
  for (const auto& row : rs.rows) {
    if (row.level == 0) continue;
    if (row.diff_to_finest > floor)
      pts.emplace_back(std::log(row.mesh), std::log(row.diff_to_finest));
  }
  if (pts.empty()) {
    rs.exact = true;
    return rs;
  }
  // rows are ordered fine -> coarse; drop the two coarsest if enough remain.
  std::size_t drop = 0;
  while (drop < 2 && pts.size() - drop > 2) ++drop;
  pts.resize(pts.size() - drop);
  rs.fit_points = pts.size();
  if (pts.size() < 2) {
    rs.order = std::numeric_limits<double>::quiet_NaN();
    return rs;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [lx, ly] : pts) {
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(pts.size());
  rs.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return rs;
}

/// Fitted convergence order of the compensated Young sums under dyadic
/// refinement; the theoretical order is gamma + rho - 1.
inline RateStudy young_rate(const GridPath& f, const GridPath& x, double gamma, double rho,
                            std::size_t levels) {
  detail::require(levels >= 3, "young_rate: need levels >= 3");
  return fit_rate(dyadic_sums(young_germ(f, x, rho, gamma), levels));
}

}  // namespace rough
