#pragma once

// The sewing map on grids. A germ Xi is a candidate integrand on ordered
// pairs; when its N-image has declared exponents summing above 1 there is a
// unique splitting Xi = delta(I) + R with R small, and on a finite grid the
// integral path I is realized exactly by the finest-grid compensated sum.
// Coarser dyadic sums are exposed for convergence diagnostics.

#include <cmath>
#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include "rough/grid.hpp"

namespace rough {

/// One declared component of N(Xi): a bound shape |u-s|^rho |t-u|^sigma.
struct ExponentPair {
  double rho;
  double sigma;
};

/// Grid integrand: an evaluation rule on ordered pairs plus caller-declared
/// exponent data for its N-image. The exponents are metadata; the library
/// checks the z > 1 gate but does not infer exponents from data.
class Germ {
 public:
  Germ(TimeGrid grid, std::size_t comps, PairEval eval,
       std::vector<ExponentPair> n_exponents)
      : grid_(std::move(grid)),
        comps_(comps),
        eval_(std::move(eval)),
        exps_(std::move(n_exponents)) {
    detail::require(comps_ >= 1, "Germ: comps must be >= 1");
    detail::require(!exps_.empty(), "Germ: need at least one declared exponent pair");
    for (const auto& e : exps_)
      detail::require(e.rho > 0.0 && e.sigma > 0.0, "Germ: exponents must be > 0");
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t comps() const { return comps_; }
  const std::vector<ExponentPair>& exponents() const { return exps_; }

  /// min over declared components of rho + sigma; uniqueness needs z > 1.
  double declared_z() const {
    double z = exps_.front().rho + exps_.front().sigma;
    for (const auto& e : exps_) z = std::min(z, e.rho + e.sigma);
    return z;
  }

  void eval(std::size_t i, std::size_t j, double* out) const {
    if (i == j) {
      std::fill(out, out + comps_, 0.0);
      return;
    }
    eval_(i, j, out);
  }

  Increment3View n_image() const {
    return n_view(grid_, comps_,
                  [this](std::size_t i, std::size_t j, double* out) { eval(i, j, out); });
  }

 private:
  TimeGrid grid_;
  std::size_t comps_;
  PairEval eval_;
  std::vector<ExponentPair> exps_;
};

/// Germ carrying the exact increment of a path; its N-image vanishes.
inline Germ germ_from_path(const GridPath& a) {
  const std::size_t d = a.dim();
  std::vector<double> data = a.data();
  auto eval = [d, data = std::move(data)](std::size_t i, std::size_t j, double* out) {
    for (std::size_t c = 0; c < d; ++c) out[c] = data[j * d + c] - data[i * d + c];
  };
  return Germ(a.grid(), d, std::move(eval), {{1.0, 1.0}});
}

/// Germ reading a stored 2-increment (the increment is copied).
inline Germ germ_from_increment(const Increment2& r, std::vector<ExponentPair> exps) {
  auto shared = std::make_shared<Increment2>(r);
  auto eval = [shared](std::size_t i, std::size_t j, double* out) {
    shared->value(i, j, out);
  };
  return Germ(r.grid(), r.comps(), std::move(eval), std::move(exps));
}

namespace detail {

inline void check_sewable(const Germ& germ) {
  if (germ.declared_z() <= 1.0)
    throw std::invalid_argument(
        "sew: declared z must exceed 1 (uniqueness of the splitting is lost)");
}

}  // namespace detail

/// Finest-grid compensated sum: I(t_0) = 0, I(t_k) = sum_{j<k} Xi(t_j, t_{j+1}).
inline GridPath sew(const Germ& germ) {
  detail::check_sewable(germ);
  const std::size_t n = germ.grid().points();
  const std::size_t c = germ.comps();
  GridPath out(germ.grid(), c);
  std::vector<double> cell(c);
  for (std::size_t k = 1; k < n; ++k) {
    germ.eval(k - 1, k, cell.data());
    auto prev = out.value(k - 1);
    auto cur = out.at(k);
    for (std::size_t q = 0; q < c; ++q) cur[q] = prev[q] + cell[q];
  }
  return out;
}

/// Grid realization of Lambda N Xi: R(i,j) = Xi(i,j) - (I(t_j) - I(t_i)) with
/// I = sew(germ). By construction N R = N Xi exactly and R vanishes on
/// adjacent pairs.
inline Increment2 lambda_of_germ(const Germ& germ) {
  const GridPath i_path = sew(germ);
  const std::size_t n = germ.grid().points();
  const std::size_t c = germ.comps();
  Increment2 r(germ.grid(), c);
  std::vector<double> xi(c);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    auto vi = i_path.value(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto vj = i_path.value(j);
      germ.eval(i, j, xi.data());
      auto out = r.at(i, j);
      for (std::size_t q = 0; q < c; ++q) out[q] = xi[q] - (vj[q] - vi[q]);
    }
  }
  return r;
}

/// One row of a dyadic-coarsening diagnostic: the compensated sum over every
/// 2^level-th grid point, its mesh, and the gap to the finest sum.
struct DyadicSumRow {
  std::size_t level;
  double mesh;
  std::vector<double> value;  // endpoint value of the coarsened sum
  double diff_to_finest;      // max-abs gap to the level-0 value
};

/// Compensated sums across dyadic coarsenings 2^0 .. 2^levels of the grid.
/// The grid's cell count must be divisible by 2^levels.
inline std::vector<DyadicSumRow> dyadic_sums(const Germ& germ, std::size_t levels) {
  detail::check_sewable(germ);
  const std::size_t cells = germ.grid().cells();
  const std::size_t c = germ.comps();
  std::size_t stride = std::size_t{1} << levels;
  detail::require(stride <= cells && cells % stride == 0,
                  "dyadic_sums: cell count not divisible by 2^levels");
  std::vector<DyadicSumRow> rows;
  rows.reserve(levels + 1);
  std::vector<double> cell(c);
  for (std::size_t lvl = 0; lvl <= levels; ++lvl) {
    const std::size_t step = std::size_t{1} << lvl;
    DyadicSumRow row;
    row.level = lvl;
    row.value.assign(c, 0.0);
    double mesh = 0.0;
    const auto& t = germ.grid().times();
    for (std::size_t k = 0; k + step <= cells; k += step) {
      germ.eval(k, k + step, cell.data());
      for (std::size_t q = 0; q < c; ++q) row.value[q] += cell[q];
      mesh = std::max(mesh, t[k + step] - t[k]);
    }
    row.mesh = mesh;
    row.diff_to_finest = 0.0;
    if (lvl > 0) {
      double d = 0.0;
      for (std::size_t q = 0; q < c; ++q)
        d = std::max(d, std::abs(row.value[q] - rows[0].value[q]));
      row.diff_to_finest = d;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct LocalityReport {
  bool applicable;    // N-images agree on the subinterval's triples
  bool agree;         // Lambda outputs agree on the subinterval's pairs
  double n_gap;       // max |N Xi_A - N Xi_B| over sampled subinterval triples
  double lambda_gap;  // max |R_A - R_B| over subinterval pairs
  double scale;       // max |Xi| over subinterval pairs, both germs
};

/// Checks the locality of Lambda: germs whose N-images coincide on the
/// subinterval's triples must produce identical Lambda values on its pairs.
/// If the precondition fails the check is reported as inapplicable.
inline LocalityReport locality_check(const Germ& a, const Germ& b, std::size_t lo,
                                     std::size_t hi) {
  detail::require(a.grid() == b.grid(), "locality_check: germs on different grids");
  detail::require(a.comps() == b.comps(), "locality_check: component mismatch");
  detail::require(lo < hi && hi < a.grid().points(), "locality_check: bad range");
  const std::size_t c = a.comps();

  LocalityReport rep{};
  std::vector<double> va(c), vb(c);
  double scale = 0.0;
  detail::for_pairs(lo, hi, /*exact=*/(hi - lo + 1) <= kExactPairPoints,
                    [&](std::size_t i, std::size_t j) {
                      a.eval(i, j, va.data());
                      b.eval(i, j, vb.data());
                      scale = std::max(scale, detail::max_abs(va));
                      scale = std::max(scale, detail::max_abs(vb));
                    });
  rep.scale = scale;

  auto na = a.n_image();
  auto nb = b.n_image();
  double n_gap = 0.0;
  detail::for_triples(lo, hi, (hi - lo + 1) <= kExactTriplePoints,
                      [&](std::size_t i, std::size_t u, std::size_t j) {
                        na.eval(i, u, j, va.data());
                        nb.eval(i, u, j, vb.data());
                        for (std::size_t q = 0; q < c; ++q)
                          n_gap = std::max(n_gap, std::abs(va[q] - vb[q]));
                      });
  rep.n_gap = n_gap;
  rep.applicable = n_gap <= 1e-12 * std::max(scale, 1.0);
  if (!rep.applicable) {
    rep.agree = false;
    rep.lambda_gap = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }

  const Increment2 ra = lambda_of_germ(a);
  const Increment2 rb = lambda_of_germ(b);
  double gap = 0.0;
  detail::for_pairs(lo, hi, (hi - lo + 1) <= kExactPairPoints,
                    [&](std::size_t i, std::size_t j) {
                      auto pa = ra.pair(i, j);
                      auto pb = rb.pair(i, j);
                      for (std::size_t q = 0; q < c; ++q)
                        gap = std::max(gap, std::abs(pa[q] - pb[q]));
                    });
  rep.lambda_gap = gap;
  rep.agree = gap <= 1e-10 * std::max(scale, 1.0);
  return rep;
}

}  // namespace rough
