#pragma once

// Level-2 rough paths and weakly-controlled paths: construction, the
// controlled seminorm, composition with smooth maps, transitivity, and the
// rough integral realized as a compensated sum of the germ
//   Z_s deltaW_{st} + (Z'_s tensor W'_s) : XX_{st}.
//
// Index convention for the second-order contraction: the Gubinelli-derivative
// direction pairs with the FIRST index of XX (the inner factor of the
// iterated integral) and the integrator column with the SECOND.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rough/grid.hpp"
#include "rough/sewing.hpp"
#include "rough/young.hpp"

namespace rough {

/// A smooth map R^in -> R^out given by evaluation rules for the value, the
/// Jacobian (layout [out][in]) and optionally the Hessian ([out][in][in]),
/// plus declared Holder data for the highest derivative provided.
struct VectorField {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::function<void(const double* y, double* out)> value;
  std::function<void(const double* y, double* out)> jacobian;
  std::function<void(const double* y, double* out)> hessian;  // may be empty
  double holder_delta = 1.0;
  std::string name;
};

/// phi(y) = A y + b with A of shape out x in.
inline VectorField linear_field(std::vector<double> a, std::size_t out, std::size_t in,
                                std::vector<double> b = {}) {
  detail::require(a.size() == out * in, "linear_field: bad matrix size");
  if (b.empty()) b.assign(out, 0.0);
  detail::require(b.size() == out, "linear_field: bad offset size");
  VectorField f;
  f.in_dim = in;
  f.out_dim = out;
  f.name = "linear";
  f.value = [a, b, out, in](const double* y, double* v) {
    for (std::size_t r = 0; r < out; ++r) {
      double acc = b[r];
      for (std::size_t c = 0; c < in; ++c) acc += a[r * in + c] * y[c];
      v[r] = acc;
    }
  };
  f.jacobian = [a](const double*, double* j) { std::copy(a.begin(), a.end(), j); };
  f.hessian = [out, in](const double*, double* h) {
    std::fill(h, h + out * in * in, 0.0);
  };
  return f;
}

inline VectorField identity_field(std::size_t dim) {
  std::vector<double> a(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) a[i * dim + i] = 1.0;
  return linear_field(std::move(a), dim, dim);
}

/// Matrix-valued sine field R^d -> R^{m x d}: phi(y)^{mu nu} = sin(y^nu + mu).
/// Smooth with all derivatives bounded by 1.
inline VectorField sine_field(std::size_t m, std::size_t d) {
  VectorField f;
  f.in_dim = d;
  f.out_dim = m * d;
  f.name = "sine";
  f.value = [m, d](const double* y, double* v) {
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < d; ++c)
        v[r * d + c] = std::sin(y[c] + static_cast<double>(r));
  };
  f.jacobian = [m, d](const double* y, double* j) {
    std::fill(j, j + m * d * d, 0.0);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < d; ++c)
        j[(r * d + c) * d + c] = std::cos(y[c] + static_cast<double>(r));
  };
  f.hessian = [m, d](const double* y, double* h) {
    std::fill(h, h + m * d * d * d, 0.0);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < d; ++c)
        h[((r * d + c) * d + c) * d + c] = -std::sin(y[c] + static_cast<double>(r));
  };
  return f;
}

/// Scalar polynomial field of degree <= 3: phi(y) = c0 + c1 y + c2 y^2 + c3 y^3.
inline VectorField poly_field(double c0, double c1, double c2 = 0.0, double c3 = 0.0) {
  VectorField f;
  f.in_dim = 1;
  f.out_dim = 1;
  f.name = "poly";
  f.value = [=](const double* y, double* v) {
    v[0] = c0 + y[0] * (c1 + y[0] * (c2 + y[0] * c3));
  };
  f.jacobian = [=](const double* y, double* j) {
    j[0] = c1 + y[0] * (2.0 * c2 + y[0] * 3.0 * c3);
  };
  f.hessian = [=](const double* y, double* h) { h[0] = 2.0 * c2 + 6.0 * c3 * y[0]; };
  return f;
}

/// A path X in R^d together with its level-2 process XX in R^{d x d} and the
/// Holder exponent gamma. The Chen relation N XX = deltaX tensor deltaX is
/// validated at construction via the equivalent adjacent-cell telescoping
/// identity (an O(n^2) scan that implies the relation on all triples).
class RoughPath2 {
 public:
  RoughPath2(GridPath x, Increment2 xx, double gamma, double chen_tol = 1e-12)
      : x_(std::move(x)), xx_(std::move(xx)), gamma_(gamma) {
    detail::require(x_.grid() == xx_.grid(), "RoughPath2: grids differ");
    detail::require(xx_.comps() == x_.dim() * x_.dim(),
                    "RoughPath2: xx must have d*d components");
    detail::require(gamma_ > 1.0 / 3.0 && gamma_ <= 1.0,
                    "RoughPath2: gamma must lie in (1/3, 1]");
    const double defect = chen_defect();
    const double tol = chen_tol * std::max({xx_.scale(), x_.scale() * x_.scale(), 1.0});
    if (defect > tol)
      throw std::invalid_argument("RoughPath2: Chen relation violated (defect " +
                                  std::to_string(defect) + ")");
  }

  /// Builds the full pair table from adjacent-cell values by Chen chaining
  /// (exact by telescoping): XX(i,j) = XX(i,j-1) + XX(j-1,j) + dX(i,j-1) ox dX(j-1,j).
  static RoughPath2 from_adjacent(GridPath x, const std::vector<std::vector<double>>& adj,
                                  double gamma) {
    const std::size_t d = x.dim();
    const std::size_t n = x.points();
    detail::require(adj.size() == n - 1, "from_adjacent: need one value per cell");
    Increment2 xx(x.grid(), d * d);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      detail::require(adj[k].size() == d * d, "from_adjacent: bad cell tensor size");
      auto out = xx.at(k, k + 1);
      std::copy(adj[k].begin(), adj[k].end(), out.begin());
    }
    for (std::size_t i = 0; i + 2 < n; ++i) {
      auto xi = x.value(i);
      for (std::size_t j = i + 2; j < n; ++j) {
        auto prev = xx.pair(i, j - 1);
        auto cell = xx.pair(j - 1, j);
        auto xm = x.value(j - 1);
        auto xj = x.value(j);
        auto out = xx.at(i, j);
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b < d; ++b)
            out[a * d + b] = prev[a * d + b] + cell[a * d + b] +
                             (xm[a] - xi[a]) * (xj[b] - xm[b]);
      }
    }
    return RoughPath2(std::move(x), std::move(xx), gamma);
  }

  const GridPath& x() const { return x_; }
  const Increment2& xx() const { return xx_; }
  double gamma() const { return gamma_; }
  std::size_t dim() const { return x_.dim(); }
  const TimeGrid& grid() const { return x_.grid(); }

  /// Max residual of the adjacent-cell telescoping identity.
  double chen_defect() const {
    const std::size_t d = x_.dim();
    const std::size_t n = x_.points();
    double defect = 0.0;
    for (std::size_t i = 0; i + 2 < n; ++i) {
      auto xi = x_.value(i);
      for (std::size_t j = i + 2; j < n; ++j) {
        auto full = xx_.pair(i, j);
        auto prev = xx_.pair(i, j - 1);
        auto cell = xx_.pair(j - 1, j);
        auto xm = x_.value(j - 1);
        auto xj = x_.value(j);
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b < d; ++b) {
            const double want = prev[a * d + b] + cell[a * d + b] +
                                (xm[a] - xi[a]) * (xj[b] - xm[b]);
            defect = std::max(defect, std::abs(full[a * d + b] - want));
          }
      }
    }
    return defect;
  }

  RoughPath2 restrict(std::size_t lo, std::size_t hi) const {
    return RoughPath2(x_.restrict(lo, hi), xx_.restrict(lo, hi), gamma_);
  }

 private:
  GridPath x_;
  Increment2 xx_;
  double gamma_;
};

using Rough2Ptr = std::shared_ptr<const RoughPath2>;

/// Scalar geometric lift XX = (deltaX)^2 / 2 (d = 1 only; for d > 1 the
/// symmetrized square is not a Chen lift).
inline RoughPath2 geometric_lift(const GridPath& x, double gamma) {
  detail::require(x.dim() == 1, "geometric_lift: scalar paths only");
  const std::size_t n = x.points();
  Increment2 xx(x.grid(), 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x.value(j)[0] - x.value(i)[0];
      xx.at(i, j)[0] = 0.5 * dx * dx;
    }
  return RoughPath2(x, std::move(xx), gamma);
}

/// A weakly-controlled path (Z, Z'): Z in R^m, Z' in R^{m x d} per grid time,
/// with the remainder R_Z = deltaZ - Z' deltaX always derived, never stored.
class ControlledPath {
 public:
  ControlledPath(GridPath z, GridPath zprime, Rough2Ptr ref, double eta)
      : z_(std::move(z)), zprime_(std::move(zprime)), ref_(std::move(ref)), eta_(eta) {
    detail::require(static_cast<bool>(ref_), "ControlledPath: null reference");
    detail::require(z_.grid() == ref_->grid() && zprime_.grid() == ref_->grid(),
                    "ControlledPath: grids of z, zprime, ref.x must be identical");
    detail::require(zprime_.dim() == z_.dim() * ref_->dim(),
                    "ControlledPath: zprime must have m*d components");
    detail::require(eta_ > ref_->gamma(), "ControlledPath: need eta > gamma");
  }

  const GridPath& z() const { return z_; }
  const GridPath& zprime() const { return zprime_; }
  const Rough2Ptr& ref() const { return ref_; }
  double eta() const { return eta_; }
  std::size_t m() const { return z_.dim(); }
  std::size_t d() const { return ref_->dim(); }

  /// R_Z(i,j) = deltaZ(i,j) - Z'(i) deltaX(i,j), written into out (m comps).
  void remainder(std::size_t i, std::size_t j, double* out) const {
    const std::size_t mm = m(), dd = d();
    auto zi = z_.value(i);
    auto zj = z_.value(j);
    auto zp = zprime_.value(i);
    auto xi = ref_->x().value(i);
    auto xj = ref_->x().value(j);
    for (std::size_t r = 0; r < mm; ++r) {
      double acc = zj[r] - zi[r];
      for (std::size_t c = 0; c < dd; ++c) acc -= zp[r * dd + c] * (xj[c] - xi[c]);
      out[r] = acc;
    }
  }

  Increment2 remainder_table() const {
    Increment2 r(z_.grid(), m());
    const std::size_t n = z_.points();
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) remainder(i, j, r.at(i, j).data());
    return r;
  }

  ControlledPath restrict(std::size_t lo, std::size_t hi) const {
    auto sub = std::make_shared<RoughPath2>(ref_->restrict(lo, hi));
    return ControlledPath(z_.restrict(lo, hi), zprime_.restrict(lo, hi), sub, eta_);
  }

 private:
  GridPath z_;
  GridPath zprime_;
  Rough2Ptr ref_;
  double eta_;
};

/// X viewed as controlled by itself: Z = X, Z' = identity, eta = 2 gamma.
inline ControlledPath self_controlled(Rough2Ptr rp) {
  const std::size_t d = rp->dim();
  const std::size_t n = rp->grid().points();
  GridPath zp(rp->grid(), d * d);
  for (std::size_t k = 0; k < n; ++k) {
    auto v = zp.at(k);
    for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;
  }
  return ControlledPath(rp->x(), std::move(zp), rp, 2.0 * rp->gamma());
}

/// Constant path viewed as controlled (Z' = 0).
inline ControlledPath constant_controlled(Rough2Ptr rp, std::vector<double> value,
                                          double eta) {
  const std::size_t m = value.size();
  const std::size_t n = rp->grid().points();
  std::vector<double> zd(n * m);
  for (std::size_t k = 0; k < n; ++k)
    std::copy(value.begin(), value.end(), zd.begin() + static_cast<std::ptrdiff_t>(k * m));
  GridPath z(rp->grid(), m, std::move(zd));
  GridPath zp(rp->grid(), m * rp->dim());
  return ControlledPath(std::move(z), std::move(zp), std::move(rp), eta);
}

/// ||Z'||_inf + ||Z'||_{eta-gamma} + ||R_Z||_eta + ||Z||_gamma with the grid
/// module's scan budget.
inline double controlled_norm(const ControlledPath& c,
                              ScanPolicy policy = ScanPolicy::automatic) {
  const double gamma = c.ref()->gamma();
  double sup_zp = 0.0;
  for (std::size_t k = 0; k < c.z().points(); ++k)
    sup_zp = std::max(sup_zp, detail::max_abs(c.zprime().value(k)));
  const double n_zp = holder_norm(delta(c.zprime()), c.eta() - gamma, policy);
  const double n_rz = holder_norm(c.remainder_table(), c.eta(), policy);
  const double n_z = holder_norm(delta(c.z()), gamma, policy);
  return sup_zp + n_zp + n_rz + n_z;
}

/// Controlled-norm distance between two paths over the same reference.
inline double controlled_distance(const ControlledPath& a, const ControlledPath& b,
                                  ScanPolicy policy = ScanPolicy::automatic) {
  detail::require(a.ref()->grid() == b.ref()->grid() && a.m() == b.m(),
                  "controlled_distance: incompatible paths");
  std::vector<double> zd(a.z().data());
  std::vector<double> pd(a.zprime().data());
  for (std::size_t q = 0; q < zd.size(); ++q) zd[q] -= b.z().data()[q];
  for (std::size_t q = 0; q < pd.size(); ++q) pd[q] -= b.zprime().data()[q];
  GridPath dz(a.z().grid(), a.m(), std::move(zd));
  GridPath dp(a.zprime().grid(), a.zprime().dim(), std::move(pd));
  ControlledPath diff(std::move(dz), std::move(dp), a.ref(),
                      std::min(a.eta(), b.eta()));
  return controlled_norm(diff, policy);
}

/// Z = phi(Y) with Gubinelli derivative dphi(Y) Y'; the result's remainder
/// order is min(gamma (1 + delta_phi), eta_Y).
inline ControlledPath compose_smooth(const VectorField& phi, const ControlledPath& y) {
  detail::require(phi.in_dim == y.m(), "compose_smooth: domain mismatch");
  const std::size_t m = y.m();
  const std::size_t p = phi.out_dim;
  const std::size_t d = y.d();
  const std::size_t n = y.z().points();
  GridPath z(y.z().grid(), p);
  GridPath zp(y.z().grid(), p * d);
  std::vector<double> jac(p * m);
  for (std::size_t k = 0; k < n; ++k) {
    auto yk = y.z().value(k);
    phi.value(yk.data(), z.at(k).data());
    phi.jacobian(yk.data(), jac.data());
    auto ypk = y.zprime().value(k);
    auto out = zp.at(k);
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        double acc = 0.0;
        for (std::size_t s = 0; s < m; ++s) acc += jac[r * m + s] * ypk[s * d + c];
        out[r * d + c] = acc;
      }
  }
  const double gamma = y.ref()->gamma();
  const double eta = std::min(gamma * (1.0 + phi.holder_delta), y.eta());
  return ControlledPath(std::move(z), std::move(zp), y.ref(), eta);
}

/// Recasts Z controlled by Y (itself controlled by X) as controlled by X,
/// with derivative Z' Y'.
inline ControlledPath transitivity_recast(const ControlledPath& z_over_y,
                                          const ControlledPath& y_over_x) {
  detail::require(z_over_y.ref()->x().data() == y_over_x.z().data() &&
                      z_over_y.ref()->grid() == y_over_x.z().grid(),
                  "transitivity_recast: z's reference path is not y to 1 ulp");
  const std::size_t m = z_over_y.m();
  const std::size_t dy = z_over_y.d();
  const std::size_t dx = y_over_x.d();
  const std::size_t n = z_over_y.z().points();
  GridPath zp(y_over_x.ref()->grid(), m * dx);
  for (std::size_t k = 0; k < n; ++k) {
    auto zpk = z_over_y.zprime().value(k);
    auto ypk = y_over_x.zprime().value(k);
    auto out = zp.at(k);
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < dx; ++c) {
        double acc = 0.0;
        for (std::size_t s = 0; s < dy; ++s) acc += zpk[r * dy + s] * ypk[s * dx + c];
        out[r * dx + c] = acc;
      }
  }
  return ControlledPath(z_over_y.z(), std::move(zp), y_over_x.ref(),
                        std::min(z_over_y.eta(), y_over_x.eta()));
}

/// Germ of the rough integral int Z dW: components indexed (mu, nu) row-major
/// over (m_z, m_w). The germ owns copies of the path data and shares the
/// rough-path reference, so it stays valid independently of its inputs.
inline Germ rough_integral_germ(const ControlledPath& z, const ControlledPath& w) {
  detail::require(z.ref() == w.ref(), "rough_integral: different rough-path references");
  const double gamma = z.ref()->gamma();
  const double eta = std::min(z.eta(), w.eta());
  detail::require(eta + gamma > 1.0, "rough_integral: need eta + gamma > 1");
  const std::size_t mz = z.m(), mw = w.m(), d = z.d();
  auto eval = [mz, mw, d, zd = z.z().data(), wd = w.z().data(),
               zpd = z.zprime().data(), wpd = w.zprime().data(),
               ref = z.ref()](std::size_t i, std::size_t j, double* out) {
    const double* zi = zd.data() + i * mz;
    const double* wi = wd.data() + i * mw;
    const double* wj = wd.data() + j * mw;
    const double* zpi = zpd.data() + i * mz * d;
    const double* wpi = wpd.data() + i * mw * d;
    auto x2 = ref->xx().pair(i, j);
    for (std::size_t mu = 0; mu < mz; ++mu)
      for (std::size_t nu = 0; nu < mw; ++nu) {
        double acc = zi[mu] * (wj[nu] - wi[nu]);
        for (std::size_t a = 0; a < d; ++a)
          for (std::size_t b = 0; b < d; ++b)
            acc += zpi[mu * d + a] * wpi[nu * d + b] * x2[a * d + b];
        out[mu * mw + nu] = acc;
      }
  };
  return Germ(z.z().grid(), mz * mw, std::move(eval),
              {{eta, gamma}, {gamma, eta}, {eta - gamma, 2.0 * gamma}});
}

struct RoughIntegral {
  GridPath path;              // int Z dW, dim m_z * m_w
  ControlledPath controlled;  // same path with derivative Z tensor W'
};

/// Compensated-sum rough integral (Z, W controlled by the same reference).
/// Returns the integral path and its controlled decomposition (ZW').
inline RoughIntegral rough_integral(const ControlledPath& z, const ControlledPath& w) {
  GridPath path = sew(rough_integral_germ(z, w));
  const std::size_t mz = z.m(), mw = w.m(), d = z.d();
  const std::size_t n = path.points();
  GridPath deriv(path.grid(), mz * mw * d);
  for (std::size_t k = 0; k < n; ++k) {
    auto zk = z.z().value(k);
    auto wpk = w.zprime().value(k);
    auto out = deriv.at(k);
    for (std::size_t mu = 0; mu < mz; ++mu)
      for (std::size_t nu = 0; nu < mw; ++nu)
        for (std::size_t c = 0; c < d; ++c)
          out[(mu * mw + nu) * d + c] = zk[mu] * wpk[nu * d + c];
  }
  const double gamma = z.ref()->gamma();
  const double eta = std::min({2.0 * gamma, z.eta(), w.eta()});
  ControlledPath ctl(path, std::move(deriv), z.ref(), eta);
  return {std::move(path), std::move(ctl)};
}

/// Integral of an operator-valued controlled path W (values m x d, row-major)
/// against the reference driver: A = int W dX, controlled with derivative W.
/// Realized through rough_integral against the driver itself and a diagonal
/// contraction, so the two routes agree exactly.
inline ControlledPath integral_against_driver(const ControlledPath& w) {
  const std::size_t d = w.d();
  detail::require(w.m() % d == 0, "integral_against_driver: values must be m x d");
  const std::size_t m = w.m() / d;
  const double gamma = w.ref()->gamma();
  detail::require(w.eta() + gamma > 1.0, "integral_against_driver: need eta + gamma > 1");
  RoughIntegral raw = rough_integral(w, self_controlled(w.ref()));
  const std::size_t n = raw.path.points();
  GridPath a(raw.path.grid(), m);
  for (std::size_t k = 0; k < n; ++k) {
    auto rk = raw.path.value(k);  // components ((mu, kappa), nu), nu over d
    auto out = a.at(k);
    for (std::size_t mu = 0; mu < m; ++mu) {
      double acc = 0.0;
      for (std::size_t kp = 0; kp < d; ++kp) acc += rk[(mu * d + kp) * d + kp];
      out[mu] = acc;
    }
  }
  return ControlledPath(std::move(a), w.z(), w.ref(), 2.0 * gamma);
}

/// Fitted convergence order of the compensated rough sums; the canonical
/// theoretical order is eta + gamma - 1 (3 gamma - 1 in the D^{gamma,2gamma}
/// class).
inline RateStudy rough_rate(const ControlledPath& z, const ControlledPath& w,
                            std::size_t levels) {
  detail::require(levels >= 3, "rough_rate: need levels >= 3");
  return fit_rate(dyadic_sums(rough_integral_germ(z, w), levels));
}

}  // namespace rough
