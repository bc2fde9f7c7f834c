// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit code 0 iff all criteria pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rough/rough.hpp"

namespace {

using namespace rough;
using Clock = std::chrono::steady_clock;

int failures = 0;

void run_criterion(int number, const std::string& label, double time_limit_s,
                   const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  const auto start = Clock::now();
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
    ok = false;
  }
  const double elapsed =
      std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - start)
          .count();
  if (elapsed > time_limit_s) {
    ok = false;
    detail += (detail.empty() ? "" : "; ") + std::string("runtime ") +
              std::to_string(elapsed) + "s exceeds " + std::to_string(time_limit_s) +
              "s";
  }
  std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", number,
              label.c_str(), elapsed, detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

double fit_slope(const std::vector<std::pair<double, double>>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = double(pts.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 1. Exact scalar identity for the geometric lift at n = 2^12.
bool criterion1(std::string& detail) {
  BrownianConfig cfg{1, TimeGrid::uniform(0, 1, 4096), 1001, 1};
  auto x = sample_bm(cfg).coarse;
  auto rp = std::make_shared<RoughPath2>(geometric_lift(x, 0.45));
  auto xc = self_controlled(rp);
  auto res = rough_integral(xc, xc);
  double worst = 0.0;
  for (std::size_t k = 0; k < x.points(); ++k) {
    const double want =
        0.5 * (x.value(k)[0] * x.value(k)[0] - x.value(0)[0] * x.value(0)[0]);
    const double err = std::abs(res.path.value(k)[0] - want);
    worst = std::max(worst, err / std::max(1.0, std::abs(want)));
  }
  detail = "max rel err " + fmt(worst);
  return worst <= 1e-12;
}

// 2. Sewing bound on 20 randomized Weierstrass germs at n = 1024.
bool criterion2(std::string& detail) {
  const double gamma = 0.75, rho = 0.75, z = gamma + rho;
  auto g = TimeGrid::uniform(0, 1, 1024);
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto f = weierstrass_path(rho, 20, g, 300 + seed, true);
    auto x = weierstrass_path(gamma, 20, g, 600 + seed, true);
    auto germ = young_germ(f, x, rho, gamma);
    const double lhs = holder_norm(lambda_of_germ(germ), z);
    const double rhs =
        holder_norm2(germ.n_image(), rho, gamma) / (std::pow(2.0, z) - 2.0) * 1.05;
    worst_ratio = std::max(worst_ratio, lhs / rhs);
    if (lhs > rhs) {
      detail = "seed " + std::to_string(seed) + " ratio " + fmt(lhs / rhs);
      return false;
    }
  }
  detail = "worst lhs/rhs " + fmt(worst_ratio);
  return true;
}

// 3. Young rate for gamma = rho = 0.75 across levels 2^6 .. 2^12.
bool criterion3(std::string& detail) {
  auto g = TimeGrid::uniform(0, 1, 4096);
  auto f = weierstrass_path(0.75, 20, g, 11, true);
  auto x = weierstrass_path(0.75, 20, g, 12, true);
  auto rs = young_rate(f, x, 0.75, 0.75, 6);
  detail = "fitted order " + fmt(rs.order);
  return !rs.exact && rs.order >= 0.35;
}

// 4. Rough rate for int phi(X) dX with a sine field at gamma = 0.45.
bool criterion4(std::string& detail) {
  BrownianConfig cfg{1, TimeGrid::uniform(0, 1, 4096), 2024, 8};
  auto sample = sample_bm(cfg);
  auto rp = std::make_shared<RoughPath2>(sample.coarse, levy_area_ito(sample), 0.45);
  auto xc = self_controlled(rp);
  auto z = compose_smooth(sine_field(1, 1), xc);
  auto rs = rough_rate(z, xc, 6);
  detail = "fitted order " + fmt(rs.order);
  return !rs.exact && rs.order >= 0.20;
}

// 5. Chen exactness of the generated lifts at n = 2^10, d = 2.
bool criterion5(std::string& detail) {
  BrownianConfig cfg{2, TimeGrid::uniform(0, 1, 1024), 7, 16};
  auto sample = sample_bm(cfg);
  auto ito = levy_area_ito(sample);
  auto strat = strat_from_ito(ito);
  RoughPath2 rp_i(sample.coarse, ito, 0.45);
  RoughPath2 rp_s(sample.coarse, strat, 0.45);
  const double defect_i = mult_defect(from_rough2(rp_i));
  const double defect_s = mult_defect(from_rough2(rp_s));
  const double scale = std::max({1.0, ito.scale(), strat.scale()});
  detail = "defects " + fmt(defect_i) + " / " + fmt(defect_s);
  return defect_i <= 1e-12 * scale && defect_s <= 1e-12 * scale;
}

// 6. Ito-Stratonovich shift is exactly (1/2) diag (t - s).
bool criterion6(std::string& detail) {
  BrownianConfig cfg{2, TimeGrid::uniform(0, 1, 256), 99, 8};
  auto sample = sample_bm(cfg);
  auto ito = levy_area_ito(sample);
  auto strat = strat_from_ito(ito);
  const auto& t = ito.grid().times();
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < ito.points(); ++i)
    for (std::size_t j = i + 1; j < ito.points(); ++j) {
      auto a = ito.pair(i, j);
      auto b = strat.pair(i, j);
      worst = std::max(worst, std::abs(b[1] - a[1]));
      worst = std::max(worst, std::abs(b[2] - a[2]));
      worst = std::max(worst, std::abs(b[0] - a[0] - 0.5 * (t[j] - t[i])));
      worst = std::max(worst, std::abs(b[3] - a[3] - 0.5 * (t[j] - t[i])));
    }
  detail = "max deviation " + fmt(worst);
  return worst == 0.0;
}

// 7. Correction identity: exact for linear phi, first order for sine phi.
bool criterion7(std::string& detail) {
  BrownianConfig lin_cfg{1, TimeGrid::uniform(0, 1, 256), 8, 8};
  const double lin_gap = correction_identity_check(poly_field(0.0, 1.0), lin_cfg, 0.45).gap;

  std::vector<std::pair<double, double>> pts;
  for (std::size_t n : {64u, 128u, 256u, 512u}) {
    BrownianConfig cfg{1, TimeGrid::uniform(0, 1, n), 5150, 4};
    const double gap = correction_identity_check(sine_field(1, 1), cfg, 0.45).gap;
    if (gap > 0.0) pts.emplace_back(std::log(1.0 / double(n)), std::log(gap));
  }
  const double order = pts.size() >= 2 ? fit_slope(pts) : 0.0;
  detail = "linear gap " + fmt(lin_gap) + ", sine order " + fmt(order);
  return lin_gap <= 1e-12 && order >= 1.0;
}

// 8. RDE exactness and order for dY = Y dX, x(t) = sin t.
bool criterion8(std::string& detail) {
  std::vector<std::pair<double, double>> pts;
  double err_finest = 0.0;
  Rough2Ptr finest;
  for (std::size_t cells : {512u, 1024u, 2048u, 4096u}) {
    auto g = TimeGrid::uniform(0, 1, cells);
    GridPath x(g, 1);
    for (std::size_t i = 0; i < g.points(); ++i) x.at(i)[0] = std::sin(g[i]);
    auto rp = std::make_shared<RoughPath2>(geometric_lift(x, 1.0));
    RdeProblem p;
    p.driver = rp;
    p.phi = poly_field(0.0, 1.0);
    p.y0 = {1.0};
    auto y = solve_step(p);
    double err = 0.0;
    for (std::size_t k = 0; k < y.z().points(); ++k)
      err = std::max(err, std::abs(y.z().value(k)[0] -
                                   std::exp(x.value(k)[0] - x.value(0)[0])));
    pts.emplace_back(std::log(1.0 / double(cells)), std::log(err));
    err_finest = err;
    finest = rp;
  }
  const double order = fit_slope(pts);

  RdeProblem p;
  p.driver = finest;
  p.phi = poly_field(0.0, 1.0);
  p.y0 = {1.0};
  const double tol = 1e-9;
  auto ys = solve_step(p);
  auto yp = solve_picard(p, tol);
  double dist = 0.0;
  for (std::size_t k = 0; k < ys.z().points(); ++k)
    dist = std::max(dist, std::abs(ys.z().value(k)[0] - yp.z().value(k)[0]));
  detail = "order " + fmt(order) + ", err " + fmt(err_finest) + ", picard gap " +
           fmt(dist);
  return order >= 1.5 && err_finest <= 1e-5 && dist <= 10.0 * tol;
}

// 9. Ito-map Lipschitz probe for the scalar linear problem.
bool criterion9(std::string& detail) {
  auto g = TimeGrid::uniform(0, 1, 512);
  GridPath x(g, 1);
  for (std::size_t i = 0; i < g.points(); ++i) x.at(i)[0] = std::sin(g[i]);
  RdeProblem p;
  p.driver = std::make_shared<RoughPath2>(geometric_lift(x, 1.0));
  p.phi = poly_field(0.0, 1.0);
  p.y0 = {1.0};
  const double eps[] = {1e-1, 1e-2, 1e-3, 1e-4};
  auto probe = ito_map_probe(p, eps);
  detail = "slope " + fmt(probe.slope);
  return probe.slope >= 0.8 && probe.slope <= 1.2;
}

// 10. Signature extension: line closed form and smooth-path triple sums.
bool criterion10(std::string& detail) {
  const std::vector<double> v{1.0, -0.5};
  auto g = TimeGrid::uniform(0, 1, 256);
  std::vector<TensorSeries> adj;
  for (std::size_t k = 0; k < 256; ++k) {
    TensorSeries y = TensorSeries::zero(2, 2);
    for (std::size_t c = 0; c < 2; ++c) y.levels[1][c] = v[c] * (g[k + 1] - g[k]);
    adj.push_back(tensor_exp(y));
  }
  TensorFunc z2(g, 2, 2, std::move(adj), 2.2);
  auto z3 = extend_level(z2, 256);
  auto full = z3.value(0, 256);
  double line_err = 0.0;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      for (std::size_t c = 0; c < 2; ++c)
        line_err = std::max(line_err, std::abs(full.levels[3][(a * 2 + b) * 2 + c] -
                                               v[a] * v[b] * v[c] / 6.0));

  // Smooth path (t, t^2): level 3 versus brute-force triple Riemann sums.
  const std::size_t cells = 64, fine = 4, half = cells / 2;
  auto gs = TimeGrid::uniform(0, 1, cells);
  GridPath xs(gs, 2);
  for (std::size_t i = 0; i < gs.points(); ++i) {
    xs.at(i)[0] = gs[i];
    xs.at(i)[1] = gs[i] * gs[i];
  }
  Increment2 xx(gs, 4);
  const auto& t = gs.times();
  for (std::size_t i = 0; i + 1 < gs.points(); ++i)
    for (std::size_t j = i + 1; j < gs.points(); ++j) {
      const double s = t[i], u = t[j];
      auto out = xx.at(i, j);
      out[0] = 0.5 * (u - s) * (u - s);
      out[1] = 2.0 * (u * u * u - s * s * s) / 3.0 - s * (u * u - s * s);
      out[2] = (u * u * u - s * s * s) / 3.0 - s * s * (u - s);
      out[3] = 0.5 * (u * u - s * s) * (u * u - s * s);
    }
  RoughPath2 rp(xs, std::move(xx), 1.0);
  auto zs3 = extend_level(from_rough2(rp), 64);
  std::vector<double> level1(2, 0.0), level2(4, 0.0), oracle(8, 0.0);
  for (std::size_t q = 0; q < half * fine; ++q) {
    const double s0 = double(q) / double(half * fine) * 0.5;
    const double s1 = double(q + 1) / double(half * fine) * 0.5;
    const double dx[2] = {s1 - s0, s1 * s1 - s0 * s0};
    for (std::size_t bq = 0; bq < 4; ++bq)
      for (std::size_t c = 0; c < 2; ++c) oracle[bq * 2 + c] += level2[bq] * dx[c];
    for (std::size_t b2 = 0; b2 < 2; ++b2)
      for (std::size_t c = 0; c < 2; ++c) level2[b2 * 2 + c] += level1[b2] * dx[c];
    for (std::size_t c = 0; c < 2; ++c) level1[c] += dx[c];
  }
  auto got = zs3.value(0, half);
  double smooth_err = 0.0;
  for (std::size_t q = 0; q < 8; ++q)
    smooth_err = std::max(smooth_err, std::abs(got.levels[3][q] - oracle[q]));
  const double mesh = 1.0 / double(cells);
  detail = "line err " + fmt(line_err) + ", smooth err " + fmt(smooth_err);
  return line_err <= 1e-10 && smooth_err <= 5.0 * mesh;
}

// 11. Multiplicativize: z = 1.5 noise corrected, z = 0.9 non-convergent.
bool criterion11(std::string& detail) {
  auto g = TimeGrid::uniform(0, 1, 128);
  GridPath x(g, 1);
  for (std::size_t i = 0; i < g.points(); ++i) x.at(i)[0] = std::sin(2.0 * g[i]);
  auto z = from_rough2(geometric_lift(x, 0.9));
  const auto& t = g.times();
  auto base = as_pair_fn(z);

  auto good = base;
  good.z_decl = 1.5;
  good.eval = [inner = base.eval, &t](std::size_t i, std::size_t j) {
    TensorSeries s = inner(i, j);
    if (i != j) s.levels[2][0] += 0.3 * std::pow(t[j] - t[i], 1.5);
    return s;
  };
  auto res_good = multiplicativize(good, 5);
  const double defect = mult_defect(res_good.corrected);

  auto bad = base;
  bad.z_decl = 1.5;  // declared above 1 so the correction is attempted
  bad.eval = [inner = base.eval, &t](std::size_t i, std::size_t j) {
    TensorSeries s = inner(i, j);
    if (i != j) s.levels[2][0] += 0.3 * std::pow(t[j] - t[i], 0.9);
    return s;
  };
  auto res_bad = multiplicativize(bad, 5);
  detail = "corrected defect " + fmt(defect) + ", bad converged " +
           (res_bad.converged ? "yes" : "no");
  return res_good.converged && defect <= 1e-10 && !res_bad.converged;
}

// 12. Invariant suites on 100 randomized instances each.
bool criterion12(std::string& detail) {
  auto grid_of = [](std::uint64_t seed) {
    const CounterRng rng{seed};
    std::vector<double> t{0.0};
    for (std::size_t i = 0; i < 14; ++i)
      t.push_back(t.back() + 0.02 + rng.uniform(i));
    return TimeGrid(std::move(t));
  };
  auto random_path = [](const TimeGrid& g, std::uint64_t seed) {
    const CounterRng rng{seed};
    GridPath p(g, 1);
    for (std::size_t i = 0; i < g.points(); ++i)
      p.at(i)[0] = 2.0 * rng.uniform(i) - 1.0;
    return p;
  };
  auto random_increment = [](const TimeGrid& g, std::uint64_t seed) {
    const CounterRng rng{seed};
    Increment2 r(g, 1);
    std::uint64_t ctr = 0;
    for (std::size_t i = 0; i + 1 < g.points(); ++i)
      for (std::size_t j = i + 1; j < g.points(); ++j)
        r.at(i, j)[0] = 2.0 * rng.uniform(ctr++) - 1.0;
    return r;
  };

  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    auto g = grid_of(rep + 1);
    const std::size_t n = g.points();
    const auto a = random_path(g, 10000 + rep);
    const auto r = random_increment(g, 20000 + rep);
    const double scale_a = std::max(1.0, a.scale());
    const double scale_r = std::max(1.0, r.scale());

    // N delta = 0.
    auto nd = n_op(delta(a));
    double buf;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t u = i; u < n; ++u)
        for (std::size_t j = u; j < n; ++j) {
          nd.eval(i, u, j, &buf);
          if (std::abs(buf) > 1e-12 * scale_a) {
            detail = "N delta failed at rep " + std::to_string(rep);
            return false;
          }
        }

    // N2 N = 0.
    auto n2n = n2_op(n_op(r));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t u = i; u < n; ++u)
        for (std::size_t w = u; w < n; ++w)
          for (std::size_t j = w; j < n; ++j) {
            n2n.eval(i, u, w, j, &buf);
            if (std::abs(buf) > 1e-12 * scale_r) {
              detail = "N2 N failed at rep " + std::to_string(rep);
              return false;
            }
          }

    // Leibnitz rule for N(F R).
    Increment2 fr(g, 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        fr.at(i, j)[0] = a.value(i)[0] * r.pair(i, j)[0];
    auto n_fr = n_op(fr);
    auto n_r = n_op(r);
    double lhs, nr;
    for (std::size_t i = 0; i + 2 < n; ++i)
      for (std::size_t u = i + 1; u + 1 < n; ++u)
        for (std::size_t j = u + 1; j < n; ++j) {
          n_fr.eval(i, u, j, &lhs);
          n_r.eval(i, u, j, &nr);
          const double rhs = a.value(i)[0] * nr -
                             (a.value(u)[0] - a.value(i)[0]) * r.pair(u, j)[0];
          if (std::abs(lhs - rhs) > 1e-12 * scale_r * scale_a) {
            detail = "Leibnitz failed at rep " + std::to_string(rep);
            return false;
          }
        }

    // Norm comparison across exponents.
    const double gamma = 0.4, eta = 0.8;
    const double lhs_n = holder_norm(r, gamma, ScanPolicy::exact);
    const double rhs_n =
        std::pow(g.span(), eta - gamma) * holder_norm(r, eta, ScanPolicy::exact);
    if (lhs_n > rhs_n * (1.0 + 1e-12)) {
      detail = "norm comparison failed at rep " + std::to_string(rep);
      return false;
    }

    // Patch inequality.
    auto pb = patch_norm_bound(r, n / 2, 0.8, 0.4, 0.4, ScanPolicy::exact);
    if (pb.lhs > pb.rhs * (1.0 + 1e-12)) {
      detail = "patch inequality failed at rep " + std::to_string(rep);
      return false;
    }
  }
  detail = "100 instances per identity";
  return true;
}

}  // namespace

int main() {
  run_criterion(1, "exact scalar square identity (n = 4096)", 1.0, criterion1);
  run_criterion(2, "sewing bound on 20 Weierstrass germs (n = 1024)", 30.0, criterion2);
  run_criterion(3, "Young compensated-sum rate >= 0.35", 10.0, criterion3);
  run_criterion(4, "rough compensated-sum rate >= 0.20", 30.0, criterion4);
  run_criterion(5, "Chen exactness of Ito/Strat lifts (n = 1024, d = 2)", 5.0,
                criterion5);
  run_criterion(6, "Ito-Strat shift equals diag (t-s)/2 exactly", 1.0, criterion6);
  run_criterion(7, "correction identity: linear exact, sine order >= 1", 10.0,
                criterion7);
  run_criterion(8, "RDE exactness (err <= 1e-5, order >= 1.5, Picard agrees)", 10.0,
                criterion8);
  run_criterion(9, "Ito-map Lipschitz slope in [0.8, 1.2]", 30.0, criterion9);
  run_criterion(10, "signature extension: line exact, smooth within 5 mesh", 10.0,
                criterion10);
  run_criterion(11, "multiplicativize corrects z=1.5, rejects z=0.9", 20.0, criterion11);
  run_criterion(12, "invariant suites on 100 randomized instances", 30.0, criterion12);
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
