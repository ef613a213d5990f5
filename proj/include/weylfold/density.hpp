#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "weylfold/common.hpp"
#include "weylfold/folding.hpp"
#include "weylfold/rng.hpp"
#include "weylfold/rootsys.hpp"
#include "weylfold/stats.hpp"

namespace weylfold {

/// c0 = (2 pi)^{N/2}: with this constant the sum-over-group kernel equals the
/// sum of Gaussian densities centered at the orbit of x, so it integrates to
/// one over the closed chamber.
inline double normalizing_constant(int dim) {
  if (dim < 1) throw invalid_parameter("normalizing_constant: N >= 1");
  return std::pow(2.0 * std::acos(-1.0), 0.5 * dim);
}

struct HeatKernelParams {
  const RootSystem* rs = nullptr;
  const WeylGroup* group = nullptr;
  double t = 1.0;
  double c0 = 0.0;

  HeatKernelParams() = default;
  HeatKernelParams(const RootSystem& r, const WeylGroup& w, double time)
      : rs(&r), group(&w), t(time), c0(normalizing_constant(r.dim)) {
    if (t <= 0.0) throw invalid_parameter("HeatKernelParams: t > 0 required");
  }
};

/// Kernel value without the chamber-membership check; the sum-over-group
/// formula extends smoothly to all of V, which the Neumann finite differences
/// rely on just outside the chamber. Log-domain sum: the exponents x.w(y)/t
/// reach +-1e3 at legal inputs.
inline double semigroup_density_unchecked(const HeatKernelParams& p, const Vec& x, const Vec& y) {
  const int n = p.rs->dim;
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> es;
  es.reserve(p.group->elements.size());
  for (const GroupElement& e : p.group->elements) {
    const double v = x.dot(e.matrix * y) / p.t;
    es.push_back(v);
    m = std::max(m, v);
  }
  double s = 0.0;
  for (double v : es) s += std::exp(v - m);
  const double logp = -std::log(p.c0) - 0.5 * n * std::log(p.t) -
                      (x.squaredNorm() + y.squaredNorm()) / (2.0 * p.t) + m + std::log(s);
  return std::exp(logp);
}

/// Transition density of the folded Brownian motion between chamber points.
inline double semigroup_density(const HeatKernelParams& p, const Vec& x, const Vec& y,
                                double tol = 1e-9) {
  if (!in_closed_chamber(*p.rs, x, tol) || !in_closed_chamber(*p.rs, y, tol))
    throw invalid_parameter("semigroup_density: arguments must lie in the closed chamber");
  return semigroup_density_unchecked(p, x, y);
}

// ---------------------------------------------------------------------------
// Chamber quadrature (N <= 2)
// ---------------------------------------------------------------------------

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes[static_cast<std::size_t>(i)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[static_cast<std::size_t>(n - 1 - i)] = weights[static_cast<std::size_t>(i)];
  }
}

/// Panelized Gauss-Legendre on [a, b].
template <typename F>
double integrate_1d(F&& f, double a, double b, int panels, int order = 8) {
  std::vector<double> xs, ws;
  gauss_legendre(order, xs, ws);
  double total = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (int q = 0; q < order; ++q) {
      const double x = lo + 0.5 * h * (xs[static_cast<std::size_t>(q)] + 1.0);
      total += 0.5 * h * ws[static_cast<std::size_t>(q)] * f(x);
    }
  }
  return total;
}

/// The closed chamber of a rank-2 system is exactly the angular wedge
/// [max_a angle(a) - pi/2, min_a angle(a) + pi/2].
inline std::pair<double, double> chamber_wedge(const RootSystem& rs) {
  if (rs.dim != 2) throw invalid_parameter("chamber_wedge: rank-2 systems only");
  // Work relative to the first simple root's angle to dodge branch cuts.
  const double base = std::atan2(rs.simple[0].vec(1), rs.simple[0].vec(0));
  double lo = -std::acos(-1.0), hi = std::acos(-1.0);
  for (const Root& a : rs.simple) {
    double ang = std::atan2(a.vec(1), a.vec(0)) - base;
    const double pi = std::acos(-1.0);
    while (ang > pi) ang -= 2.0 * pi;
    while (ang < -pi) ang += 2.0 * pi;
    lo = std::max(lo, ang - pi / 2.0);
    hi = std::min(hi, ang + pi / 2.0);
  }
  if (hi <= lo) throw internal_error("chamber_wedge: empty wedge");
  return {lo + base, hi + base};
}

}  // namespace detail

/// Integral of f over the closed chamber out to radius R. N = 1 integrates
/// the half-line, N = 2 uses polar coordinates over the exact wedge. The
/// caller picks R so the neglected tail is below its tolerance.
template <typename F>
double integrate_chamber(const RootSystem& rs, F&& f, double radius, int panels = 24) {
  if (rs.dim == 1) {
    Vec y(1);
    return detail::integrate_1d(
        [&](double r) {
          y(0) = r;
          return f(y);
        },
        0.0, radius, panels);
  }
  if (rs.dim == 2) {
    const auto [lo, hi] = detail::chamber_wedge(rs);
    Vec y(2);
    return detail::integrate_1d(
        [&](double theta) {
          const double c = std::cos(theta), s = std::sin(theta);
          return detail::integrate_1d(
              [&](double r) {
                y(0) = r * c;
                y(1) = r * s;
                return r * f(y);
              },
              0.0, radius, panels);
        },
        lo, hi, std::max(4, panels / 2));
  }
  throw invalid_parameter("integrate_chamber: implemented for N <= 2");
}

/// |integral of p_t(x, .) over the chamber minus 1|, the normalization check.
inline double normalization_error(const HeatKernelParams& p, const Vec& x) {
  const double radius = x.norm() + 6.0 * std::sqrt(p.t) + 1.0;
  const double mass = integrate_chamber(
      *p.rs, [&](const Vec& y) { return semigroup_density_unchecked(p, x, y); }, radius);
  return std::fabs(mass - 1.0);
}

// ---------------------------------------------------------------------------
// Monte Carlo law check
// ---------------------------------------------------------------------------

struct BinRecord {
  Vec center;
  double p_formula = 0.0;    // bin-averaged density from the kernel
  double p_histogram = 0.0;  // bin-averaged density from the samples
  double abs_err = 0.0;
};

struct DensityCheckReport {
  double tv_distance = 0.0;
  double chi2 = 0.0;
  double pvalue = 0.0;
  int df = 0;
  double frac_within_3rt = 0.0;  // mass within radius 3 sqrt(t) of pi(x)
  std::vector<BinRecord> bins;
};

namespace detail {

/// Sutherland-Hodgman clip of a convex polygon against {a.y >= 0}.
inline void clip_halfplane(std::vector<Vec>& poly, const Vec& a) {
  std::vector<Vec> out;
  out.reserve(poly.size() + 2);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& p0 = poly[i];
    const Vec& p1 = poly[(i + 1) % n];
    const double d0 = a.dot(p0), d1 = a.dot(p1);
    if (d0 >= 0.0) out.push_back(p0);
    if ((d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0))
      out.push_back(p0 + (d0 / (d0 - d1)) * (p1 - p0));
  }
  poly = std::move(out);
}

/// Area and centroid of the rect intersected with the chamber half-planes.
inline double clipped_cell(const RootSystem& rs, double x0, double y0, double x1, double y1,
                           Vec& centroid) {
  std::vector<Vec> poly;
  poly.reserve(8);
  Vec v(2);
  v << x0, y0;
  poly.push_back(v);
  v << x1, y0;
  poly.push_back(v);
  v << x1, y1;
  poly.push_back(v);
  v << x0, y1;
  poly.push_back(v);
  for (const Root& a : rs.simple) {
    clip_halfplane(poly, a.vec);
    if (poly.size() < 3) return 0.0;
  }
  double area2 = 0.0;
  Vec c = Vec::Zero(2);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec& p0 = poly[i];
    const Vec& p1 = poly[(i + 1) % poly.size()];
    const double cross = p0(0) * p1(1) - p1(0) * p0(1);
    area2 += cross;
    c += cross * (p0 + p1);
  }
  if (area2 <= 0.0) return 0.0;
  centroid = c / (3.0 * area2);
  return 0.5 * area2;
}

/// Mass of the kernel over rect intersect chamber. The chamber is convex, so
/// a rectangle whose four corners lie inside is entirely inside; anything
/// else is split until the depth limit, then resolved by exact polygon
/// clipping (area times density at the clipped centroid).
inline double bin_mass(const HeatKernelParams& p, const Vec& x, double x0, double y0, double x1,
                       double y1, int depth) {
  const RootSystem& rs = *p.rs;
  Vec c(2);
  const auto inside = [&](double a, double b) {
    c << a, b;
    return in_closed_chamber(rs, c, 1e-12);
  };
  const bool all_in = inside(x0, y0) && inside(x1, y0) && inside(x0, y1) && inside(x1, y1);
  if (all_in) {
    static thread_local std::vector<double> xs, ws;
    if (xs.empty()) gauss_legendre(4, xs, ws);
    double total = 0.0;
    Vec y(2);
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = 0; j < xs.size(); ++j) {
        y << x0 + 0.5 * (x1 - x0) * (xs[i] + 1.0), y0 + 0.5 * (y1 - y0) * (xs[j] + 1.0);
        total += 0.25 * ws[i] * ws[j] * semigroup_density_unchecked(p, x, y);
      }
    return total * (x1 - x0) * (y1 - y0);
  }
  if (depth == 0) {
    Vec centroid(2);
    const double area = clipped_cell(rs, x0, y0, x1, y1, centroid);
    if (area <= 0.0) return 0.0;
    return area * semigroup_density_unchecked(p, x, centroid);
  }
  const double mx = 0.5 * (x0 + x1), my = 0.5 * (y0 + y1);
  return bin_mass(p, x, x0, y0, mx, my, depth - 1) + bin_mass(p, x, mx, y0, x1, my, depth - 1) +
         bin_mass(p, x, x0, my, mx, y1, depth - 1) + bin_mass(p, x, mx, my, x1, y1, depth - 1);
}

}  // namespace detail

/// Histogram of pi(X_t) from exact Gaussian sampling against bin-integrated
/// kernel masses: total variation over the bin partition (plus the leftover
/// cell) and a chi-square with bins of expected count below 5 pooled.
inline DensityCheckReport mc_density_check(const HeatKernelParams& p, const Vec& x,
                                           const FoldingOperator& op, std::size_t n_samples,
                                           int bins_per_axis, double box_lo, double box_hi,
                                           std::uint64_t seed) {
  if (p.rs->dim != 2) throw invalid_parameter("mc_density_check: rank-2 systems only");
  if (n_samples < 100000)
    throw invalid_parameter("mc_density_check: needs at least 1e5 samples");
  if (!in_closed_chamber(*p.rs, x, 1e-9))
    throw invalid_parameter("mc_density_check: start point outside the chamber");
  const int nb = bins_per_axis;
  const double w = (box_hi - box_lo) / nb;

  // Sample side.
  std::vector<std::int64_t> counts(static_cast<std::size_t>(nb) * nb, 0);
  std::int64_t outside = 0, near = 0;
  const Vec pix = project_pi(op, x);
  const double conc_r2 = 9.0 * p.t;
  Rng rng(seed);
  Vec y(2);
  const double s = std::sqrt(p.t);
  for (std::size_t i = 0; i < n_samples; ++i) {
    y(0) = x(0) + s * rng.gaussian();
    y(1) = x(1) + s * rng.gaussian();
    project_pi_inplace(op, y);
    if ((y - pix).squaredNorm() <= conc_r2) ++near;
    const int bx = static_cast<int>(std::floor((y(0) - box_lo) / w));
    const int by = static_cast<int>(std::floor((y(1) - box_lo) / w));
    if (bx < 0 || bx >= nb || by < 0 || by >= nb)
      ++outside;
    else
      ++counts[static_cast<std::size_t>(by) * nb + bx];
  }

  // Kernel side.
  DensityCheckReport rep;
  rep.frac_within_3rt = static_cast<double>(near) / static_cast<double>(n_samples);
  std::vector<double> masses(counts.size(), 0.0);
  double mass_in = 0.0;
  for (int by = 0; by < nb; ++by)
    for (int bx = 0; bx < nb; ++bx) {
      const double m = detail::bin_mass(p, x, box_lo + bx * w, box_lo + by * w,
                                        box_lo + (bx + 1) * w, box_lo + (by + 1) * w, 6);
      masses[static_cast<std::size_t>(by) * nb + bx] = m;
      mass_in += m;
    }
  const double mass_out = std::max(0.0, 1.0 - mass_in);

  const double n = static_cast<double>(n_samples);
  double tv = std::fabs(static_cast<double>(outside) / n - mass_out);
  double chi2 = 0.0;
  double pooled_obs = static_cast<double>(outside);
  double pooled_exp = mass_out * n;
  int cells = 0;
  rep.bins.reserve(counts.size());
  for (int by = 0; by < nb; ++by)
    for (int bx = 0; bx < nb; ++bx) {
      const std::size_t idx = static_cast<std::size_t>(by) * nb + bx;
      const double obs = static_cast<double>(counts[idx]);
      const double expd = masses[idx] * n;
      tv += std::fabs(obs / n - masses[idx]);
      if (expd < 5.0) {
        pooled_obs += obs;
        pooled_exp += expd;
      } else {
        chi2 += (obs - expd) * (obs - expd) / expd;
        ++cells;
      }
      BinRecord rec;
      rec.center = Vec(2);
      rec.center << box_lo + (bx + 0.5) * w, box_lo + (by + 0.5) * w;
      rec.p_formula = masses[idx] / (w * w);
      rec.p_histogram = obs / (n * w * w);
      rec.abs_err = std::fabs(rec.p_formula - rec.p_histogram);
      rep.bins.push_back(std::move(rec));
    }
  if (pooled_exp > 0.0) {
    chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  }
  rep.tv_distance = 0.5 * tv;
  rep.chi2 = chi2;
  rep.df = std::max(1, cells - 1);
  rep.pvalue = chi2_sf(static_cast<double>(rep.df), chi2);
  return rep;
}

// ---------------------------------------------------------------------------
// Boundary and interior PDE checks
// ---------------------------------------------------------------------------

struct NeumannReport {
  double max_rel_normal = 0.0;
  int used = 0;
  int skipped = 0;  // points not on the relative interior of a single face
};

/// Random points on the relative interiors of the chamber faces: positive
/// combinations of the dual basis over the non-fixed simple roots.
inline std::vector<Vec> sample_wall_points(const RootSystem& rs, int count, Rng& rng,
                                           double lo = 0.3, double hi = 2.0) {
  const Mat dual = simple_dual_basis(rs);
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const int face = static_cast<int>(rng.uniform_below(rs.simple.size()));
    Vec x = Vec::Zero(rs.dim);
    for (int i = 0; i < rs.dim; ++i)
      if (i != face) x += (lo + (hi - lo) * rng.uniform()) * dual.col(i);
    pts.push_back(std::move(x));
  }
  return pts;
}

/// Central finite differences of y -> p_t(x, y) across the wall through each
/// sample point, using the smooth extension of the kernel outside the
/// chamber; returns the worst |normal derivative| / p.
inline NeumannReport neumann_check(const HeatKernelParams& p, const Vec& x,
                                   const std::vector<Vec>& wall_points, double h = 1e-4,
                                   double sig_tol = 1e-9) {
  NeumannReport rep;
  for (const Vec& y : wall_points) {
    const FacetSignature sig = facet_signature(*p.rs, y, sig_tol);
    int face = -1;
    if (sig.single_support())
      face = find_root(p.rs->simple, p.rs->positive[static_cast<std::size_t>(sig.support())].vec);
    if (face < 0) {
      ++rep.skipped;
      continue;
    }
    const Vec& nu = p.rs->simple[static_cast<std::size_t>(face)].vec;
    const double step = h * std::max(1.0, y.norm());
    const double plus = semigroup_density_unchecked(p, x, y + step * nu);
    const double minus = semigroup_density_unchecked(p, x, y - step * nu);
    const double val = semigroup_density_unchecked(p, x, y);
    if (val <= 0.0) {
      ++rep.skipped;
      continue;
    }
    rep.max_rel_normal = std::max(rep.max_rel_normal, std::fabs(plus - minus) / (2.0 * step * val));
    ++rep.used;
  }
  return rep;
}

/// Max relative residual of dp/dt = Laplacian(p)/2 at interior sample points,
/// via second-order central differences with stencil width h.
inline double heat_equation_residual(const HeatKernelParams& p, const Vec& x,
                                     const std::vector<Vec>& interior_points, double h = 1e-3) {
  double worst = 0.0;
  HeatKernelParams pp = p, pm = p;
  pp.t = p.t + h;
  pm.t = p.t - h;
  for (const Vec& y : interior_points) {
    const double dpdt =
        (semigroup_density_unchecked(pp, x, y) - semigroup_density_unchecked(pm, x, y)) /
        (2.0 * h);
    const double center = semigroup_density_unchecked(p, x, y);
    double lap = 0.0;
    Vec e = Vec::Zero(p.rs->dim);
    for (int d = 0; d < p.rs->dim; ++d) {
      e.setZero();
      e(d) = h;
      lap += (semigroup_density_unchecked(p, x, y + e) - 2.0 * center +
              semigroup_density_unchecked(p, x, y - e)) /
             (h * h);
    }
    const double scale = std::max({std::fabs(dpdt), 0.5 * std::fabs(lap), 1e-300});
    worst = std::max(worst, std::fabs(dpdt - 0.5 * lap) / scale);
  }
  return worst;
}

}  // namespace weylfold
