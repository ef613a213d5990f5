#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "weylfold/common.hpp"
#include "weylfold/folding.hpp"
#include "weylfold/rng.hpp"
#include "weylfold/rootsys.hpp"

namespace weylfold {

struct SimConfig {
  int dim = 0;
  double total_time = 1.0;
  double dt = 1e-4;
  std::uint64_t seed = 0;
  int n_paths = 1;
  Vec x0;
};

/// Uniformly time-gridded trajectory; column k is the point at time k*dt.
struct Path {
  double dt = 0.0;
  Mat points;

  std::size_t steps() const { return points.cols() == 0 ? 0 : static_cast<std::size_t>(points.cols()) - 1; }
  double time(std::size_t k) const { return dt * static_cast<double>(k); }
  double total_time() const { return dt * static_cast<double>(steps()); }
};

inline std::size_t checked_step_count(double total_time, double dt) {
  if (dt <= 0.0) throw invalid_parameter("simulate_bm: dt must be positive");
  const double ratio = total_time / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::fabs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw invalid_parameter("simulate_bm: T/dt must be a positive integer within 1e-9");
  return static_cast<std::size_t>(rounded);
}

/// Brownian path with i.i.d. Gaussian increments of covariance dt*Id, started
/// at cfg.x0. The stream is derived from (cfg.seed, path_index), so paths are
/// independent and any path can be regenerated in isolation.
inline Path simulate_bm(const SimConfig& cfg, std::uint64_t path_index = 0) {
  if (cfg.n_paths < 1) throw invalid_parameter("simulate_bm: n_paths >= 1");
  if (cfg.x0.size() != cfg.dim) throw invalid_parameter("simulate_bm: x0 dimension mismatch");
  const std::size_t n = checked_step_count(cfg.total_time, cfg.dt);
  Rng rng = Rng::split(cfg.seed, path_index);
  Path p;
  p.dt = cfg.dt;
  p.points.resize(cfg.dim, static_cast<Eigen::Index>(n) + 1);
  p.points.col(0) = cfg.x0;
  const double scale = std::sqrt(cfg.dt);
  for (std::size_t k = 0; k < n; ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    for (int d = 0; d < cfg.dim; ++d)
      p.points(d, c + 1) = p.points(d, c) + scale * rng.gaussian();
  }
  return p;
}

/// Pointwise chamber projection of a path.
inline Path fold_path(const FoldingOperator& op, const Path& p) {
  Path out;
  out.dt = p.dt;
  out.points = p.points;
  for (Eigen::Index k = 0; k < out.points.cols(); ++k)
    project_pi_inplace(op, out.points.col(k));
  return out;
}

// ---------------------------------------------------------------------------
// Local times
// ---------------------------------------------------------------------------

enum class LocalTimeKind { OccupationSymmetric, OccupationOneSided, TanakaDiscrete };

/// Cumulative local-time estimate on the path's grid. Conventions:
/// the symmetric band (-eps, eps) with weight 1/(2 eps) estimates the
/// semimartingale local time L(z) of a two-sided scalar; the one-sided band
/// [0, eps) with the same weight estimates the boundary process
/// L^alpha = L(z)/2 of a nonnegative reflected coordinate.
struct LocalTimeEstimate {
  LocalTimeKind kind = LocalTimeKind::OccupationSymmetric;
  double epsilon = 0.0;
  Eigen::ArrayXd values;  // values[0] = 0, nondecreasing
  bool bandwidth_warning = false;

  double total() const { return values.size() == 0 ? 0.0 : values(values.size() - 1); }
};

enum class BandMode { Symmetric, OneSided };

inline LocalTimeEstimate local_time_occupation(const Eigen::ArrayXd& z, double dt, double eps,
                                               BandMode mode) {
  if (eps <= 0.0) throw invalid_parameter("local_time_occupation: eps must be positive");
  if (dt <= 0.0) throw invalid_parameter("local_time_occupation: dt must be positive");
  LocalTimeEstimate lt;
  lt.kind = mode == BandMode::Symmetric ? LocalTimeKind::OccupationSymmetric
                                        : LocalTimeKind::OccupationOneSided;
  lt.epsilon = eps;
  lt.bandwidth_warning = eps < std::sqrt(dt);
  const Eigen::Index n = z.size();
  lt.values.resize(n);
  if (n == 0) return lt;
  lt.values(0) = 0.0;
  const double w = dt / (2.0 * eps);
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double v = z(k);
    const bool hit = mode == BandMode::Symmetric ? (v > -eps && v < eps) : (v >= 0.0 && v < eps);
    lt.values(k + 1) = lt.values(k) + (hit ? w : 0.0);
  }
  return lt;
}

/// Discrete Tanaka estimate of L(z): rearranging the Tanaka decomposition of
/// z^- gives L_t = 2 (z_t^- - z_0^- + sum_{s<t} 1{z_s <= 0} dz_s).
inline LocalTimeEstimate local_time_tanaka(const Eigen::ArrayXd& z) {
  LocalTimeEstimate lt;
  lt.kind = LocalTimeKind::TanakaDiscrete;
  const Eigen::Index n = z.size();
  lt.values.resize(n);
  if (n == 0) return lt;
  const auto neg = [](double v) { return v < 0.0 ? -v : 0.0; };
  lt.values(0) = 0.0;
  double ito = 0.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    if (z(k - 1) <= 0.0) ito += z(k) - z(k - 1);
    lt.values(k) = 2.0 * (neg(z(k)) - neg(z(0)) + ito);
  }
  return lt;
}

/// Max grid deviation in the Tanaka identity
/// z^-_t = z^-_0 - sum 1{z<=0} dz + L_t/2 for a symmetric-mode estimate.
inline double tanaka_residual(const Eigen::ArrayXd& z, const LocalTimeEstimate& lt) {
  if (lt.values.size() != z.size())
    throw invalid_parameter("tanaka_residual: estimate grid does not match the path");
  const auto neg = [](double v) { return v < 0.0 ? -v : 0.0; };
  double ito = 0.0;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    if (k > 0 && z(k - 1) <= 0.0) ito += z(k) - z(k - 1);
    worst = std::max(worst, std::fabs(neg(z(k)) - neg(z(0)) + ito - 0.5 * lt.values(k)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Semimartingale decomposition of the folded path
// ---------------------------------------------------------------------------

struct DecompositionReport {
  Mat qv;                 // realized covariation of the martingale part
  double qv_error = 0.0;  // max entrywise |qv - T*Id|
  double boundary_support_leak = 0.0;
  std::vector<LocalTimeEstimate> face_local_times;  // L^alpha per simple root
  Vec m_final;            // M_T, useful for martingale checks
};

/// Splits the folded path into martingale and boundary parts:
/// M_t = pi(X_t) - pi(X_0) - sum_alpha L^alpha_t alpha, with L^alpha the
/// one-sided occupation estimate on alpha.pi(X). Reports the realized
/// covariation of M against t*Id and the fraction of boundary mass accrued
/// farther than eps_support from every wall.
inline DecompositionReport decompose_folded(const RootSystem& rs, const Path& raw,
                                            const Path& folded, double eps,
                                            double eps_support = -1.0) {
  if (raw.points.cols() != folded.points.cols() || raw.points.rows() != folded.points.rows() ||
      raw.dt != folded.dt)
    throw invalid_parameter("decompose_folded: raw and folded paths have inconsistent grids");
  if (eps_support < 0.0) eps_support = eps;
  const Eigen::Index n = folded.points.cols() - 1;
  const int dim = static_cast<int>(folded.points.rows());
  const std::size_t faces = rs.simple.size();

  DecompositionReport rep;
  rep.face_local_times.reserve(faces);
  std::vector<Eigen::ArrayXd> z(faces);
  for (std::size_t a = 0; a < faces; ++a) {
    z[a] = (rs.simple[a].vec.transpose() * folded.points).transpose().array();
    rep.face_local_times.push_back(
        local_time_occupation(z[a], folded.dt, eps, BandMode::OneSided));
  }

  rep.qv = Mat::Zero(dim, dim);
  Vec da(dim), dm(dim);
  double mass_total = 0.0;
  double mass_leaked = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    da.setZero();
    double mass = 0.0;
    for (std::size_t a = 0; a < faces; ++a) {
      const double dl = rep.face_local_times[a].values(k + 1) - rep.face_local_times[a].values(k);
      if (dl != 0.0) {
        da += dl * rs.simple[a].vec;
        mass += dl;
      }
    }
    if (mass > 0.0) {
      mass_total += mass;
      double wall_dist = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < faces; ++a) wall_dist = std::min(wall_dist, z[a](k));
      if (wall_dist > eps_support) mass_leaked += mass;
    }
    dm = folded.points.col(k + 1) - folded.points.col(k) - da;
    rep.qv.noalias() += dm * dm.transpose();
  }
  rep.boundary_support_leak = mass_total > 0.0 ? mass_leaked / mass_total : 0.0;
  const double total_time = folded.total_time();
  rep.qv_error = (rep.qv - total_time * Mat::Identity(dim, dim)).cwiseAbs().maxCoeff();
  rep.m_final = folded.points.col(n) - folded.points.col(0);
  for (std::size_t a = 0; a < faces; ++a)
    rep.m_final -= rep.face_local_times[a].total() * rs.simple[a].vec;
  return rep;
}

/// Boundary process through the original path: the occupation of
/// {d(X_s, K_alpha) < eps}, with the distance evaluated as alpha.pi(X_s).
/// Must agree exactly with the one-sided estimate on the folded coordinate.
inline LocalTimeEstimate boundary_via_distance(const FoldingOperator& op, const Path& raw,
                                               int simple_index, double eps) {
  const Vec& alpha = op.rs->simple.at(static_cast<std::size_t>(simple_index)).vec;
  Eigen::ArrayXd d(raw.points.cols());
  Vec y(raw.points.rows());
  for (Eigen::Index k = 0; k < raw.points.cols(); ++k) {
    y = raw.points.col(k);
    project_pi_inplace(op, y);
    d(k) = alpha.dot(y);
  }
  return local_time_occupation(d, raw.dt, eps, BandMode::OneSided);
}

/// Orbit-sum expression for the boundary process: when alpha is the only
/// simple root in its orbit, L^alpha = sum over positive roots gamma in the
/// orbit of the local time of gamma.X. Raises invalid_parameter naming the
/// conflicting simple root when the hypothesis fails.
inline LocalTimeEstimate orbit_sum_local_times(const WeylGroup& w, const RootSystem& rs,
                                               const Path& raw, int simple_index, double eps) {
  int conflict = -1;
  if (!simple_alone_in_orbit(w, rs, simple_index, &conflict)) {
    std::string msg = "orbit_sum_local_times: simple root " + std::to_string(simple_index) +
                      " is not alone in its orbit; simple root " + std::to_string(conflict) +
                      " is conjugate to it";
    throw invalid_parameter(msg);
  }
  const Vec& alpha = rs.simple.at(static_cast<std::size_t>(simple_index)).vec;
  const std::vector<int> orbit = root_orbit_positive(w, rs, alpha);
  LocalTimeEstimate sum;
  sum.kind = LocalTimeKind::OccupationSymmetric;
  sum.epsilon = eps;
  sum.values = Eigen::ArrayXd::Zero(raw.points.cols());
  for (int idx : orbit) {
    const Eigen::ArrayXd z =
        (rs.positive[static_cast<std::size_t>(idx)].vec.transpose() * raw.points)
            .transpose()
            .array();
    const LocalTimeEstimate lt = local_time_occupation(z, raw.dt, eps, BandMode::Symmetric);
    sum.values += lt.values;
    sum.bandwidth_warning = sum.bandwidth_warning || lt.bandwidth_warning;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Dihedral(3) indicator identity for the boundary process
// ---------------------------------------------------------------------------

struct IndicatorIdentityResult {
  double lhs = 0.0;       // boundary process of the beta face via distances
  double rhs = 0.0;       // sum of indicator-restricted local-time integrals
  double residual = 0.0;  // |lhs-rhs| / max(lhs, rhs, floor)
};

/// The three half-lines making up the closure of K_beta for the dihedral(3)
/// system are selected from the hyperplanes H_beta, H_alpha,
/// H_gamma by the sign of the inner products with the directions at angles
/// pi/3, pi, 5 pi/3. Both sides estimate the same boundary process L^beta.
inline IndicatorIdentityResult d3_indicator_identity(const RootSystem& rs,
                                                     const FoldingOperator& op, const Path& raw,
                                                     double eps, double rel_floor = 0.1) {
  if (rs.family != Family::Dihedral || rs.family_rank != 3)
    throw invalid_parameter("d3_indicator_identity: needs the dihedral(3) system");
  // Identify the named roots by their coordinates: alpha = (0,1) is the
  // simple root with vanishing first coordinate; beta is the other simple
  // root; gamma the remaining positive root.
  int alpha_idx = -1, beta_idx = -1;
  for (std::size_t i = 0; i < rs.simple.size(); ++i) {
    if (std::fabs(rs.simple[i].vec(0)) < 1e-9)
      alpha_idx = static_cast<int>(i);
    else
      beta_idx = static_cast<int>(i);
  }
  if (alpha_idx < 0 || beta_idx < 0)
    throw invalid_parameter("d3_indicator_identity: could not identify alpha = (0,1)");
  const Vec alpha = rs.simple[static_cast<std::size_t>(alpha_idx)].vec;
  const Vec beta = rs.simple[static_cast<std::size_t>(beta_idx)].vec;
  int gamma_pos = -1;
  for (std::size_t i = 0; i < rs.positive.size(); ++i) {
    const Vec& v = rs.positive[i].vec;
    if ((v - alpha).norm() > 1e-9 && (v - beta).norm() > 1e-9) gamma_pos = static_cast<int>(i);
  }
  const Vec gamma = rs.positive[static_cast<std::size_t>(gamma_pos)].vec;

  const auto unit = [](double angle) {
    Vec v(2);
    v << std::cos(angle), std::sin(angle);
    return v;
  };
  const double pi = std::acos(-1.0);
  const Vec dir_beta = unit(pi / 3.0);
  const Vec dir_alpha = unit(pi);
  const Vec dir_gamma = unit(5.0 * pi / 3.0);

  IndicatorIdentityResult res;
  res.lhs = boundary_via_distance(op, raw, beta_idx, eps).total();

  const double w = raw.dt / (2.0 * eps);
  const Eigen::Index n = raw.points.cols() - 1;
  double rhs = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vec x = raw.points.col(k);
    if (std::fabs(beta.dot(x)) < eps && dir_beta.dot(x) >= 0.0) rhs += w;
    if (std::fabs(alpha.dot(x)) < eps && dir_alpha.dot(x) >= 0.0) rhs += w;
    if (std::fabs(gamma.dot(x)) < eps && dir_gamma.dot(x) >= 0.0) rhs += w;
  }
  res.rhs = rhs;
  res.residual = std::fabs(res.lhs - res.rhs) / std::max({res.lhs, res.rhs, rel_floor});
  return res;
}

}  // namespace weylfold
