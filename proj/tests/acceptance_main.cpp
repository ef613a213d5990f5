// Acceptance suite: one seeded, self-contained check per criterion, one
// PASS/FAIL line each, nonzero exit if any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "weylfold/weylfold.hpp"

using namespace weylfold;

namespace {

struct System {
  std::string name;
  RootSystem rs;
  WeylGroup w;
  FoldingOperator op;
};

System make(std::string name, RootSystem rs) {
  System s;
  s.name = std::move(name);
  s.rs = std::move(rs);
  s.w = generate_group_with_longest(s.rs);
  s.op = make_folding_operator(s.rs, s.w);
  return s;
}

Vec random_point(int dim, Rng& rng, double radius = 4.0) {
  Vec x(dim);
  for (int d = 0; d < dim; ++d) x(d) = radius * (2.0 * rng.uniform() - 1.0);
  return x;
}

std::vector<System> projection_zoo() {
  std::vector<System> zoo;
  zoo.push_back(make("dihedral(3)", build_dihedral(3)));
  zoo.push_back(make("dihedral(4)", build_dihedral(4)));
  zoo.push_back(make("A2", build_classical(Family::A, 2)));
  zoo.push_back(make("B2", build_classical(Family::B, 2)));
  zoo.push_back(make("A3", build_classical(Family::A, 3)));
  zoo.push_back(make("D3", build_classical(Family::D, 3)));
  return zoo;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// 1. Reflected q-table of the folded triangular-lattice walk.
Outcome criterion_qtable() {
  System s = make("dihedral(3)", build_dihedral(3));
  ChainConfig cfg;
  cfg.steps = 1000000;
  cfg.seed = 42;
  cfg.start = {0, 0};
  cfg.restart_every = 50;
  const TransitionStats stats = empirical_reflected_transitions(s.rs, s.op, cfg);
  double worst = 0.0;
  bool sampled = stats.undersampled.empty();
  for (const auto& [key, count] : stats.counts)
    worst = std::max(worst,
                     std::fabs(stats.frequency(key.first, key.second) -
                               q_expected(key.first, key.second)));
  char buf[160];
  std::snprintf(buf, sizeof(buf), "1e6 steps, worst |freq-q| = %.4f (tol 0.01), corner visits %lld",
                worst, static_cast<long long>(stats.class_visits.at(StateClass::Corner)));
  return {sampled && worst < 0.01, buf};
}

// 2. Word independence of the folding operator.
Outcome criterion_word_independence() {
  Rng rng(2);
  double worst = 0.0;
  {
    auto rs = build_dihedral(3);
    const auto op1 = make_folding_operator(rs, {0, 1, 0});
    const auto op2 = make_folding_operator(rs, {1, 0, 1});
    for (int k = 0; k < 10000; ++k) {
      const Vec x = random_point(2, rng);
      worst = std::max(worst, (project_pi(op1, x) - project_pi(op2, x)).norm());
    }
  }
  for (auto rs : {build_classical(Family::A, 2), build_classical(Family::B, 2),
                  build_classical(Family::A, 3), build_dihedral(5)}) {
    std::set<std::vector<int>> words;
    for (int rep = 0; rep < 60 && words.size() < 2; ++rep)
      words.insert(greedy_descent_word(rs, &rng));
    if (words.size() < 2) return {false, "could not find two distinct reduced words"};
    std::vector<FoldingOperator> ops;
    for (const auto& w : words) ops.push_back(make_folding_operator(rs, w));
    for (int k = 0; k < 10000; ++k) {
      const Vec x = random_point(rs.dim, rng);
      worst = std::max(worst, (project_pi(ops[0], x) - project_pi(ops[1], x)).norm());
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "max operator disagreement %.3e (tol 1e-11)", worst);
  return {worst < 1e-11, buf};
}

// 3. Projection equals the exhaustive orbit oracle.
Outcome criterion_orbit_projection() {
  Rng rng(3);
  double worst = 0.0;
  for (const System& s : projection_zoo()) {
    for (int k = 0; k < 10000; ++k) {
      const Vec x = random_point(s.rs.dim, rng);
      worst = std::max(worst,
                       (project_pi(s.op, x) - orbit_project_oracle(s.w, s.rs, x)).norm());
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "6 systems x 1e4 points, max deviation %.3e (tol 1e-10)", worst);
  return {worst < 1e-10, buf};
}

// 4. Distance identity alpha.pi(x) = d(x, K_alpha).
Outcome criterion_distance_identity() {
  Rng rng(4);
  double worst = 0.0;
  for (const System& s : projection_zoo()) {
    for (std::size_t a = 0; a < s.rs.simple.size(); ++a) {
      for (int k = 0; k < 1000; ++k) {
        const Vec x = random_point(s.rs.dim, rng);
        worst = std::max(worst, std::fabs(chamber_distance(s.op, s.rs.simple[a].vec, x) -
                                          distance_oracle(s.rs, s.w, static_cast<int>(a), x)));
      }
    }
  }
  char buf[140];
  std::snprintf(buf, sizeof(buf),
                "1e3 points per (system, simple root), max deviation %.3e (tol 1e-9)", worst);
  return {worst < 1e-9, buf};
}

// 5. Tanaka residual for linear Brownian motion.
Outcome criterion_tanaka() {
  SimConfig cfg;
  cfg.dim = 1;
  cfg.total_time = 1.0;
  cfg.dt = 1e-5;
  cfg.seed = 11;
  cfg.n_paths = 100;
  cfg.x0 = Vec::Zero(1);
  std::vector<double> res(100, 0.0);
  parallel_for(100, [&](std::size_t i) {
    const Eigen::ArrayXd z =
        simulate_bm(cfg, i).points.row(0).transpose().array();
    res[i] = tanaka_residual(
        z, local_time_occupation(z, cfg.dt, 5.0 * std::sqrt(cfg.dt), BandMode::Symmetric));
  });
  int ok = 0;
  double mean_coarse = 0.0;
  for (double r : res) {
    mean_coarse += r;
    if (r < 0.05) ++ok;
  }
  mean_coarse /= 100.0;

  SimConfig fine = cfg;
  fine.dt = cfg.dt / 4.0;
  std::vector<double> resf(100, 0.0);
  parallel_for(100, [&](std::size_t i) {
    const Eigen::ArrayXd z =
        simulate_bm(fine, i).points.row(0).transpose().array();
    resf[i] = tanaka_residual(
        z, local_time_occupation(z, fine.dt, 5.0 * std::sqrt(fine.dt), BandMode::Symmetric));
  });
  double mean_fine = 0.0;
  for (double r : resf) mean_fine += r;
  mean_fine /= 100.0;
  const double shrink = mean_coarse / mean_fine;

  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "residual<0.05 on %d/100 paths (need >=90); dt/4 shrink factor %.2f (need "
                "1.2..2.2); means %.4f -> %.4f",
                ok, shrink, mean_coarse, mean_fine);
  return {ok >= 90 && shrink >= 1.2 && shrink <= 2.2, buf};
}

// 6. Folded-path decomposition: Brownian covariation and wall-supported drift.
Outcome criterion_decomposition() {
  bool pass = true;
  std::string detail;
  for (const System& sys : {make("dihedral(3)", build_dihedral(3)),
                            make("dihedral(4)", build_dihedral(4))}) {
    SimConfig cfg;
    cfg.dim = 2;
    cfg.total_time = 1.0;
    cfg.dt = 1e-5;
    cfg.seed = 47;
    cfg.n_paths = 100;
    cfg.x0 = Vec::Zero(2);
    const double eps = 5.0 * std::sqrt(cfg.dt);
    std::vector<double> qv(100), off(100), leak(100);
    parallel_for(100, [&](std::size_t i) {
      const Path raw = simulate_bm(cfg, i);
      const Path folded = fold_path(sys.op, raw);
      const auto rep = decompose_folded(sys.rs, raw, folded, eps);
      qv[i] = rep.qv_error;
      off[i] = std::fabs(rep.qv(0, 1));
      leak[i] = rep.boundary_support_leak;
    });
    const double mqv = summarize(qv).mean, moff = summarize(off).mean,
                 mleak = summarize(leak).mean;
    pass = pass && mqv < 0.05 && moff < 0.02 && mleak < 0.02;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s[qv %.4f|off %.4f|leak %.4f] ", sys.name.c_str(), mqv,
                  moff, mleak);
    detail += buf;
  }
  return {pass, detail + "(tol 0.05/0.02/0.02)"};
}

// 7. Orbit-sum boundary process on dihedral(4); rejected on dihedral(3).
Outcome criterion_orbit_sum() {
  System s = make("dihedral(4)", build_dihedral(4));
  SimConfig cfg;
  cfg.dim = 2;
  cfg.total_time = 1.0;
  cfg.dt = 1e-5;
  cfg.seed = 13;
  cfg.n_paths = 100;
  cfg.x0 = Vec::Zero(2);
  const double eps = 5.0 * std::sqrt(cfg.dt);
  bool pass = true;
  std::string detail;
  for (int a : {0, 1}) {
    std::vector<double> orbit(100), boundary(100);
    parallel_for(100, [&](std::size_t i) {
      const Path raw = simulate_bm(cfg, i);
      orbit[i] = orbit_sum_local_times(s.w, s.rs, raw, a, eps).total();
      boundary[i] = boundary_via_distance(s.op, raw, a, eps).total();
    });
    const double mo = summarize(orbit).mean, mb = summarize(boundary).mean;
    const double rel = std::fabs(mo - mb) / std::max({mo, mb, 0.1});
    pass = pass && rel < 0.15;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "root%d rel %.4f ", a, rel);
    detail += buf;
  }
  // The single-orbit system must be rejected.
  System d3 = make("dihedral(3)", build_dihedral(3));
  SimConfig tiny = cfg;
  tiny.total_time = 0.01;
  tiny.dt = 1e-4;
  bool rejected = false;
  try {
    orbit_sum_local_times(d3.w, d3.rs, simulate_bm(tiny, 0), 0, eps);
  } catch (const invalid_parameter&) {
    rejected = true;
  }
  detail += rejected ? "; dihedral(3) rejected" : "; dihedral(3) NOT rejected";
  return {pass && rejected, detail + " (tol 0.15)"};
}

// 8. Dihedral(3) indicator identity for the boundary process.
Outcome criterion_indicator_identity() {
  System s = make("dihedral(3)", build_dihedral(3));
  const auto mean_residual = [&](double dt, std::uint64_t seed) {
    SimConfig cfg;
    cfg.dim = 2;
    cfg.total_time = 1.0;
    cfg.dt = dt;
    cfg.seed = seed;
    cfg.n_paths = 100;
    cfg.x0 = Vec::Zero(2);
    const double eps = 5.0 * std::sqrt(dt);
    std::vector<double> res(100);
    parallel_for(100, [&](std::size_t i) {
      res[i] = d3_indicator_identity(s.rs, s.op, simulate_bm(cfg, i), eps).residual;
    });
    return summarize(res).mean;
  };
  const double coarse = mean_residual(1e-5, 17);
  const double fine = mean_residual(5e-6, 17);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "mean relative residual %.4f (tol 0.15), dt/2 residual %.4f (must decrease)",
                coarse, fine);
  return {coarse < 0.15 && fine < coarse, buf};
}

// 9. Sum-over-group kernel: normalization, MC law, Neumann, heat equation.
Outcome criterion_kernel() {
  std::string detail;
  bool pass = true;
  Rng rng(9);

  double worst_norm = 0.0;
  for (auto sys : {make("dihedral(3)", build_dihedral(3)), make("dihedral(4)", build_dihedral(4)),
                   make("A2", build_classical(Family::A, 2))}) {
    const Mat dual = simple_dual_basis(sys.rs);
    const Vec x = 0.6 * dual.col(0) + 0.9 * dual.col(1);
    for (double t : {0.5, 1.0, 2.0}) {
      HeatKernelParams hp(sys.rs, sys.w, t);
      worst_norm = std::max(worst_norm, normalization_error(hp, x));
    }
  }
  pass = pass && worst_norm < 1e-3;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "norm err %.2e (tol 1e-3); ", worst_norm);
  detail += buf;

  System d3 = make("dihedral(3)", build_dihedral(3));
  HeatKernelParams hp(d3.rs, d3.w, 1.0);
  const auto mc = mc_density_check(hp, Vec::Zero(2), d3.op, 1000000, 20, 0.0, 4.0, 99);
  System d4 = make("dihedral(4)", build_dihedral(4));
  HeatKernelParams hp4(d4.rs, d4.w, 1.0);
  const auto mc4 = mc_density_check(hp4, Vec::Zero(2), d4.op, 1000000, 20, 0.0, 4.0, 101);
  pass = pass && mc.tv_distance < 0.02 && mc4.tv_distance < 0.02;
  std::snprintf(buf, sizeof(buf), "MC 1e6 TV %.4f/%.4f (tol 0.02); ", mc.tv_distance,
                mc4.tv_distance);
  detail += buf;

  const Vec x = chamber_interior_point(d3.rs);
  const auto walls = sample_wall_points(d3.rs, 50, rng);
  const auto nm = neumann_check(hp, x, walls);
  pass = pass && nm.used == 50 && nm.max_rel_normal < 1e-8;
  std::snprintf(buf, sizeof(buf), "neumann %.2e (tol 1e-8); ", nm.max_rel_normal);
  detail += buf;

  std::vector<Vec> interior;
  const Mat dual = simple_dual_basis(d3.rs);
  for (int k = 0; k < 20; ++k)
    interior.push_back(Vec((0.4 + 1.2 * rng.uniform()) * dual.col(0) +
                           (0.4 + 1.2 * rng.uniform()) * dual.col(1)));
  const double heat = heat_equation_residual(hp, x, interior, 1e-3);
  pass = pass && heat < 1e-4;
  std::snprintf(buf, sizeof(buf), "heat residual %.2e (tol 1e-4)", heat);
  detail += buf;
  return {pass, detail};
}

// 10. Facet suite: supports, folding cases and fibers, exhaustively at 1e-10.
Outcome criterion_facets() {
  bool pass = true;
  std::string detail;
  Rng rng(10);
  for (auto s : {make("dihedral(3)", build_dihedral(3)), make("dihedral(4)", build_dihedral(4)),
                 make("A2", build_classical(Family::A, 2)),
                 make("B2", build_classical(Family::B, 2))}) {
    const auto facets = enumerate_facets(s.rs, s.w, 1e-10);
    bool ok = true;
    for (const auto& f : facets) {
      ok = ok && f.sig.single_support();
      // Witness points of the facet project into the fiber's face.
      const FacetSignature face = facet_signature(s.rs, face_witness(s.rs, f.fiber), 1e-10);
      for (int rep = 0; rep < 5; ++rep) {
        const Vec probe = (0.3 + 2.0 * rng.uniform()) * f.sig.witness;
        ok = ok && facet_signature(s.rs, project_pi(s.op, probe), 1e-10).same_signs(face);
      }
      // Supports of group images transport as +-w(support).
      for (const auto& e : s.w.elements) {
        const FacetSignature img = facet_signature(s.rs, Vec(e.matrix * f.sig.witness), 1e-10);
        const Vec moved = e.matrix * s.rs.positive[static_cast<std::size_t>(f.support)].vec;
        const Vec sup = s.rs.positive[static_cast<std::size_t>(img.support())].vec;
        ok = ok && ((sup - moved).norm() < 1e-10 || (sup + moved).norm() < 1e-10);
      }
      // Folding case table.
      for (std::size_t a = 0; a < s.rs.simple.size(); ++a) {
        const int apos = find_root(s.rs.positive, s.rs.simple[a].vec);
        const FacetSignature img = fold_facet(s.rs, static_cast<int>(a), f.sig, 1e-10);
        if (f.sig.signs[static_cast<std::size_t>(apos)] >= 0) {
          ok = ok && img.same_signs(f.sig);
        } else {
          const Vec moved = reflect(s.rs.simple[a].vec,
                                    s.rs.positive[static_cast<std::size_t>(f.support)].vec);
          int expected = find_root(s.rs.positive, moved, 1e-10);
          if (expected < 0) expected = find_root(s.rs.positive, Vec(-moved), 1e-10);
          ok = ok && img.single_support() && img.support() == expected;
          for (std::size_t d = 0; d < s.rs.positive.size(); ++d) {
            const Vec sd = reflect(s.rs.simple[a].vec, s.rs.positive[d].vec);
            const int j = find_root(s.rs.positive, sd, 1e-10);
            const int expect = j >= 0 ? f.sig.signs[static_cast<std::size_t>(j)]
                                      : -f.sig.signs[static_cast<std::size_t>(
                                            find_root(s.rs.positive, Vec(-sd), 1e-10))];
            ok = ok && img.signs[d] == expect;
          }
        }
      }
    }
    pass = pass && ok;
    detail += s.name + "[" + std::to_string(facets.size()) + (ok ? " ok] " : " FAIL] ");
  }
  return {pass, detail + "(exact, tol 1e-10)"};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int number;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "reflected q-table of the folded lattice walk", criterion_qtable},
      {2, "word-independence of the folding operator", criterion_word_independence},
      {3, "orbit-projection equivalence", criterion_orbit_projection},
      {4, "distance identity alpha.pi(x) = d(x, K_alpha)", criterion_distance_identity},
      {5, "Tanaka residual for linear Brownian motion", criterion_tanaka},
      {6, "folded Brownian decomposition (covariation + wall support)", criterion_decomposition},
      {7, "orbit-sum boundary process on dihedral(4)", criterion_orbit_sum},
      {8, "dihedral(3) indicator identity for the boundary process", criterion_indicator_identity},
      {9, "sum-over-group heat kernel checks", criterion_kernel},
      {10, "facet suite (supports, folding cases, fibers)", criterion_facets},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", c.number,
                c.title, out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
