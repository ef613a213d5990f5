// Seeded, reproducible experiment driver. Subcommands expose each
// verification suite: `algebra`, `walk`, `reflect`, `density`.
// Exit codes: 0 pass, 1 verification failure, 2 usage/config error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "weylfold/weylfold.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace weylfold;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitUsage = 2;

struct System {
  RootSystem rs;
  WeylGroup w;
  FoldingOperator op;
};

System build_system(const std::string& family, int m, int rank) {
  System s;
  if (family == "dihedral") {
    s.rs = build_dihedral(m);
  } else if (family == "A") {
    s.rs = build_classical(Family::A, rank);
  } else if (family == "B") {
    s.rs = build_classical(Family::B, rank);
  } else if (family == "D") {
    s.rs = build_classical(Family::D, rank);
  } else {
    throw invalid_parameter("unknown family '" + family + "' (dihedral|A|B|D)");
  }
  s.w = generate_group_with_longest(s.rs);
  s.op = make_folding_operator(s.rs, s.w);
  return s;
}

std::string system_label(const std::string& family, int m, int rank) {
  return family == "dihedral" ? "dihedral(" + std::to_string(m) + ")"
                              : family + std::to_string(rank);
}

std::string meta_line(std::uint64_t seed, const std::string& extra = "") {
  std::ostringstream os;
  os << "# weylfold=" << kVersion << " rng=" << Rng::name() << " seed=" << seed;
  if (!extra.empty()) os << ' ' << extra;
  return os.str();
}

json meta_json(std::uint64_t seed) {
  return json{{"weylfold", kVersion}, {"rng", Rng::name()}, {"seed", seed}};
}

Vec parse_point(const std::vector<double>& coords, int dim, const char* what) {
  if (coords.empty()) return Vec::Zero(dim);
  if (static_cast<int>(coords.size()) != dim)
    throw invalid_parameter(std::string(what) + ": expected " + std::to_string(dim) +
                            " coordinates, got " + std::to_string(coords.size()));
  Vec x(dim);
  for (int i = 0; i < dim; ++i) x(i) = coords[static_cast<std::size_t>(i)];
  return x;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + (dir / name).string());
  return os;
}

// ---------------------------------------------------------------------------
// algebra
// ---------------------------------------------------------------------------

int cmd_algebra(const std::string& family, int m, int rank, std::uint64_t seed,
                const fs::path& out) {
  System s = build_system(family, m, rank);
  Rng rng(seed);
  json report;
  report["meta"] = meta_json(seed);
  report["system"] = system_label(family, m, rank);
  report["dim"] = s.rs.dim;
  report["positive_roots"] = s.rs.positive.size();
  report["group_order"] = s.w.elements.size();
  report["longest_word_length"] = s.w.longest.word->size();
  bool pass = true;
  const auto record = [&](const std::string& name, bool ok, double worst) {
    report["checks"][name] = {{"pass", ok}, {"worst", worst}};
    pass = pass && ok;
  };

  try {
    validate_root_system(s.rs);
    record("root_system_axioms", true, 0.0);
  } catch (const std::exception& e) {
    report["checks"]["root_system_axioms"] = {{"pass", false}, {"error", e.what()}};
    pass = false;
  }

  const auto random_point = [&](double radius) {
    Vec x(s.rs.dim);
    for (int d = 0; d < s.rs.dim; ++d) x(d) = radius * (2.0 * rng.uniform() - 1.0);
    return x;
  };

  {  // Projection equals the exhaustive orbit oracle and lands in the chamber.
    double worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const Vec x = random_point(4.0);
      const Vec a = project_pi(s.op, x);
      worst = std::max(worst, (a - orbit_project_oracle(s.w, s.rs, x)).norm());
      for (const Root& al : s.rs.simple) worst = std::max(worst, -al.vec.dot(a));
    }
    record("orbit_projection", worst < 1e-10, worst);
  }
  {  // Word independence of the folding operator.
    std::vector<FoldingOperator> ops;
    for (int rep = 0; rep < 20 && ops.size() < 3; ++rep) {
      const auto word = greedy_descent_word(s.rs, &rng);
      bool dup = false;
      for (const auto& o : ops) dup = dup || o.word == word;
      if (!dup) ops.push_back(make_folding_operator(s.rs, word));
    }
    double worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const Vec x = random_point(4.0);
      const Vec ref = project_pi(ops[0], x);
      for (std::size_t i = 1; i < ops.size(); ++i)
        worst = std::max(worst, (project_pi(ops[i], x) - ref).norm());
    }
    record("word_independence", worst < 1e-11, worst);
  }
  {  // Contraction.
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Vec x = random_point(4.0), y = random_point(4.0);
      worst = std::max(worst,
                       (project_pi(s.op, x) - project_pi(s.op, y)).norm() - (x - y).norm());
    }
    record("contraction", worst < 1e-12, worst);
  }
  {  // Facet suite: enumeration, fibers, folding case table.
    bool ok = true;
    double worst = 0.0;
    const auto facets = enumerate_facets(s.rs, s.w);
    report["facet_count"] = facets.size();
    for (const auto& f : facets) {
      ok = ok && f.sig.single_support();
      const FacetSignature face = facet_signature(s.rs, face_witness(s.rs, f.fiber), 1e-9);
      const Vec probe = (0.25 + 2.0 * rng.uniform()) * f.sig.witness;
      ok = ok && facet_signature(s.rs, project_pi(s.op, probe), 1e-9).same_signs(face);
      for (std::size_t a = 0; a < s.rs.simple.size(); ++a) {
        const int apos = find_root(s.rs.positive, s.rs.simple[a].vec);
        const FacetSignature img = fold_facet(s.rs, static_cast<int>(a), f.sig);
        if (f.sig.signs[static_cast<std::size_t>(apos)] >= 0) {
          ok = ok && img.same_signs(f.sig);
        } else {
          const Vec moved = reflect(s.rs.simple[a].vec,
                                    s.rs.positive[static_cast<std::size_t>(f.support)].vec);
          int expected = find_root(s.rs.positive, moved);
          if (expected < 0) expected = find_root(s.rs.positive, Vec(-moved));
          ok = ok && img.single_support() && img.support() == expected;
        }
      }
    }
    record("facet_suite", ok, worst);
    std::ofstream fd = open_out(out, "facets.txt");
    write_facets(fd, s.rs, facets);
  }
  {  // Distance identity against the active-set oracle.
    double worst = 0.0;
    for (int k = 0; k < 300; ++k) {
      const Vec x = random_point(4.0);
      for (std::size_t a = 0; a < s.rs.simple.size(); ++a)
        worst = std::max(worst, std::fabs(chamber_distance(s.op, s.rs.simple[a].vec, x) -
                                          distance_oracle(s.rs, s.w, static_cast<int>(a), x)));
    }
    record("distance_identity", worst < 1e-9, worst);
  }

  std::ofstream rd = open_out(out, "rootsys.txt");
  write_root_system(rd, s.rs);
  report["pass"] = pass;
  std::ofstream os = open_out(out, "algebra_report.json");
  os << report.dump(2) << "\n";
  std::cout << (pass ? "PASS" : "FAIL") << " algebra " << report["system"].get<std::string>()
            << ": |W|=" << s.w.elements.size() << " |R+|=" << s.rs.positive.size()
            << " facets=" << report["facet_count"].get<std::size_t>() << "\n";
  return pass ? kExitPass : kExitVerificationFailure;
}

// ---------------------------------------------------------------------------
// walk
// ---------------------------------------------------------------------------

int cmd_walk(long long steps, std::uint64_t seed, long long restart_every, long long start_i,
             long long start_j, const fs::path& out) {
  System s = build_system("dihedral", 3, 0);
  ChainConfig cfg;
  cfg.steps = steps;
  cfg.seed = seed;
  cfg.start = {start_i, start_j};
  cfg.restart_every = restart_every;
  const TransitionStats stats = empirical_reflected_transitions(s.rs, s.op, cfg);

  std::ofstream os = open_out(out, "walk.csv");
  write_transitions_csv(os, stats, "weylfold=" + std::string(kVersion));

  bool pass = true;
  bool warned = false;
  for (const auto& [key, count] : stats.counts) {
    const auto& [cls, move] = key;
    const bool sampled = stats.class_visits.at(cls) >= stats.min_visits;
    if (!sampled) {
      warned = true;
      continue;
    }
    const double dev = std::fabs(stats.frequency(cls, move) - q_expected(cls, move));
    if (dev > 0.01) {
      pass = false;
      std::cout << "FAIL walk: " << class_name(cls) << " move (" << move.di << "," << move.dj
                << ") deviates by " << dev << "\n";
    }
  }
  for (StateClass c : stats.undersampled) {
    warned = true;
    std::cout << "WARN walk: class " << class_name(c) << " undersampled ("
              << stats.class_visits.at(c) << " visits < " << stats.min_visits << ")\n";
  }
  std::cout << (pass ? "PASS" : "FAIL") << " walk: steps=" << steps << " seed=" << seed
            << (warned ? " (with warnings)" : "") << "\n";
  return pass ? kExitPass : kExitVerificationFailure;
}

// ---------------------------------------------------------------------------
// reflect
// ---------------------------------------------------------------------------

int cmd_reflect(const std::string& family, int m, int rank, double total_time, double dt,
                int n_paths, double eps, std::uint64_t seed, const std::vector<double>& x0,
                bool orbit_check, const fs::path& out) {
  System s = build_system(family, m, rank);
  if (eps <= 0.0) eps = 5.0 * std::sqrt(dt);
  if (eps < std::sqrt(dt))
    throw invalid_parameter("dt too coarse for bandwidth: eps < sqrt(dt)");

  SimConfig cfg;
  cfg.dim = s.rs.dim;
  cfg.total_time = total_time;
  cfg.dt = dt;
  cfg.seed = seed;
  cfg.n_paths = n_paths;
  cfg.x0 = parse_point(x0, s.rs.dim, "--x0");
  checked_step_count(total_time, dt);  // validate before spawning workers
  if (orbit_check) {
    for (std::size_t a = 0; a < s.rs.simple.size(); ++a) {
      int conflict = -1;
      if (!simple_alone_in_orbit(s.w, s.rs, static_cast<int>(a), &conflict))
        throw invalid_parameter(
            "orbit check unavailable: simple roots " + std::to_string(a) + " and " +
            std::to_string(conflict) +
            " are conjugate (single-orbit system, the orbit-sum hypothesis fails)");
    }
  }

  struct PathRecord {
    json j;
    double qv_error = 0.0, offdiag = 0.0, leak = 0.0;
    std::vector<double> orbit_rel;
  };
  std::vector<PathRecord> records(static_cast<std::size_t>(n_paths));
  parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t i) {
    const Path raw = simulate_bm(cfg, i);
    const Path folded = fold_path(s.op, raw);
    const auto rep = decompose_folded(s.rs, raw, folded, eps);
    PathRecord rec;
    rec.qv_error = rep.qv_error;
    rec.leak = rep.boundary_support_leak;
    for (int r = 0; r < s.rs.dim; ++r)
      for (int c = r + 1; c < s.rs.dim; ++c)
        rec.offdiag = std::max(rec.offdiag, std::fabs(rep.qv(r, c)));
    rec.j = {{"path", i},
             {"seed", derive_seed(seed, i)},
             {"qv_error", rep.qv_error},
             {"offdiag", rec.offdiag},
             {"leak", rep.boundary_support_leak}};
    for (std::size_t a = 0; a < rep.face_local_times.size(); ++a)
      rec.j["lt_final"].push_back(rep.face_local_times[a].total());
    if (orbit_check) {
      for (std::size_t a = 0; a < s.rs.simple.size(); ++a) {
        const double orbit =
            orbit_sum_local_times(s.w, s.rs, raw, static_cast<int>(a), eps).total();
        const double boundary = rep.face_local_times[a].total();
        const double rel =
            std::fabs(orbit - boundary) / std::max({orbit, boundary, 0.1});
        rec.orbit_rel.push_back(rel);
        rec.j["orbit_rel"].push_back(rel);
      }
    }
    records[i] = std::move(rec);
  });

  std::ofstream jl = open_out(out, "reflect_paths.jsonl");
  json head = meta_json(seed);
  head["system"] = system_label(family, m, rank);
  head["T"] = total_time;
  head["dt"] = dt;
  head["eps"] = eps;
  head["n_paths"] = n_paths;
  jl << json{{"meta", head}}.dump() << "\n";
  for (const auto& rec : records) jl << rec.j.dump() << "\n";

  std::vector<double> qv, off, leak;
  std::vector<std::vector<double>> orbit_rel(s.rs.simple.size());
  for (const auto& rec : records) {
    qv.push_back(rec.qv_error);
    off.push_back(rec.offdiag);
    leak.push_back(rec.leak);
    for (std::size_t a = 0; a < rec.orbit_rel.size(); ++a)
      orbit_rel[a].push_back(rec.orbit_rel[a]);
  }
  const Summary sq = summarize(qv), so = summarize(off), sl = summarize(leak);

  std::ofstream sc = open_out(out, "reflect_summary.csv");
  sc << meta_line(seed, "T=" + std::to_string(total_time) + " dt=" + std::to_string(dt) +
                            " eps=" + std::to_string(eps) +
                            " paths=" + std::to_string(n_paths)) << "\n";
  sc << "metric,mean,stderr\n";
  sc << "qv_error," << sq.mean << ',' << sq.stderr_mean << "\n";
  sc << "offdiag," << so.mean << ',' << so.stderr_mean << "\n";
  sc << "leak," << sl.mean << ',' << sl.stderr_mean << "\n";

  bool pass = sq.mean < 0.05 && so.mean < 0.02 && sl.mean < 0.02;
  std::cout << "reflect " << system_label(family, m, rank) << ": qv_error=" << sq.mean
            << " offdiag=" << so.mean << " leak=" << sl.mean << "\n";
  if (orbit_check) {
    for (std::size_t a = 0; a < orbit_rel.size(); ++a) {
      const Summary sr = summarize(orbit_rel[a]);
      sc << "orbit_rel_" << a << ',' << sr.mean << ',' << sr.stderr_mean << "\n";
      std::cout << "  orbit-sum vs boundary (simple root " << a << "): rel=" << sr.mean << "\n";
      pass = pass && sr.mean < 0.15;
    }
  }
  std::cout << (pass ? "PASS" : "FAIL") << " reflect\n";
  return pass ? kExitPass : kExitVerificationFailure;
}

// ---------------------------------------------------------------------------
// density
// ---------------------------------------------------------------------------

int cmd_density(const std::string& family, int m, int rank, double t, long long n_paths,
                int bins, double box_lo, double box_hi, std::uint64_t seed,
                const std::vector<double>& x0, bool neumann, bool check_c0, bool plot,
                const fs::path& out) {
  System s = build_system(family, m, rank);
  HeatKernelParams hp(s.rs, s.w, t);
  const Vec x = parse_point(x0, s.rs.dim, "--x0");
  if (!in_closed_chamber(s.rs, x, 1e-9))
    throw invalid_parameter("--x0 lies outside the closed chamber");
  bool pass = true;

  if (check_c0) {
    const double err = normalization_error(hp, x);
    std::cout << "c0 = (2*pi)^(N/2) = " << hp.c0 << ", |integral(p) - 1| = " << err << "\n";
    pass = pass && err < 1e-3;
  }
  if (neumann) {
    Rng rng(seed);
    const auto walls = sample_wall_points(s.rs, 50, rng);
    const auto rep = neumann_check(hp, x, walls);
    std::cout << "neumann: max |dp/dn|/p = " << rep.max_rel_normal << " over " << rep.used
              << " wall points (" << rep.skipped << " skipped)\n";
    pass = pass && rep.max_rel_normal < 1e-8;
  }
  if (!check_c0 && !neumann) {
    if (s.rs.dim != 2) throw invalid_parameter("density MC mode needs a rank-2 system");
    if (n_paths < 100000)
      throw invalid_parameter("density MC mode needs --paths >= 100000");
    const auto rep = mc_density_check(hp, x, s.op, static_cast<std::size_t>(n_paths), bins,
                                      box_lo, box_hi, seed);
    std::ofstream os = open_out(out, "density.csv");
    os << meta_line(seed, "system=" + system_label(family, m, rank) + " t=" + std::to_string(t) +
                              " paths=" + std::to_string(n_paths)) << "\n";
    os << "y1,y2,p_formula,p_histogram,abs_err\n";
    for (const auto& b : rep.bins)
      os << b.center(0) << ',' << b.center(1) << ',' << b.p_formula << ',' << b.p_histogram
         << ',' << b.abs_err << "\n";
    std::cout << "density MC: tv=" << rep.tv_distance << " chi2=" << rep.chi2
              << " df=" << rep.df << " pvalue=" << rep.pvalue << "\n";
    if (plot) {
      std::ofstream gp = open_out(out, "density_plot.gnu");
      gp << "# gnuplot script; run from the output directory\n"
         << "set datafile separator ','\n"
         << "set view map\nset size square\n"
         << "set xlabel 'y1'\nset ylabel 'y2'\n"
         << "set multiplot layout 1,2\n"
         << "set title 'kernel'\n"
         << "splot 'density.csv' skip 2 using 1:2:3 with points palette pt 5 ps 1.4 notitle\n"
         << "set title 'monte carlo'\n"
         << "splot 'density.csv' skip 2 using 1:2:4 with points palette pt 5 ps 1.4 notitle\n"
         << "unset multiplot\n";
    }
    pass = pass && rep.tv_distance < 0.02;
  }
  std::cout << (pass ? "PASS" : "FAIL") << " density\n";
  return pass ? kExitPass : kExitVerificationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weylfold: folded random walks, reflected Brownian paths and the "
               "sum-over-group heat kernel on Weyl chambers"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "flat key=value config file; flags take precedence");
  app.require_subcommand(1);

  std::string out_dir = "out";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "run seed")->envname("WEYLFOLD_SEED")->capture_default_str();
  app.add_option("--threads", threads, "worker thread cap (0 = hardware)")
      ->capture_default_str();

  std::string family = "dihedral";
  int m = 3, rank = 2;
  const auto add_system_opts = [&](CLI::App* sub) {
    sub->add_option("--family", family, "dihedral|A|B|D")->capture_default_str();
    sub->add_option("--m", m, "dihedral order parameter")->capture_default_str();
    sub->add_option("--rank", rank, "classical family rank")->capture_default_str();
  };

  auto* algebra = app.add_subcommand("algebra", "exact algebra property suite");
  algebra->fallthrough();
  add_system_opts(algebra);

  auto* walk = app.add_subcommand("walk", "folded triangular-lattice walk vs the q-table");
  walk->fallthrough();
  long long steps = 1000000, restart_every = 50, start_i = 0, start_j = 0;
  walk->add_option("--steps", steps, "total chain steps")->capture_default_str();
  walk->add_option("--restart-every", restart_every, "restart period (0 = never)")
      ->capture_default_str();
  walk->add_option("--start-i", start_i)->capture_default_str();
  walk->add_option("--start-j", start_j)->capture_default_str();

  auto* reflect = app.add_subcommand("reflect", "fold Brownian paths and verify the decomposition");
  reflect->fallthrough();
  add_system_opts(reflect);
  double total_time = 1.0, dt = 1e-5, eps = -1.0;
  int n_paths = 100;
  std::vector<double> x0;
  bool orbit_check = false;
  reflect->add_option("--T", total_time, "horizon")->capture_default_str();
  reflect->add_option("--dt", dt, "time step")->capture_default_str();
  reflect->add_option("--paths", n_paths, "number of paths")->capture_default_str();
  reflect->add_option("--eps", eps, "local-time bandwidth (default 5*sqrt(dt))");
  reflect->add_option("--x0", x0, "start point coordinates")->delimiter(',');
  reflect->add_flag("--orbit-check", orbit_check, "verify the orbit-sum boundary identity");

  auto* density = app.add_subcommand("density", "kernel law of the folded endpoint");
  density->fallthrough();
  add_system_opts(density);
  double t = 1.0, box_lo = 0.0, box_hi = 4.0;
  long long mc_paths = 1000000;
  int bins = 20;
  bool neumann = false, check_c0 = false, plot = false;
  density->add_option("--t", t, "kernel time")->capture_default_str();
  density->add_option("--paths", mc_paths, "monte-carlo samples")->capture_default_str();
  density->add_option("--bins", bins, "bins per axis")->capture_default_str();
  density->add_option("--box-lo", box_lo)->capture_default_str();
  density->add_option("--box-hi", box_hi)->capture_default_str();
  density->add_option("--x0", x0, "start point coordinates")->delimiter(',');
  density->add_flag("--neumann", neumann, "finite-difference Neumann check");
  density->add_flag("--check-c0", check_c0, "normalization quadrature check");
  density->add_flag("--plot", plot, "emit a gnuplot script next to the CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  thread_cap().store(threads);
  const fs::path out(out_dir);
  try {
    fs::create_directories(out);
    {  // Effective config snapshot; reusable through --config.
      std::ofstream cf(out / "run_config.ini", std::ios::binary);
      cf << app.config_to_str(false, false);
    }
    if (*algebra) return cmd_algebra(family, m, rank, seed, out);
    if (*walk) return cmd_walk(steps, seed, restart_every, start_i, start_j, out);
    if (*reflect)
      return cmd_reflect(family, m, rank, total_time, dt, n_paths, eps, seed, x0, orbit_check,
                         out);
    if (*density)
      return cmd_density(family, m, rank, t, mc_paths, bins, box_lo, box_hi, seed, x0, neumann,
                         check_c0, plot, out);
  } catch (const invalid_parameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerificationFailure;
  }
  return kExitUsage;
}
