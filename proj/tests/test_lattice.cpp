#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <sstream>

#include "weylfold/weylfold.hpp"

using namespace weylfold;

namespace {

struct D3Setup {
  RootSystem rs = build_dihedral(3);
  WeylGroup w = generate_group_with_longest(rs);
  FoldingOperator op = make_folding_operator(rs, w);
};

}  // namespace

TEST_CASE("lattice embedding") {
  const Vec e10 = embed({1, 0});
  CHECK(e10(0) == 1.0);
  CHECK(e10(1) == 0.0);
  const Vec e01 = embed({0, 1});
  CHECK(e01(0) == Catch::Approx(0.5));
  CHECK(e01(1) == Catch::Approx(std::sqrt(3.0) / 2.0));
  CHECK(embed({0, 0}).norm() == 0.0);
}

TEST_CASE("six neighbors at embedded distance one, symmetric relation") {
  const LatticeSite o{2, -3};
  const auto ns = neighbors(o);
  REQUIRE(ns.size() == 6);
  for (const auto& n : ns) {
    CHECK((embed(n) - embed(o)).norm() == Catch::Approx(1.0).margin(1e-12));
    const auto back = neighbors(n);
    CHECK(std::count(back.begin(), back.end(), o) == 1);
  }
  const auto n0 = neighbors({0, 0});
  CHECK(std::count(n0.begin(), n0.end(), LatticeSite{1, 0}) == 1);
  CHECK(std::count(n0.begin(), n0.end(), LatticeSite{0, 1}) == 1);
}

TEST_CASE("walk steps are uniform over neighbors and seed-deterministic") {
  Rng rng(77);
  LatticeSite cur{0, 0};
  std::map<Move, long long> freq;
  const long long n = 600000;
  for (long long k = 0; k < n; ++k) {
    const LatticeSite nxt = step_walk(cur, rng);
    CHECK((embed(nxt) - embed(cur)).norm() == Catch::Approx(1.0).margin(1e-12));
    ++freq[{static_cast<int>(nxt.i - cur.i), static_cast<int>(nxt.j - cur.j)}];
    cur = nxt;
  }
  REQUIRE(freq.size() == 6);
  for (const auto& [m, c] : freq)
    CHECK(static_cast<double>(c) / n == Catch::Approx(1.0 / 6.0).margin(0.01));

  Rng r1(123), r2(123);
  LatticeSite a{0, 0}, b{0, 0};
  for (int k = 0; k < 1000; ++k) {
    a = step_walk(a, r1);
    b = step_walk(b, r2);
    REQUIRE(a == b);
  }
}

TEST_CASE("site folding lands in the discrete chamber, inside the orbit") {
  D3Setup s;
  // Chamber sites are fixed.
  for (auto site : {LatticeSite{0, 0}, LatticeSite{3, 0}, LatticeSite{0, 2}, LatticeSite{2, 5}})
    CHECK(fold_site(s.rs, s.op, site) == site);

  Rng rng(5);
  for (int k = 0; k < 500; ++k) {
    const LatticeSite site{static_cast<long long>(rng.uniform_below(21)) - 10,
                           static_cast<long long>(rng.uniform_below(21)) - 10};
    const LatticeSite f = fold_site(s.rs, s.op, site);
    CHECK(f.i >= 0);
    CHECK(f.j >= 0);
    // Orbit consistency: some group element maps the embedded site to the image.
    bool in_orbit = false;
    for (const auto& e : s.w.elements)
      if ((e.matrix * embed(site) - embed(f)).norm() < 1e-9) {
        in_orbit = true;
        break;
      }
    CHECK(in_orbit);
  }

  // Both reduced words fold sites identically.
  const auto op1 = make_folding_operator(s.rs, {0, 1, 0});
  const auto op2 = make_folding_operator(s.rs, {1, 0, 1});
  for (int k = 0; k < 200; ++k) {
    const LatticeSite site{static_cast<long long>(rng.uniform_below(15)) - 7,
                           static_cast<long long>(rng.uniform_below(15)) - 7};
    CHECK(fold_site(s.rs, op1, site) == fold_site(s.rs, op2, site));
  }

  // A group that does not preserve the triangular lattice is detected.
  auto rs4 = build_dihedral(4);
  auto w4 = generate_group_with_longest(rs4);
  auto op4 = make_folding_operator(rs4, w4);
  CHECK_THROWS_AS(fold_site(rs4, op4, LatticeSite{0, 1}), internal_error);
}

TEST_CASE("reflected chain reproduces the exact q-table") {
  D3Setup s;
  ChainConfig cfg;
  cfg.steps = 1000000;
  cfg.seed = 42;
  cfg.start = {0, 0};
  const auto stats = empirical_reflected_transitions(s.rs, s.op, cfg);

  for (auto cls :
       {StateClass::Interior, StateClass::WallI, StateClass::WallJ, StateClass::Corner}) {
    CAPTURE(class_name(cls));
    CHECK(stats.class_visits.at(cls) >= stats.min_visits);
  }
  CHECK(stats.undersampled.empty());

  for (const auto& [key, count] : stats.counts) {
    const auto& [cls, move] = key;
    CAPTURE(class_name(cls), move.di, move.dj, count);
    const double expected = q_expected(cls, move);
    CHECK(expected > 0.0);  // only legal moves are ever observed
    CHECK(stats.frequency(cls, move) == Catch::Approx(expected).margin(0.01));
  }

  // The corner row has exactly the two moves of the q-table.
  int corner_moves = 0;
  for (const auto& [key, count] : stats.counts)
    if (key.first == StateClass::Corner) ++corner_moves;
  CHECK(corner_moves == 2);

  // Undersampled runs flag instead of failing.
  ChainConfig tiny = cfg;
  tiny.steps = 100;
  const auto small = empirical_reflected_transitions(s.rs, s.op, tiny);
  CHECK_FALSE(small.undersampled.empty());
}

TEST_CASE("folded chain never exits the discrete chamber") {
  D3Setup s;
  Rng rng(9);
  LatticeSite cur{0, 0};
  for (int k = 0; k < 20000; ++k) {
    cur = fold_site(s.rs, s.op, step_walk(cur, rng));
    REQUIRE(cur.i >= 0);
    REQUIRE(cur.j >= 0);
  }
}

TEST_CASE("markov image property: folded moves are homogeneous across raw pre-images") {
  D3Setup s;
  Rng rng(31);
  LatticeSite raw{0, 0};
  const long long steps = 600000, restart = 200;
  std::map<StateClass, std::map<std::string, std::map<Move, long long>>> table;
  for (long long n = 0; n < steps; ++n) {
    if (n % restart == 0) raw = LatticeSite{0, 0};
    const LatticeSite raw_next = step_walk(raw, rng);
    const LatticeSite cur = fold_site(s.rs, s.op, raw);
    const LatticeSite nxt = fold_site(s.rs, s.op, raw_next);
    if (classify(cur) != StateClass::Corner) {
      const auto sector = signature_string(facet_signature(s.rs, embed(raw), 1e-9));
      ++table[classify(cur)][sector][Move{static_cast<int>(nxt.i - cur.i),
                                          static_cast<int>(nxt.j - cur.j)}];
    }
    raw = raw_next;
  }
  int tested = 0;
  for (auto& [cls, rows] : table) {
    std::vector<std::string> keep;
    std::map<Move, std::size_t> cols;
    for (auto& [sector, moves] : rows) {
      long long total = 0;
      for (auto& [m, c] : moves) total += c;
      if (total < 200) continue;
      keep.push_back(sector);
      for (auto& [m, c] : moves) cols.emplace(m, cols.size());
    }
    if (keep.size() < 2) continue;
    const std::size_t R = keep.size(), C = cols.size();
    std::vector<double> row_tot(R, 0.0), col_tot(C, 0.0);
    std::vector<std::vector<double>> obs(R, std::vector<double>(C, 0.0));
    double grand = 0.0;
    for (std::size_t r = 0; r < R; ++r)
      for (auto& [m, c] : rows[keep[r]]) {
        obs[r][cols[m]] += static_cast<double>(c);
        row_tot[r] += static_cast<double>(c);
        col_tot[cols[m]] += static_cast<double>(c);
        grand += static_cast<double>(c);
      }
    double chi2 = 0.0;
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) {
        const double e = row_tot[r] * col_tot[c] / grand;
        if (e > 0.0) chi2 += (obs[r][c] - e) * (obs[r][c] - e) / e;
      }
    const double df = static_cast<double>((R - 1) * (C - 1));
    const double p = chi2_sf(df, chi2);
    CAPTURE(class_name(cls), chi2, df);
    CHECK(p > 0.01);
    ++tested;
  }
  CHECK(tested == 3);  // interior and both walls have multiple pre-image sectors
}

TEST_CASE("transition CSV carries metadata and is byte-deterministic") {
  D3Setup s;
  ChainConfig cfg;
  cfg.steps = 20000;
  cfg.seed = 7;
  const auto stats = empirical_reflected_transitions(s.rs, s.op, cfg);
  std::stringstream out1, out2;
  write_transitions_csv(out1, stats);
  write_transitions_csv(out2, empirical_reflected_transitions(s.rs, s.op, cfg));
  CHECK(out1.str() == out2.str());

  std::string line;
  std::getline(out1, line);
  CHECK(line.rfind("# rng=", 0) == 0);
  CHECK(line.find("seed=7") != std::string::npos);
  CHECK(line.find("steps=20000") != std::string::npos);
  std::getline(out1, line);
  CHECK(line == "class,move,count,frequency,expected");
  std::size_t rows = 0;
  while (std::getline(out1, line)) ++rows;
  CHECK(rows == stats.counts.size());
}
