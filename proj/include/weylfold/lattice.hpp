#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "weylfold/common.hpp"
#include "weylfold/folding.hpp"
#include "weylfold/rng.hpp"
#include "weylfold/rootsys.hpp"

namespace weylfold {

/// Vertex (i,j) of the triangular lattice, embedded in the plane at
/// x = i + j/2, y = (sqrt3/2) j.
struct LatticeSite {
  long long i = 0;
  long long j = 0;
  bool operator==(const LatticeSite& o) const { return i == o.i && j == o.j; }
  bool operator<(const LatticeSite& o) const { return i < o.i || (i == o.i && j < o.j); }
};

inline Vec embed(const LatticeSite& s) {
  Vec v(2);
  v << static_cast<double>(s.i) + 0.5 * static_cast<double>(s.j),
      0.5 * std::sqrt(3.0) * static_cast<double>(s.j);
  return v;
}

/// The six nearest neighbors, all at embedded distance 1.
inline std::array<LatticeSite, 6> neighbors(const LatticeSite& s) {
  return {LatticeSite{s.i + 1, s.j}, LatticeSite{s.i - 1, s.j}, LatticeSite{s.i, s.j + 1},
          LatticeSite{s.i, s.j - 1}, LatticeSite{s.i + 1, s.j - 1}, LatticeSite{s.i - 1, s.j + 1}};
}

/// One step of the simple random walk: uniform over the six neighbors.
inline LatticeSite step_walk(const LatticeSite& s, Rng& rng) {
  return neighbors(s)[static_cast<std::size_t>(rng.uniform_below(6))];
}

/// Folds a lattice site through the chamber projection of the dihedral(3)
/// system acting on the triangular lattice and maps back to lattice coordinates. The group
/// preserves the lattice, so a folded point off the lattice signals wrong
/// roots and raises internal_error.
inline LatticeSite fold_site(const RootSystem& rs, const FoldingOperator& op,
                             const LatticeSite& s) {
  if (rs.dim != 2)
    throw invalid_parameter("fold_site: expected the planar dihedral(3) system");
  const Vec p = project_pi(op, embed(s));
  const double jr = p(1) / (0.5 * std::sqrt(3.0));
  const double ir = p(0) - 0.5 * jr;
  LatticeSite out{static_cast<long long>(std::llround(ir)), static_cast<long long>(std::llround(jr))};
  if ((embed(out) - p).lpNorm<Eigen::Infinity>() > 1e-9)
    throw internal_error("fold_site: folded point is not a lattice site");
  return out;
}

// ---------------------------------------------------------------------------
// Reflected-chain transition statistics
// ---------------------------------------------------------------------------

/// State classes of the folded chain on {i >= 0, j >= 0}.
enum class StateClass { Interior, WallI, WallJ, Corner };

inline StateClass classify(const LatticeSite& s) {
  if (s.i > 0 && s.j > 0) return StateClass::Interior;
  if (s.i == 0 && s.j == 0) return StateClass::Corner;
  if (s.j == 0) return StateClass::WallJ;
  return StateClass::WallI;
}

inline const char* class_name(StateClass c) {
  switch (c) {
    case StateClass::Interior: return "interior";
    case StateClass::WallI: return "wall-i";
    case StateClass::WallJ: return "wall-j";
    case StateClass::Corner: return "corner";
  }
  return "?";
}

struct Move {
  int di = 0;
  int dj = 0;
  bool operator<(const Move& o) const { return di < o.di || (di == o.di && dj < o.dj); }
  bool operator==(const Move& o) const { return di == o.di && dj == o.dj; }
};

/// Exact transition probability q(class, move) of the normally reflected
/// walk; moves not reachable from the class have probability 0.
inline double q_expected(StateClass c, const Move& m) {
  const auto is = [&](int a, int b) { return m.di == a && m.dj == b; };
  switch (c) {
    case StateClass::Interior:
      if (is(1, 0) || is(-1, 0) || is(0, 1) || is(0, -1) || is(1, -1) || is(-1, 1))
        return 1.0 / 6.0;
      return 0.0;
    case StateClass::WallJ:  // j = 0, i > 0
      if (is(0, 1) || is(-1, 1)) return 1.0 / 3.0;
      if (is(1, 0) || is(-1, 0)) return 1.0 / 6.0;
      return 0.0;
    case StateClass::WallI:  // i = 0, j > 0
      if (is(1, 0) || is(1, -1)) return 1.0 / 3.0;
      if (is(0, 1) || is(0, -1)) return 1.0 / 6.0;
      return 0.0;
    case StateClass::Corner:
      if (is(0, 1) || is(1, 0)) return 0.5;
      return 0.0;
  }
  return 0.0;
}

struct ChainConfig {
  long long steps = 0;
  std::uint64_t seed = 0;
  LatticeSite start{0, 0};
  /// Restart the chain at `start` every this many steps so the corner and
  /// wall classes accumulate enough visits; conditional per-class transition
  /// frequencies are unchanged by restarts.
  long long restart_every = 50;
};

struct TransitionStats {
  std::uint64_t seed = 0;
  long long steps = 0;
  long long restart_every = 0;
  std::map<StateClass, long long> class_visits;
  std::map<std::pair<StateClass, Move>, long long> counts;
  /// Classes visited fewer than min_visits times.
  std::vector<StateClass> undersampled;
  long long min_visits = 10000;

  double frequency(StateClass c, const Move& m) const {
    auto itv = class_visits.find(c);
    if (itv == class_visits.end() || itv->second == 0) return 0.0;
    auto itc = counts.find({c, m});
    const long long k = itc == counts.end() ? 0 : itc->second;
    return static_cast<double>(k) / static_cast<double>(itv->second);
  }
};

/// Runs the folded chain and tallies transition frequencies per state class.
/// The folded chain is advanced directly: from the folded state, draw a
/// uniform raw neighbor and fold it back into {i >= 0, j >= 0}.
inline TransitionStats empirical_reflected_transitions(const RootSystem& rs,
                                                       const FoldingOperator& op,
                                                       const ChainConfig& cfg) {
  if (cfg.steps < 1) throw invalid_parameter("empirical_reflected_transitions: steps >= 1");
  TransitionStats stats;
  stats.seed = cfg.seed;
  stats.steps = cfg.steps;
  stats.restart_every = cfg.restart_every;
  Rng rng(cfg.seed);
  LatticeSite cur = fold_site(rs, op, cfg.start);
  for (long long n = 0; n < cfg.steps; ++n) {
    if (cfg.restart_every > 0 && n > 0 && n % cfg.restart_every == 0)
      cur = fold_site(rs, op, cfg.start);
    const LatticeSite raw_next = step_walk(cur, rng);
    const LatticeSite next = fold_site(rs, op, raw_next);
    const StateClass c = classify(cur);
    const Move m{static_cast<int>(next.i - cur.i), static_cast<int>(next.j - cur.j)};
    ++stats.class_visits[c];
    ++stats.counts[{c, m}];
    cur = next;
  }
  for (StateClass c :
       {StateClass::Interior, StateClass::WallI, StateClass::WallJ, StateClass::Corner}) {
    if (stats.class_visits[c] < stats.min_visits) stats.undersampled.push_back(c);
  }
  return stats;
}

/// CSV: metadata header line, then class,move,count,frequency,expected rows.
inline void write_transitions_csv(std::ostream& os, const TransitionStats& stats,
                                  const std::string& extra_meta = "") {
  os << "# rng=" << Rng::name() << " seed=" << stats.seed << " steps=" << stats.steps
     << " restart_every=" << stats.restart_every;
  if (!stats.undersampled.empty()) {
    os << " undersampled=";
    for (std::size_t i = 0; i < stats.undersampled.size(); ++i)
      os << (i ? ";" : "") << class_name(stats.undersampled[i]);
  }
  if (!extra_meta.empty()) os << ' ' << extra_meta;
  os << "\n";
  os << "class,move,count,frequency,expected\n";
  char buf[64];
  for (const auto& [key, count] : stats.counts) {
    const auto& [cls, move] = key;
    os << class_name(cls) << ",\"(" << move.di << "," << move.dj << ")\"," << count << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", stats.frequency(cls, move));
    os << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.10g", q_expected(cls, move));
    os << buf << "\n";
  }
}

}  // namespace weylfold
