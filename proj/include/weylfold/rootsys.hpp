#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "weylfold/common.hpp"
#include "weylfold/rng.hpp"

namespace weylfold {

/// A root is a unit vector; the reflection it induces fixes the hyperplane
/// orthogonal to it.
struct Root {
  Vec vec;
};

enum class Family { Dihedral, A, B, D };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Dihedral: return "dihedral";
    case Family::A: return "A";
    case Family::B: return "B";
    case Family::D: return "D";
  }
  return "?";
}

/// A reduced root system R with a chosen positive subsystem and its simple
/// roots. All roots are unit vectors (the reflection formula assumes it).
struct RootSystem {
  int dim = 0;
  Family family = Family::Dihedral;
  int family_rank = 0;  // m for dihedral, n for A/B/D
  std::vector<Root> roots;     // R
  std::vector<Root> positive;  // R+
  std::vector<Root> simple;    // S, a basis of span(R)
};

/// Orthogonal transformation, optionally carrying a word in simple roots.
/// Word convention: word[0] is applied first, so the matrix equals the
/// product s_{word[k-1]} * ... * s_{word[0]}.
struct GroupElement {
  Mat matrix;
  std::optional<std::vector<int>> word;
};

struct WeylGroup {
  std::vector<GroupElement> elements;
  std::size_t identity_index = 0;
  GroupElement longest;  // always carries a reduced word
};

inline Mat reflection_matrix(const Vec& alpha) {
  return Mat::Identity(alpha.size(), alpha.size()) - 2.0 * alpha * alpha.transpose();
}

/// s_alpha(x) = x - 2 (alpha.x) alpha for a unit root alpha.
inline Vec reflect(const Vec& alpha, const Vec& x) {
  return x - 2.0 * alpha.dot(x) * alpha;
}

inline GroupElement reflection(const Root& alpha) {
  if (std::fabs(alpha.vec.norm() - 1.0) > kUnitNormTol) {
    throw invalid_parameter("reflection: root must be a unit vector, |alpha| = " +
                            std::to_string(alpha.vec.norm()));
  }
  GroupElement g;
  g.matrix = reflection_matrix(alpha.vec);
  return g;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Dihedral system I2(m): 2m unit roots in the plane, positive roots at
/// angles -pi/2 + (k+1) pi/m for k = 0..m-1, simple roots the two extremes.
/// For m = 3 this reproduces alpha = (0,1), beta = (sqrt3/2,-1/2) and the
/// third positive root gamma = (sqrt3/2,1/2).
inline RootSystem build_dihedral(int m) {
  if (m < 2) throw invalid_parameter("build_dihedral: need m >= 2, got " + std::to_string(m));
  RootSystem rs;
  rs.dim = 2;
  rs.family = Family::Dihedral;
  rs.family_rank = m;
  const double pi = std::acos(-1.0);
  for (int k = 0; k < m; ++k) {
    const double theta = -pi / 2.0 + (k + 1) * pi / m;
    Vec v(2);
    v << std::cos(theta), std::sin(theta);
    rs.positive.push_back({v});
  }
  rs.simple.push_back(rs.positive.front());
  rs.simple.push_back(rs.positive.back());
  for (const Root& r : rs.positive) {
    rs.roots.push_back(r);
    rs.roots.push_back({-r.vec});
  }
  return rs;
}

namespace detail {

inline void push_root(RootSystem& rs, const Vec& v) {
  rs.positive.push_back({v / v.norm()});
}

/// Orthonormal basis of the hyperplane sum(x)=0 in R^{n+1}; columns span it.
inline Mat sum_zero_basis(int n) {
  Mat raw(n + 1, n);
  raw.setZero();
  for (int i = 0; i < n; ++i) {
    raw(i, i) = 1.0;
    raw(i + 1, i) = -1.0;
  }
  // Gram-Schmidt.
  Mat q(n + 1, n);
  for (int i = 0; i < n; ++i) {
    Vec v = raw.col(i);
    for (int j = 0; j < i; ++j) v -= q.col(j).dot(raw.col(i)) * q.col(j);
    q.col(i) = v / v.norm();
  }
  return q;
}

}  // namespace detail

/// Classical families at small rank, all roots normalized to unit length.
/// A_n is realized inside its n-dimensional span, so dim = n for every family.
inline RootSystem build_classical(Family family, int n) {
  const auto bad = [&](const char* why) {
    throw invalid_parameter(std::string("build_classical: ") + why + " (family " +
                            family_name(family) + ", rank " + std::to_string(n) + ")");
  };
  if (n > 4) bad("supported up to rank 4");
  RootSystem rs;
  rs.family = family;
  rs.family_rank = n;
  switch (family) {
    case Family::A: {
      if (n < 2) bad("A needs rank >= 2");
      rs.dim = n;
      const Mat basis = detail::sum_zero_basis(n);  // (n+1) x n
      auto project = [&](int i, int j) {
        Vec e = Vec::Zero(n + 1);
        e(i) = 1.0;
        e(j) = -1.0;
        return Vec(basis.transpose() * e);
      };
      for (int i = 0; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) detail::push_root(rs, project(i, j));
      for (int i = 0; i < n; ++i) rs.simple.push_back({project(i, i + 1).normalized()});
      break;
    }
    case Family::B: {
      if (n < 2) bad("B needs rank >= 2");
      rs.dim = n;
      auto e = [&](int i) {
        Vec v = Vec::Zero(n);
        v(i) = 1.0;
        return v;
      };
      for (int i = 0; i < n; ++i) detail::push_root(rs, e(i));
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          detail::push_root(rs, e(i) - e(j));
          detail::push_root(rs, e(i) + e(j));
        }
      for (int i = 0; i + 1 < n; ++i) rs.simple.push_back({(e(i) - e(i + 1)).normalized()});
      rs.simple.push_back({e(n - 1)});
      break;
    }
    case Family::D: {
      if (n < 3) bad("D needs rank >= 3");
      rs.dim = n;
      auto e = [&](int i) {
        Vec v = Vec::Zero(n);
        v(i) = 1.0;
        return v;
      };
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          detail::push_root(rs, e(i) - e(j));
          detail::push_root(rs, e(i) + e(j));
        }
      for (int i = 0; i + 1 < n; ++i) rs.simple.push_back({(e(i) - e(i + 1)).normalized()});
      rs.simple.push_back({(e(n - 2) + e(n - 1)).normalized()});
      break;
    }
    case Family::Dihedral:
      bad("use build_dihedral for dihedral systems");
  }
  for (const Root& r : rs.positive) {
    rs.roots.push_back(r);
    rs.roots.push_back({-r.vec});
  }
  return rs;
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

/// Index of `v` in `roots` within tol, or -1.
inline int find_root(const std::vector<Root>& roots, const Vec& v, double tol = 1e-10) {
  for (std::size_t i = 0; i < roots.size(); ++i)
    if ((roots[i].vec - v).lpNorm<Eigen::Infinity>() <= tol) return static_cast<int>(i);
  return -1;
}

/// Dual basis of the simple roots: columns d_i with alpha_j . d_i = delta_ij.
/// Requires S to span V (true for every system built here).
inline Mat simple_dual_basis(const RootSystem& rs) {
  const int n = rs.dim;
  if (static_cast<int>(rs.simple.size()) != n) {
    throw invalid_parameter("simple_dual_basis: simple roots do not span the ambient space");
  }
  Mat s(n, n);
  for (int i = 0; i < n; ++i) s.col(i) = rs.simple[i].vec;
  return s.transpose().inverse();
}

/// A point with alpha.x = 1 for every simple alpha: deep inside the chamber.
inline Vec chamber_interior_point(const RootSystem& rs) {
  const Mat d = simple_dual_basis(rs);
  Vec x = Vec::Zero(rs.dim);
  for (int i = 0; i < rs.dim; ++i) x += d.col(i);
  return x;
}

inline bool in_closed_chamber(const RootSystem& rs, const Vec& x, double tol = 1e-12) {
  for (const Root& a : rs.simple)
    if (a.vec.dot(x) < -tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Group generation
// ---------------------------------------------------------------------------

namespace detail {

inline std::string matrix_key(const Mat& m, double grid) {
  std::string key;
  key.reserve(static_cast<std::size_t>(m.size()) * 8);
  for (int c = 0; c < m.cols(); ++c)
    for (int r = 0; r < m.rows(); ++r) {
      const auto q = static_cast<std::int64_t>(std::llround(m(r, c) / grid));
      key.append(reinterpret_cast<const char*>(&q), sizeof(q));
    }
  return key;
}

}  // namespace detail

/// Breadth-first closure of the simple reflections under composition.
/// Deterministic for a given root system; BFS layers give each element a
/// geodesic (hence reduced) word. Throws group_explosion_error past `cap`.
inline WeylGroup generate_group(const RootSystem& rs, std::size_t cap = 100000,
                                const Tolerances& tol = {}) {
  const int n = rs.dim;
  std::vector<Mat> gens;
  gens.reserve(rs.simple.size());
  for (const Root& a : rs.simple) gens.push_back(reflection_matrix(a.vec));

  WeylGroup w;
  std::map<std::string, std::size_t> seen;
  GroupElement id;
  id.matrix = Mat::Identity(n, n);
  id.word = std::vector<int>{};
  w.elements.push_back(id);
  w.identity_index = 0;
  seen.emplace(detail::matrix_key(id.matrix, tol.dedup), 0);

  std::deque<std::size_t> frontier{0};
  while (!frontier.empty()) {
    const std::size_t cur = frontier.front();
    frontier.pop_front();
    for (std::size_t g = 0; g < gens.size(); ++g) {
      Mat next = gens[g] * w.elements[cur].matrix;
      std::string key = detail::matrix_key(next, tol.dedup);
      if (seen.count(key)) continue;
      if (w.elements.size() >= cap) {
        throw group_explosion_error(
            "generate_group: closure exceeded cap of " + std::to_string(cap) +
            " elements; the generators do not close into a finite reflection group");
      }
      GroupElement e;
      e.matrix = std::move(next);
      e.word = *w.elements[cur].word;
      e.word->push_back(static_cast<int>(g));
      seen.emplace(std::move(key), w.elements.size());
      frontier.push_back(w.elements.size());
      w.elements.push_back(std::move(e));
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Longest element
// ---------------------------------------------------------------------------

/// Greedy descent from a point of -C to the chamber: repeatedly reflect in a
/// simple root with negative inner product, recording the root. The recorded
/// sequence (in application order) is a reduced word for w0 of length
/// Card(R+). With `rng`, the start point and each descent choice are
/// randomized, which explores different reduced words.
inline std::vector<int> greedy_descent_word(const RootSystem& rs, Rng* rng = nullptr) {
  const Mat dual = simple_dual_basis(rs);
  Vec x = Vec::Zero(rs.dim);
  for (int i = 0; i < rs.dim; ++i) {
    const double c = rng ? 0.5 + rng->uniform() : 1.0 + 0.05 * (i + 1);
    x -= c * dual.col(i);
  }
  std::vector<int> word;
  const std::size_t max_steps = rs.positive.size() + 8;
  for (std::size_t step = 0; step <= max_steps; ++step) {
    std::vector<int> descents;
    for (std::size_t i = 0; i < rs.simple.size(); ++i)
      if (rs.simple[i].vec.dot(x) < -1e-13) descents.push_back(static_cast<int>(i));
    if (descents.empty()) {
      if (word.size() != rs.positive.size()) {
        throw internal_error("greedy_descent_word: terminated after " +
                             std::to_string(word.size()) + " steps, expected " +
                             std::to_string(rs.positive.size()));
      }
      return word;
    }
    const int pick = rng ? descents[static_cast<std::size_t>(
                               rng->uniform_below(descents.size()))]
                         : descents.front();
    x = reflect(rs.simple[static_cast<std::size_t>(pick)].vec, x);
    word.push_back(pick);
  }
  throw internal_error("greedy_descent_word: did not terminate");
}

inline Mat word_matrix(const RootSystem& rs, const std::vector<int>& word) {
  Mat m = Mat::Identity(rs.dim, rs.dim);
  for (int i : word) m = reflection_matrix(rs.simple[static_cast<std::size_t>(i)].vec) * m;
  return m;
}

/// The longest element w0 with a reduced word of length Card(R+); its matrix
/// maps the open chamber C onto -C. The matrix is matched against W as a
/// consistency check.
inline GroupElement longest_element(const RootSystem& rs, const WeylGroup& w,
                                    const Tolerances& tol = {}) {
  GroupElement g;
  g.word = greedy_descent_word(rs);
  g.matrix = word_matrix(rs, *g.word);
  bool found = false;
  for (const GroupElement& e : w.elements) {
    if ((e.matrix - g.matrix).lpNorm<Eigen::Infinity>() <= tol.dedup * 10) {
      found = true;
      break;
    }
  }
  if (!found) throw internal_error("longest_element: w0 matrix not found in the group");
  return g;
}

/// Convenience: group with the longest element filled in.
inline WeylGroup generate_group_with_longest(const RootSystem& rs, std::size_t cap = 100000,
                                             const Tolerances& tol = {}) {
  WeylGroup w = generate_group(rs, cap, tol);
  w.longest = longest_element(rs, w, tol);
  return w;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Checks the reduced-root-system axioms plus the positive/simple structure;
/// throws internal_error with a description of the first failure.
inline void validate_root_system(const RootSystem& rs, double tol = 1e-10) {
  const auto fail = [](const std::string& msg) { throw internal_error("root system: " + msg); };
  if (rs.roots.size() != 2 * rs.positive.size()) fail("R is not R+ union -R+");
  for (const Root& r : rs.roots) {
    if (r.vec.size() != rs.dim) fail("root dimension mismatch");
    if (std::fabs(r.vec.norm() - 1.0) > kUnitNormTol) fail("non-unit root");
  }
  for (const Root& a : rs.positive) {
    if (find_root(rs.roots, a.vec, tol) < 0 || find_root(rs.roots, -a.vec, tol) < 0)
      fail("missing root or its negative");
    if (find_root(rs.positive, -a.vec, tol) >= 0) fail("R+ contains a pair +-alpha");
    // R cap R*alpha = {alpha, -alpha}: any parallel root must be +-alpha.
    for (const Root& b : rs.roots) {
      const double c = a.vec.dot(b.vec);
      if (std::fabs(std::fabs(c) - 1.0) <= tol &&
          (b.vec - a.vec).norm() > tol && (b.vec + a.vec).norm() > tol)
        fail("proportional root that is not +-alpha");
    }
  }
  // Closure under own reflections.
  for (const Root& a : rs.roots)
    for (const Root& b : rs.roots)
      if (find_root(rs.roots, reflect(a.vec, b.vec), tol) < 0)
        fail("R not closed under s_alpha");
  // Simple roots: pairwise non-acute, and positives are nonnegative combos.
  for (std::size_t i = 0; i < rs.simple.size(); ++i)
    for (std::size_t j = i + 1; j < rs.simple.size(); ++j)
      if (rs.simple[i].vec.dot(rs.simple[j].vec) > tol)
        fail("simple roots with positive inner product");
  Mat s(rs.dim, static_cast<int>(rs.simple.size()));
  for (std::size_t i = 0; i < rs.simple.size(); ++i) s.col(static_cast<int>(i)) = rs.simple[i].vec;
  for (const Root& a : rs.positive) {
    Vec c = s.colPivHouseholderQr().solve(a.vec);
    if ((s * c - a.vec).norm() > 1e-9) fail("positive root outside span of simple roots");
    if (c.minCoeff() < -1e-9) fail("positive root with a negative simple coefficient");
  }
}

// ---------------------------------------------------------------------------
// Plain-text serialization
// ---------------------------------------------------------------------------

/// Format: one line "dim N", then "root x1 ... xN simple|positive|negative"
/// per root with 17 significant digits.
inline void write_root_system(std::ostream& os, const RootSystem& rs, double tol = 1e-10) {
  os << "dim " << rs.dim << "\n";
  char buf[64];
  const auto fmt = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  for (const Root& r : rs.roots) {
    os << "root";
    for (int i = 0; i < rs.dim; ++i) os << ' ' << fmt(r.vec(i));
    const bool positive = find_root(rs.positive, r.vec, tol) >= 0;
    const bool simple = positive && find_root(rs.simple, r.vec, tol) >= 0;
    os << ' ' << (simple ? "simple" : positive ? "positive" : "negative") << "\n";
  }
}

inline RootSystem read_root_system(std::istream& is) {
  RootSystem rs;
  std::string tag;
  if (!(is >> tag) || tag != "dim" || !(is >> rs.dim) || rs.dim <= 0)
    throw invalid_parameter("read_root_system: expected leading 'dim N' line");
  while (is >> tag) {
    if (tag != "root") throw invalid_parameter("read_root_system: expected 'root', got " + tag);
    Vec v(rs.dim);
    for (int i = 0; i < rs.dim; ++i)
      if (!(is >> v(i))) throw invalid_parameter("read_root_system: truncated root line");
    std::string kind;
    if (!(is >> kind)) throw invalid_parameter("read_root_system: missing root kind");
    rs.roots.push_back({v});
    if (kind == "simple") {
      rs.simple.push_back({v});
      rs.positive.push_back({v});
    } else if (kind == "positive") {
      rs.positive.push_back({v});
    } else if (kind != "negative") {
      throw invalid_parameter("read_root_system: unknown root kind " + kind);
    }
  }
  return rs;
}

}  // namespace weylfold
