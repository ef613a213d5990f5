#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "weylfold/common.hpp"
#include "weylfold/rootsys.hpp"

namespace weylfold {

// ---------------------------------------------------------------------------
// One-root folding and the chamber projection
// ---------------------------------------------------------------------------

/// r_alpha(x) = x + 2 (alpha.x)^- alpha: reflects only when alpha.x < 0, so
/// alpha.r_alpha(x) >= 0 always. Idempotent.
inline Vec fold_one(const Vec& alpha, const Vec& x) {
  const double c = alpha.dot(x);
  if (c >= 0.0) return x;
  return x - 2.0 * c * alpha;
}

/// In-place variant used in path loops.
inline void fold_one_inplace(const Vec& alpha, Eigen::Ref<Vec> x) {
  const double c = alpha.dot(x);
  if (c < 0.0) x -= 2.0 * c * alpha;
}

/// The projection pi = r_{w0} onto the closed chamber, evaluated along a
/// reduced word for the longest element. word[0] is applied first.
struct FoldingOperator {
  const RootSystem* rs = nullptr;
  std::vector<int> word;
  std::vector<Vec> alphas;  // resolved simple roots, application order
};

inline FoldingOperator make_folding_operator(const RootSystem& rs, const std::vector<int>& word) {
  FoldingOperator op;
  op.rs = &rs;
  op.word = word;
  op.alphas.reserve(word.size());
  for (int i : word) {
    if (i < 0 || i >= static_cast<int>(rs.simple.size()))
      throw invalid_parameter("make_folding_operator: word index out of range");
    op.alphas.push_back(rs.simple[static_cast<std::size_t>(i)].vec);
  }
  return op;
}

inline FoldingOperator make_folding_operator(const RootSystem& rs, const WeylGroup& w) {
  if (!w.longest.word) throw invalid_parameter("make_folding_operator: longest element has no word");
  return make_folding_operator(rs, *w.longest.word);
}

inline Vec project_pi(const FoldingOperator& op, const Vec& x) {
  Vec y = x;
  for (const Vec& a : op.alphas) fold_one_inplace(a, y);
  return y;
}

inline void project_pi_inplace(const FoldingOperator& op, Eigen::Ref<Vec> y) {
  for (const Vec& a : op.alphas) fold_one_inplace(a, y);
}

/// Exhaustive-orbit realization of the projection: the unique point of W.x in
/// the closed chamber, found by scanning the whole group. Independent of the
/// word-folding route; used as its oracle.
inline Vec orbit_project_oracle(const WeylGroup& w, const RootSystem& rs, const Vec& x,
                                double tol = 1e-12) {
  for (const GroupElement& e : w.elements) {
    Vec y = e.matrix * x;
    if (in_closed_chamber(rs, y, tol)) return y;
  }
  throw internal_error("orbit_project_oracle: no orbit element lies in the closed chamber");
}

// ---------------------------------------------------------------------------
// Facets
// ---------------------------------------------------------------------------

/// Sign pattern of x against every positive root, with the witness point it
/// was computed from. signs[i] in {-1, 0, +1}; |alpha.x| <= tol counts as 0.
struct FacetSignature {
  std::vector<int> signs;
  Vec witness;

  int zero_count() const {
    int n = 0;
    for (int s : signs)
      if (s == 0) ++n;
    return n;
  }
  /// Membership in the set of facets supported on exactly one hyperplane.
  bool single_support() const { return zero_count() == 1; }
  /// Index (into R+) of the supporting hyperplane; requires single_support().
  int support() const {
    for (std::size_t i = 0; i < signs.size(); ++i)
      if (signs[i] == 0) return static_cast<int>(i);
    throw internal_error("FacetSignature::support: no zero sign");
  }
  bool same_signs(const FacetSignature& o) const { return signs == o.signs; }
};

inline FacetSignature facet_signature(const RootSystem& rs, const Vec& x, double tol) {
  if (tol <= 0.0) throw invalid_parameter("facet_signature: tol must be positive");
  FacetSignature f;
  f.signs.reserve(rs.positive.size());
  for (const Root& a : rs.positive) {
    const double c = a.vec.dot(x);
    f.signs.push_back(std::fabs(c) <= tol ? 0 : (c > 0.0 ? 1 : -1));
  }
  f.witness = x;
  return f;
}

inline std::string signature_string(const FacetSignature& f) {
  std::string s;
  s.reserve(f.signs.size());
  for (int v : f.signs) s.push_back(v == 0 ? '0' : (v > 0 ? '+' : '-'));
  return s;
}

/// Image of a single-hyperplane facet under r_alpha for a simple alpha,
/// computed from the witness point. The case analysis (fixed when alpha is
/// nonnegative on F, support moved to s_alpha(support) when negative) is a
/// consequence checked by the tests, not an input here.
inline FacetSignature fold_facet(const RootSystem& rs, int simple_index, const FacetSignature& f,
                                 double tol = 1e-9) {
  if (!f.single_support())
    throw invalid_parameter("fold_facet: facet must be supported on exactly one hyperplane");
  const FacetSignature check = facet_signature(rs, f.witness, tol);
  if (!check.same_signs(f))
    throw invalid_parameter("fold_facet: witness point does not realize the signature");
  const Vec& alpha = rs.simple.at(static_cast<std::size_t>(simple_index)).vec;
  return facet_signature(rs, fold_one(alpha, f.witness), tol);
}

/// A facet of the arrangement together with its supporting hyperplane and the
/// face of the chamber it projects to.
struct Facet {
  FacetSignature sig;
  int support = -1;  // index into rs.positive
  int fiber = -1;    // index into rs.simple: pi(F) = F_fiber
};

/// Witness of the open face F_alpha: sum of the dual basis over the other
/// simple roots (alpha.w = 0, beta.w = 1 for beta != alpha).
inline Vec face_witness(const RootSystem& rs, int simple_index) {
  const Mat dual = simple_dual_basis(rs);
  Vec x = Vec::Zero(rs.dim);
  for (int i = 0; i < rs.dim; ++i)
    if (i != simple_index) x += dual.col(i);
  return x;
}

/// All facets supported on exactly one hyperplane: the W-images of the chamber
/// faces, deduplicated by sign pattern and labeled with their fiber.
inline std::vector<Facet> enumerate_facets(const RootSystem& rs, const WeylGroup& w,
                                           double tol = 1e-9) {
  std::vector<Facet> out;
  for (std::size_t a = 0; a < rs.simple.size(); ++a) {
    const Vec base = face_witness(rs, static_cast<int>(a));
    for (const GroupElement& e : w.elements) {
      FacetSignature sig = facet_signature(rs, Vec(e.matrix * base), tol);
      if (!sig.single_support())
        throw internal_error("enumerate_facets: face image not supported on one hyperplane");
      bool dup = false;
      for (const Facet& f : out)
        if (f.sig.same_signs(sig)) {
          dup = true;
          break;
        }
      if (dup) continue;
      Facet f;
      f.support = sig.support();
      f.fiber = static_cast<int>(a);
      f.sig = std::move(sig);
      out.push_back(std::move(f));
    }
  }
  return out;
}

/// Text dump, one facet per line:
/// facet <sign-string> support <root-index> fiber <simple-root-index> witness <coords>
inline void write_facets(std::ostream& os, const RootSystem& rs, const std::vector<Facet>& facets) {
  char buf[64];
  for (const Facet& f : facets) {
    os << "facet " << signature_string(f.sig) << " support " << f.support << " fiber " << f.fiber
       << " witness";
    for (int i = 0; i < rs.dim; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", f.sig.witness(i));
      os << ' ' << buf;
    }
    os << "\n";
  }
}

// ---------------------------------------------------------------------------
// Chamber distance and its oracle
// ---------------------------------------------------------------------------

/// alpha.pi(x), the distance from x to K_alpha = union of W-images of the
/// face F_alpha.
inline double chamber_distance(const FoldingOperator& op, const Vec& alpha, const Vec& x) {
  return alpha.dot(project_pi(op, x));
}

namespace detail {

/// Euclidean distance from z to the closed cone
/// {y : rows[0].y = 0, rows[j].y >= 0 for j > 0} by active-set enumeration:
/// every subset of inequality constraints is tried as equalities and the
/// feasible minimum kept. Exact for polyhedral cones at these ranks.
inline double distance_to_face_cone(const std::vector<Vec>& rows, const Vec& z,
                                    double feas_tol = 1e-9) {
  const std::size_t m = rows.size();  // rows[0] is the equality constraint
  const std::size_t ineq = m - 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 0; mask < (1ULL << ineq); ++mask) {
    std::vector<const Vec*> active{&rows[0]};
    for (std::size_t j = 0; j < ineq; ++j)
      if (mask & (1ULL << j)) active.push_back(&rows[j + 1]);
    Mat a(static_cast<int>(active.size()), z.size());
    for (std::size_t r = 0; r < active.size(); ++r) a.row(static_cast<int>(r)) = *active[r];
    // Projection of z onto the nullspace of the active rows.
    Vec y = z - a.completeOrthogonalDecomposition().pseudoInverse() * (a * z);
    bool feasible = true;
    for (std::size_t j = 0; j < ineq; ++j)
      if (rows[j + 1].dot(y) < -feas_tol) {
        feasible = false;
        break;
      }
    if (std::fabs(rows[0].dot(y)) > feas_tol) feasible = false;
    if (feasible) best = std::min(best, (z - y).norm());
  }
  if (!std::isfinite(best))
    throw internal_error("distance_to_face_cone: no feasible active set");
  return best;
}

}  // namespace detail

/// Independent realization of the chamber distance: the minimum over w in W
/// of the distance from x to the closure of w(F_alpha), each obtained by
/// exact active-set projection onto the transformed face cone.
inline double distance_oracle(const RootSystem& rs, const WeylGroup& w, int simple_index,
                              const Vec& x) {
  if (rs.dim > 4)
    throw invalid_parameter("distance_oracle: active-set enumeration is limited to rank <= 4");
  std::vector<Vec> rows;
  rows.push_back(rs.simple.at(static_cast<std::size_t>(simple_index)).vec);
  for (std::size_t i = 0; i < rs.simple.size(); ++i)
    if (static_cast<int>(i) != simple_index) rows.push_back(rs.simple[i].vec);
  double best = std::numeric_limits<double>::infinity();
  for (const GroupElement& e : w.elements) {
    // d(x, w(F)) = d(w^{-1} x, F) and w^{-1} = w^T for orthogonal w.
    Vec z = e.matrix.transpose() * x;
    best = std::min(best, detail::distance_to_face_cone(rows, z));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Root orbits
// ---------------------------------------------------------------------------

/// Positive roots conjugate to `alpha` under W (the orbit W.alpha meets R+).
inline std::vector<int> root_orbit_positive(const WeylGroup& w, const RootSystem& rs,
                                            const Vec& alpha, double tol = 1e-10) {
  std::vector<int> orbit;
  for (const GroupElement& e : w.elements) {
    Vec v = e.matrix * alpha;
    int idx = find_root(rs.positive, v, tol);
    if (idx < 0) idx = find_root(rs.positive, -v, tol);
    if (idx < 0) throw internal_error("root_orbit_positive: orbit left the root system");
    if (std::find(orbit.begin(), orbit.end(), idx) == orbit.end()) orbit.push_back(idx);
  }
  std::sort(orbit.begin(), orbit.end());
  return orbit;
}

/// True when alpha is the only simple root in its W-orbit (the hypothesis of
/// the orbit-sum boundary identity). When false and `conflict` is non-null,
/// the index of another simple root in the orbit is stored there.
inline bool simple_alone_in_orbit(const WeylGroup& w, const RootSystem& rs, int simple_index,
                                  int* conflict = nullptr, double tol = 1e-10) {
  const Vec& alpha = rs.simple.at(static_cast<std::size_t>(simple_index)).vec;
  const std::vector<int> orbit = root_orbit_positive(w, rs, alpha, tol);
  for (int idx : orbit) {
    const int s = find_root(rs.simple, rs.positive[static_cast<std::size_t>(idx)].vec, tol);
    if (s >= 0 && s != simple_index) {
      if (conflict) *conflict = s;
      return false;
    }
  }
  return true;
}

}  // namespace weylfold
