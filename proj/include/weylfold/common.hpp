#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace weylfold {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when a caller violates a documented precondition.
class invalid_parameter : public std::invalid_argument {
 public:
  explicit invalid_parameter(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Thrown when an internal consistency check fails (broken group, point off
/// the lattice after folding, no orbit element in the chamber, ...).
class internal_error : public std::runtime_error {
 public:
  explicit internal_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when group closure exceeds its element cap, which signals a set of
/// generators that does not come from a finite root system.
class group_explosion_error : public std::runtime_error {
 public:
  explicit group_explosion_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Default tolerances. Algebraic identity checks and matrix deduplication use
/// different scales; both can be overridden per call.
struct Tolerances {
  double algebraic = 1e-10;  // identity checks (orthogonality, root matching)
  double dedup = 1e-9;       // matrix deduplication grid in group generation
  double signature = 1e-9;   // |alpha.x| <= tol counts as "on the hyperplane"
};

inline constexpr double kUnitNormTol = 1e-12;

}  // namespace weylfold
