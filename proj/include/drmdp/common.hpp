#ifndef DRMDP_COMMON_HPP
#define DRMDP_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace drmdp {

using Vec = std::vector<double>;
using Matrix = std::vector<Vec>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Tolerances used across the library. Probability rows are accepted and
// renormalized when within kProbTol of the simplex; LP feasibility is checked
// at kFeasTol; value-level comparisons (accumulated over stages) use kValueTol
// and witness certification uses kWitnessTol.
inline constexpr double kProbTol = 1e-9;
inline constexpr double kPivotTol = 1e-9;
inline constexpr double kPivotBreakdown = 1e-11;
inline constexpr double kFeasTol = 1e-7;
inline constexpr double kValueTol = 1e-7;
inline constexpr double kWitnessTol = 1e-8;
inline constexpr double kSaddleTol = 1e-7;
inline constexpr double kGapTol = 1e-6;
inline constexpr double kMembershipTol = 1e-8;

inline constexpr std::int64_t kDefaultEnumCap = 1'000'000;

// Malformed instances, kernels, policies or ambiguity models.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// LP breakdown or inconsistent primal/dual values: the solver refuses to
// return a possibly wrong answer.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An enumeration (extreme-kernel combinations, policy grids, ...) would exceed
// the configured cap; `count` carries the offending size.
struct CapExceededError : std::runtime_error {
  std::int64_t count;
  explicit CapExceededError(const std::string& what, std::int64_t n)
      : std::runtime_error(what), count(n) {}
};

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace drmdp

#endif  // DRMDP_COMMON_HPP
