#pragma once

#include <limits>
#include <vector>

#include "parastab/transfer_function.hpp"

namespace parastab {

/// |imag| below this times (1 + |root|) counts as real.
inline constexpr double kAxisImagTol = 1e-7;

struct AxisPoint {
  double value = 0.0;
  int multiplicity = 1;
};

/// Open interval between consecutive endpoints and the number of counted
/// roots strictly inside it. `hi` is +inf for the PIP zero at infinity.
struct Gap {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  /// A counted root sits on an endpoint (treated as a violation).
  bool touches_endpoint = false;

  [[nodiscard]] bool offending() const { return count % 2 != 0 || touches_endpoint; }
};

struct InterlacingReport {
  std::vector<AxisPoint> real_nonneg_poles;
  std::vector<AxisPoint> real_nonneg_zeros;
  std::vector<Gap> gaps;
  std::vector<Gap> offending_gaps;
  bool verdict = true;
  /// Pole at s = 0. Not counted as a "positive" pole in PIP gaps.
  bool origin_pole = false;
  /// Smallest |imag| among complex poles and zeros with positive real part;
  /// +inf when there are none. Diagnostic only.
  double positive_axis_distance = std::numeric_limits<double>::infinity();
};

/// Endpoints are real non-negative zeros, plus infinity when P is strictly
/// proper; counts are real positive poles.
InterlacingReport check_pip(const RationalTF& P);

/// Endpoints are real non-negative poles (no infinity endpoint); counts are
/// real positive zeros. Throws DomainError for improper P.
InterlacingReport check_ipip(const RationalTF& P);

struct InterpolationNode {
  Complex point;
  int multiplicity = 1;
  /// N, N', ..., N^(multiplicity-1) at point.
  std::vector<Complex> values;
};

struct InterpolationData {
  /// Zeros of D in the closed right half plane.
  std::vector<InterpolationNode> nodes;
  /// All zeros of D.
  std::vector<InterpolationNode> all_nodes;
  /// N has one sign over the real non-negative nodes.
  bool sign_consistent = true;

  [[nodiscard]] int condition_count() const;
};

/// Throws DegenerateInterpolation when a node on the imaginary axis has
/// N(node) = 0 to working precision.
InterpolationData interpolation_data(const CoprimeFactorization& F);

/// K C_s / (1 + K C_p). Throws DomainError if 1 + K C_p vanishes identically.
RationalTF effective_compensator(const RationalTF& C_s, const RationalTF& C_p, double K);

}  // namespace parastab
