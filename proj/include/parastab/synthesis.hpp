#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parastab/errors.hpp"
#include "parastab/interlacing.hpp"
#include "parastab/transfer_function.hpp"

namespace parastab {

struct SynthesisOptions {
  std::uint64_t seed = 1;
  /// Iterations per start, for both the Levenberg-Marquardt and the pattern
  /// search stage.
  int budget = 200;
  /// Margin for compensator stability and minimum-phase checks.
  double margin = kHurwitzMargin;
  /// Shaping pole of the coprime factorization; <= 0 picks the default.
  double lambda = 0.0;
  /// Largest number of extra compensator poles tried.
  int k_max = 12;
  /// Required max Re(root) < -target * (1 + max|root|) for the unit numerator.
  double target_margin = 1e-4;
};

struct SeriesDesign {
  RationalTF C_s = RationalTF::constant(1.0);
  std::vector<double> inserted_zeros;
  std::vector<double> inserted_poles;
  /// +1 or -1, folded into C_s.
  double gain_sign = 1.0;
};

/// Numerator data of U_p = phi / ((s + lambda)^n d_c).
///
/// d_c = d_stable * e where d_stable collects the stable poles of the
/// (series-compensated) plant, e is a monic Hurwitz polynomial of degree k,
/// and phi = d_stable * psi.
struct UnitCandidate {
  Polynomial phi;
  Polynomial d_c;
  Polynomial psi;
  Polynomial d_stable;
  int k = 0;
  /// e(0)^(1/k), the geometric mean magnitude of the extra poles.
  double mu = 1.0;
  /// -max Re over the roots of phi.
  double stability_margin = 0.0;
  /// -max Re / (1 + max|root|) over the roots of psi; compared with
  /// SynthesisOptions::target_margin.
  double normalized_margin = 0.0;
  std::string method;
};

struct CrossingGain {
  double K = 0.0;
  double omega = 0.0;
};

struct GainSample {
  double K = 0.0;
  HurwitzVerdict verdict = HurwitzVerdict::kNo;
};

struct GainAnalysis {
  double K0 = 0.0;
  std::vector<CrossingGain> crossing_gains;
  std::vector<GainSample> verified_at;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Diagnostics {
  std::vector<Check> checks;
  std::vector<std::string> notes;

  [[nodiscard]] bool ok() const;
  void add(std::string name, bool passed, std::string detail = {});
};

struct DesignResult {
  RationalTF plant;
  RationalTF C_s;
  RationalTF C_p;
  /// Absent when C_p was supplied externally and the factorization failed.
  std::optional<RationalTF> U_p;
  RationalTF combined;
  std::optional<GainAnalysis> gain;
  Diagnostics diagnostics;
  std::optional<SeriesDesign> series;
  std::optional<UnitCandidate> unit;
  double lambda = 0.0;
};

/// Raised when the unit search exhausts its budget. Carries the best
/// candidate seen so far, if any.
class SynthesisError : public Error {
 public:
  SynthesisError(const std::string& what, std::optional<UnitCandidate> best)
      : Error(what), best_(std::move(best)) {}
  [[nodiscard]] const std::optional<UnitCandidate>& best() const { return best_; }

 private:
  std::optional<UnitCandidate> best_;
};

/// Stable biproper C_s that makes C_s P satisfy IPIP. The sign is chosen so
/// the numerator of C_s P is positive at the real non-negative poles (or has
/// a positive leading coefficient when there are none).
SeriesDesign design_series(const RationalTF& P);

/// Smallest number of extra compensator poles for which a unit can meet the
/// interpolation conditions. For real s > 0 every Hurwitz root contributes a
/// term in (0, 1/s) to d/ds log(psi / e), so between two positive real
/// unstable poles s1 < s2
///   -k log(s2/s1) < log(n_p(s2) / n_p(s1)) < (n + k) log(s2/s1),
/// with the same bound on the log-derivative at repeated real poles. The bound
/// holds for every proper stable C_p of order k, not only the searched family.
int unit_degree_lower_bound(const CoprimeFactorization& F, const InterpolationData& data);

UnitCandidate synthesize_unit(const CoprimeFactorization& F, const InterpolationData& data,
                              const SynthesisOptions& options = {});

/// C_p = n_c / d_c with n_c = (phi - n_p d_c) / d_p. Throws
/// InconsistentCandidate when the division leaves a remainder.
RationalTF parallel_from_unit(const CoprimeFactorization& F, const UnitCandidate& u);

/// Threshold K0 above which unity feedback with gain K around R is stable.
/// Requires R biproper, minimum phase, with positive high-frequency gain.
GainAnalysis gain_threshold(const RationalTF& R);

DesignResult design_full(const RationalTF& P, const SynthesisOptions& options = {});

/// Recomputes everything downstream of externally supplied compensators.
/// Never throws for a failed check; verdicts go to diagnostics.
DesignResult verify_design(const RationalTF& P, const RationalTF& C_s, const RationalTF& C_p,
                           const SynthesisOptions& options = {});

}  // namespace parastab
