#pragma once

// Independent oracles and random generators shared by the test binaries.
// Nothing here calls into the root finder under test unless stated.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "parastab/polynomial.hpp"
#include "parastab/transfer_function.hpp"

namespace parastab::testing {

using Complex = std::complex<double>;

/// Plain Horner evaluation, ascending coefficients.
Complex horner(const std::vector<double>& asc, Complex s);

/// Eigenvalues of the unbalanced companion matrix, no polishing.
std::vector<Complex> raw_companion_roots(const Polynomial& p);

/// Largest real part of raw_companion_roots.
double max_real_part(const Polynomial& p);

/// Gain threshold of unity feedback around R without the crossing analysis:
/// scan K on a log grid up to 1e9 for the last unstable sample, then bisect
/// the flip with the unpolished companion eigenvalues.
double bisection_threshold(const RationalTF& R);

/// Sum of |z_i - w_pi(i)| minimised greedily; returns max matched distance.
double multiset_distance(std::vector<Complex> a, std::vector<Complex> b);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin() { return integer(0, 1) == 1; }

  /// Roots closed under conjugation, real parts kept at least `gap` away
  /// from the imaginary axis. `unstable` roots get positive real parts.
  std::vector<Complex> roots(int degree, int unstable, double gap = 0.05, double radius = 5.0);

  /// Proper plant of denominator degree 1..max_degree with random stable and
  /// unstable poles and zeros. Poles and zeros are kept at least 0.1 apart, so
  /// the plant is free of (near) cancellations. A positive separation also
  /// keeps every pair of distinct poles and zeros (including conjugates) that
  /// far apart.
  RationalTF plant(int max_degree = 6, double separation = 0.0);

  /// Biproper plant with Hurwitz numerator, positive high-frequency gain and
  /// arbitrary poles.
  RationalTF biproper_minimum_phase(int max_degree = 6);

 private:
  std::mt19937_64 eng_;
};

}  // namespace parastab::testing
