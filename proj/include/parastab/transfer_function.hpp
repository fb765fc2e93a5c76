#pragma once

#include <string>

#include "parastab/polynomial.hpp"

namespace parastab {

/// Real part above which a root counts as closed right half plane.
inline constexpr double kClosedRhpReal = -1e-9;

/// Reduced ratio num/den with a monic denominator.
///
/// Construction always reduces. If the cancelled common factor has a root in
/// the closed right half plane, rhp_cancelled() is set; synthesis refuses such
/// plants because the cancelled mode would be hidden, not stabilized.
class RationalTF {
 public:
  /// The zero function, 0/1.
  RationalTF();
  RationalTF(Polynomial num, Polynomial den);

  static RationalTF constant(double k);

  [[nodiscard]] const Polynomial& num() const { return num_; }
  [[nodiscard]] const Polynomial& den() const { return den_; }
  [[nodiscard]] bool is_zero() const { return num_.is_zero(); }
  [[nodiscard]] bool rhp_cancelled() const { return rhp_cancelled_; }
  /// Monic common factor removed during reduction (1 if none).
  [[nodiscard]] const Polynomial& cancelled() const { return cancelled_; }

  /// deg den - deg num; the zero function reports a large positive value.
  [[nodiscard]] int relative_degree() const;
  [[nodiscard]] bool is_proper() const { return relative_degree() >= 0; }
  [[nodiscard]] bool is_biproper() const { return relative_degree() == 0; }

  [[nodiscard]] Complex operator()(Complex s) const { return num_(s) / den_(s); }

  friend RationalTF operator+(const RationalTF& a, const RationalTF& b);
  friend RationalTF operator-(const RationalTF& a, const RationalTF& b);
  friend RationalTF operator*(const RationalTF& a, const RationalTF& b);
  friend RationalTF operator*(double k, const RationalTF& a);
  friend RationalTF operator-(const RationalTF& a);

  [[nodiscard]] std::string to_string() const;

 private:
  Polynomial num_;
  Polynomial den_;
  Polynomial cancelled_;
  bool rhp_cancelled_ = false;
};

/// Same as the RationalTF constructor; named for symmetry with the other
/// operations. Throws DomainError on a zero denominator.
RationalTF tf_reduce(const Polynomial& num, const Polynomial& den);

/// 1 / tf. Throws DomainError for the zero function.
RationalTF reciprocal(const RationalTF& tf);

/// True when every pole has real part < -margin (roots-based Hurwitz test).
bool is_stable(const RationalTF& tf, double margin = kHurwitzMargin);
/// True when every zero has real part < -margin. The zero function is not.
bool is_minimum_phase(const RationalTF& tf, double margin = kHurwitzMargin);

enum class HighFrequency { kZero, kFinite, kInfinite };

struct PoleZeroProfile {
  RootSet poles;
  RootSet zeros;
  int relative_degree = 0;
  /// Ratio of leading coefficients. It is the high-frequency gain only when
  /// `high_frequency` is kFinite; otherwise it signs the limit.
  double hf_gain = 0.0;
  HighFrequency high_frequency = HighFrequency::kFinite;
};

PoleZeroProfile profile(const RationalTF& tf);

struct CoprimeFactorization {
  RationalTF N;
  RationalTF D;
  double lambda = 1.0;
  /// Power of (s + lambda) in both denominators, deg P.den.
  int order = 0;
};

/// N = P.num/(s+lambda)^n, D = P.den/(s+lambda)^n with n = deg P.den.
/// Throws DomainError for an improper plant, lambda <= 0, or when -lambda is
/// within 1e-6 of a root of P.num or P.den.
CoprimeFactorization coprime_factorize(const RationalTF& P, double lambda);

/// Smallest lambda in 1, 2, 3, ... accepted by coprime_factorize.
double default_shaping_pole(const RationalTF& P);

/// R.den + K * R.num, the characteristic polynomial of unity feedback with
/// static gain K around R.
Polynomial closed_loop_char(const RationalTF& R, double K);

}  // namespace parastab
