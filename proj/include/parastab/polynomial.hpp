#pragma once

/**
 * @file polynomial.hpp
 * @brief Real polynomials in the Laplace variable s.
 *
 * Coefficients are stored in ascending powers: coeffs()[i] multiplies s^i.
 * Every value is canonically trimmed so that the leading coefficient is
 * nonzero; the zero polynomial has no coefficients and reports
 * Polynomial::kZeroDegree as its degree.
 */

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace parastab {

using Complex = std::complex<double>;

class Polynomial {
 public:
  /// Degree reported by the zero polynomial. Never a usable index.
  static constexpr int kZeroDegree = std::numeric_limits<int>::min();

  Polynomial() = default;
  Polynomial(std::initializer_list<double> ascending);
  explicit Polynomial(std::vector<double> ascending);

  static Polynomial constant(double c);
  static Polynomial monomial(double c, std::size_t power);
  /// Monic product of (s - r) over the given roots. Complex roots must come
  /// in conjugate pairs; the imaginary residue of the expansion is dropped.
  static Polynomial from_roots(std::span<const Complex> roots);
  /// (s + a)^n
  static Polynomial shifted_power(double a, std::size_t n);

  [[nodiscard]] int degree() const;
  [[nodiscard]] bool is_zero() const { return coeffs_.empty(); }
  [[nodiscard]] const std::vector<double>& coeffs() const { return coeffs_; }
  [[nodiscard]] double operator[](std::size_t i) const;
  [[nodiscard]] double leading() const;
  /// Max absolute coefficient; 0 for the zero polynomial.
  [[nodiscard]] double norm_inf() const;

  [[nodiscard]] double operator()(double s) const;
  [[nodiscard]] Complex operator()(Complex s) const;
  /// Sum of |c_i| |s|^i, the natural scale for judging the residual p(s).
  [[nodiscard]] double magnitude_bound(Complex s) const;

  [[nodiscard]] Polynomial derivative() const;
  [[nodiscard]] Polynomial monic() const;
  /// Zero every coefficient with |c| <= rel_tol * norm_inf() and retrim.
  [[nodiscard]] Polynomial chopped(double rel_tol) const;

  Polynomial& operator+=(const Polynomial& rhs);
  Polynomial& operator-=(const Polynomial& rhs);
  Polynomial& operator*=(const Polynomial& rhs);
  Polynomial& operator*=(double k);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Polynomial& b) { return a *= b; }
  friend Polynomial operator*(Polynomial a, double k) { return a *= k; }
  friend Polynomial operator*(double k, Polynomial a) { return a *= k; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

  [[nodiscard]] std::string to_string() const;

 private:
  void trim();
  std::vector<double> coeffs_;
};

/// Quotient and remainder with a = q*b + r, degree(r) < degree(b).
/// Throws DomainError when b is the zero polynomial.
std::pair<Polynomial, Polynomial> divrem(const Polynomial& a, const Polynomial& b);

/// Quotient q minimizing the coefficient error of a - q*b, for divisions that
/// are exact up to rounding. Long division pushes the error of every step into
/// the low-order coefficients when b has roots of large modulus; the least
/// squares fit spreads it evenly. Returns {q, a - q*b}.
std::pair<Polynomial, Polynomial> exact_divide(const Polynomial& a, const Polynomial& b);

/// Default relative tolerance for approximate common roots.
inline constexpr double kGcdTolerance = 1e-8;

/// Monic approximate GCD. A root r of the lower-degree operand is common when
/// the other operand's residual at r is below tol times its magnitude bound.
/// Returns 1 when nothing is shared. Throws DomainError if both are zero.
Polynomial poly_gcd(const Polynomial& a, const Polynomial& b, double tol = kGcdTolerance);

// ---------------------------------------------------------------------------
// Roots

struct Root {
  Complex value;
  int multiplicity = 1;
};

struct RootSet {
  std::vector<Root> roots;
  /// Max |p(root)| over the set.
  double residual_bound = 0.0;

  /// Each root repeated by its multiplicity.
  [[nodiscard]] std::vector<Complex> flattened() const;
  [[nodiscard]] int total_multiplicity() const;
  /// Largest real part; -inf for an empty set.
  [[nodiscard]] double max_real_part() const;
  [[nodiscard]] double max_modulus() const;
};

/// Roots |z - conj(w)| < kConjugatePairTol * (1 + |z|) are treated as a pair.
inline constexpr double kConjugatePairTol = 1e-7;

/// Companion-matrix eigenvalues with balancing, one guarded Newton step per
/// root, exact extraction of roots at the origin, conjugate post-pairing and
/// clustering of repeated roots. Throws DomainError for degree < 1.
RootSet poly_roots(const Polynomial& p);

// ---------------------------------------------------------------------------
// Hurwitz tests

enum class HurwitzVerdict { kYes, kNo, kMarginal };

inline constexpr double kHurwitzMargin = 1e-7;

/// Number of sign changes in the first column of the Routh array, i.e. the
/// count of open-right-half-plane roots. Empty when a pivot vanishes or
/// underflows relative to its row, in which case the table says nothing.
std::optional<int> routh_rhp_count(const Polynomial& p);

/// kYes iff every root has real part < -margin; kMarginal if some root lies
/// within +/- margin of the imaginary axis or when the Routh table disagrees
/// with the root-based verdict.
HurwitzVerdict is_hurwitz(const Polynomial& p, double margin = kHurwitzMargin);

const char* to_string(HurwitzVerdict v);

// ---------------------------------------------------------------------------
// Hermite interpolation

struct HermiteNode {
  Complex point;
  int multiplicity = 1;
};

struct HermiteResult {
  Polynomial poly;
  /// Reciprocal condition estimate of the (scaled) confluent Vandermonde
  /// system.
  double rcond = 1.0;
  std::optional<std::string> warning;
};

/// Real polynomial of degree < M (M = total multiplicity) with
/// p^(j)(node) = values[node][j] for j < multiplicity. Nodes must be closed
/// under conjugation with conjugate data. Throws DomainError on duplicate
/// nodes, mismatched data, or a non-real result.
HermiteResult hermite_interpolant(std::span<const HermiteNode> nodes,
                                  std::span<const std::vector<Complex>> values);

/// Taylor coefficients of p about s0, orders 0..count-1.
std::vector<Complex> taylor_coefficients(const Polynomial& p, Complex s0, std::size_t count);

}  // namespace parastab
