#include "parastab/transfer_function.hpp"

#include <climits>
#include <cmath>

#include "parastab/errors.hpp"

namespace parastab {

namespace {

bool has_closed_rhp_root(const Polynomial& p) {
  if (p.degree() < 1) return false;
  for (const Root& r : poly_roots(p).roots)
    if (r.value.real() >= kClosedRhpReal) return true;
  return false;
}

// -lambda within 1e-6 of a root of p.
bool collides(const Polynomial& p, double lambda) {
  if (p.degree() < 1) return false;
  for (const Root& r : poly_roots(p).roots)
    if (std::abs(r.value + lambda) < 1e-6) return true;
  return false;
}

}  // namespace

RationalTF::RationalTF() : den_(Polynomial::constant(1.0)), cancelled_(Polynomial::constant(1.0)) {}

RationalTF::RationalTF(Polynomial num, Polynomial den) : cancelled_(Polynomial::constant(1.0)) {
  if (den.is_zero()) throw DomainError("transfer function with zero denominator");
  if (num.is_zero()) {
    den_ = Polynomial::constant(1.0);
    return;
  }
  Polynomial g = poly_gcd(num, den);
  if (g.degree() > 0) {
    num = exact_divide(num, g).first;
    den = exact_divide(den, g).first;
    rhp_cancelled_ = has_closed_rhp_root(g);
    cancelled_ = std::move(g);
  }
  const double lead = den.leading();
  num_ = num * (1.0 / lead);
  den_ = den.monic();
}

RationalTF RationalTF::constant(double k) { return RationalTF(Polynomial::constant(k), Polynomial::constant(1.0)); }

int RationalTF::relative_degree() const {
  if (num_.is_zero()) return INT_MAX / 2;
  return den_.degree() - num_.degree();
}

RationalTF operator+(const RationalTF& a, const RationalTF& b) {
  RationalTF out(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  out.rhp_cancelled_ = out.rhp_cancelled_ || a.rhp_cancelled_ || b.rhp_cancelled_;
  return out;
}

RationalTF operator-(const RationalTF& a) {
  RationalTF out = a;
  out.num_ = -a.num_;
  return out;
}

RationalTF operator-(const RationalTF& a, const RationalTF& b) { return a + (-b); }

RationalTF operator*(const RationalTF& a, const RationalTF& b) {
  RationalTF out(a.num_ * b.num_, a.den_ * b.den_);
  out.rhp_cancelled_ = out.rhp_cancelled_ || a.rhp_cancelled_ || b.rhp_cancelled_;
  return out;
}

RationalTF operator*(double k, const RationalTF& a) {
  if (k == 0.0) return RationalTF();
  RationalTF out = a;
  out.num_ = a.num_ * k;
  return out;
}

std::string RationalTF::to_string() const { return "(" + num_.to_string() + ") / (" + den_.to_string() + ")"; }

RationalTF tf_reduce(const Polynomial& num, const Polynomial& den) { return RationalTF(num, den); }

RationalTF reciprocal(const RationalTF& tf) {
  if (tf.is_zero()) throw DomainError("reciprocal of the zero transfer function");
  return RationalTF(tf.den(), tf.num());
}

bool is_stable(const RationalTF& tf, double margin) { return is_hurwitz(tf.den(), margin) == HurwitzVerdict::kYes; }

bool is_minimum_phase(const RationalTF& tf, double margin) {
  if (tf.is_zero()) return false;
  return is_hurwitz(tf.num(), margin) == HurwitzVerdict::kYes;
}

PoleZeroProfile profile(const RationalTF& tf) {
  PoleZeroProfile out;
  if (tf.den().degree() >= 1) out.poles = poly_roots(tf.den());
  if (tf.num().degree() >= 1) out.zeros = poly_roots(tf.num());
  out.relative_degree = tf.relative_degree();
  out.hf_gain = tf.num().leading() / tf.den().leading();
  out.high_frequency = out.relative_degree > 0   ? HighFrequency::kZero
                       : out.relative_degree < 0 ? HighFrequency::kInfinite
                                                 : HighFrequency::kFinite;
  return out;
}

CoprimeFactorization coprime_factorize(const RationalTF& P, double lambda) {
  if (!P.is_proper()) throw DomainError("coprime_factorize: plant is improper");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("coprime_factorize: shaping pole must be positive");
  if (collides(P.num(), lambda) || collides(P.den(), lambda))
    throw DomainError("coprime_factorize: -lambda = " + std::to_string(-lambda) + " collides with a plant root");
  CoprimeFactorization f;
  f.lambda = lambda;
  f.order = P.den().degree();
  const Polynomial shaping = Polynomial::shifted_power(lambda, static_cast<std::size_t>(f.order));
  f.N = RationalTF(P.num(), shaping);
  f.D = RationalTF(P.den(), shaping);
  return f;
}

double default_shaping_pole(const RationalTF& P) {
  for (double lambda = 1.0;; lambda += 1.0)
    if (!collides(P.num(), lambda) && !collides(P.den(), lambda)) return lambda;
}

Polynomial closed_loop_char(const RationalTF& R, double K) { return R.den() + R.num() * K; }

}  // namespace parastab
