#include "parastab/polynomial.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "parastab/errors.hpp"

namespace parastab {

Polynomial::Polynomial(std::initializer_list<double> ascending) : coeffs_(ascending) { trim(); }

Polynomial::Polynomial(std::vector<double> ascending) : coeffs_(std::move(ascending)) { trim(); }

Polynomial Polynomial::constant(double c) { return Polynomial(std::vector<double>{c}); }

Polynomial Polynomial::monomial(double c, std::size_t power) {
  std::vector<double> v(power + 1, 0.0);
  v[power] = c;
  return Polynomial(std::move(v));
}

Polynomial Polynomial::from_roots(std::span<const Complex> roots) {
  std::vector<Complex> acc{Complex(1.0)};
  for (const Complex& r : roots) {
    std::vector<Complex> next(acc.size() + 1, Complex(0.0));
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i + 1] += acc[i];
      next[i] -= r * acc[i];
    }
    acc = std::move(next);
  }
  std::vector<double> re(acc.size());
  std::transform(acc.begin(), acc.end(), re.begin(), [](Complex c) { return c.real(); });
  return Polynomial(std::move(re));
}

Polynomial Polynomial::shifted_power(double a, std::size_t n) {
  Polynomial out = constant(1.0);
  const Polynomial factor{a, 1.0};
  for (std::size_t i = 0; i < n; ++i) out *= factor;
  return out;
}

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

int Polynomial::degree() const {
  return coeffs_.empty() ? kZeroDegree : static_cast<int>(coeffs_.size()) - 1;
}

double Polynomial::operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }

double Polynomial::leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }

double Polynomial::norm_inf() const {
  double m = 0.0;
  for (double c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

double Polynomial::operator()(double s) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

Complex Polynomial::operator()(Complex s) const {
  Complex acc(0.0);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::magnitude_bound(Complex s) const {
  const double r = std::abs(s);
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + std::abs(*it);
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return {};
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<double>(i);
  return Polynomial(std::move(d));
}

Polynomial Polynomial::monic() const {
  if (is_zero()) return {};
  Polynomial out = *this;
  out *= 1.0 / leading();
  out.coeffs_.back() = 1.0;
  return out;
}

Polynomial Polynomial::chopped(double rel_tol) const {
  const double cut = rel_tol * norm_inf();
  std::vector<double> c = coeffs_;
  for (double& x : c)
    if (std::abs(x) <= cut) x = 0.0;
  return Polynomial(std::move(c));
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
  if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0.0);
  for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
  trim();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
  if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size(), 0.0);
  for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(const Polynomial& rhs) {
  if (is_zero() || rhs.is_zero()) {
    coeffs_.clear();
    return *this;
  }
  std::vector<double> out(coeffs_.size() + rhs.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) out[i + j] += coeffs_[i] * rhs.coeffs_[j];
  coeffs_ = std::move(out);
  trim();
  return *this;
}

Polynomial& Polynomial::operator*=(double k) {
  for (double& c : coeffs_) c *= k;
  trim();
  return *this;
}

std::string Polynomial::to_string() const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int i = degree(); i >= 0; --i) {
    const double c = coeffs_[static_cast<std::size_t>(i)];
    if (c == 0.0) continue;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", std::abs(c));
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    const bool unit = std::abs(c) == 1.0 && i > 0;
    if (!unit) os << buf;
    if (i > 0) os << (unit ? "" : "*") << "s";
    if (i > 1) os << "^" << i;
    first = false;
  }
  return os.str();
}

std::pair<Polynomial, Polynomial> divrem(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) throw DomainError("divrem: division by the zero polynomial");
  if (a.degree() < b.degree()) return {Polynomial{}, a};
  std::vector<double> rem = a.coeffs();
  const auto nb = static_cast<std::size_t>(b.degree());
  const std::size_t nq = rem.size() - nb;
  std::vector<double> quo(nq, 0.0);
  const double lead = b.leading();
  for (std::size_t k = nq; k-- > 0;) {
    const double q = rem[k + nb] / lead;
    quo[k] = q;
    for (std::size_t j = 0; j <= nb; ++j) rem[k + j] -= q * b[j];
    rem[k + nb] = 0.0;
  }
  rem.resize(nb);
  return {Polynomial(std::move(quo)), Polynomial(std::move(rem))};
}

std::pair<Polynomial, Polynomial> exact_divide(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) throw DomainError("exact_divide: division by the zero polynomial");
  if (a.degree() < b.degree()) return {Polynomial{}, a};
  const auto nb = static_cast<Eigen::Index>(b.degree());
  const auto na = static_cast<Eigen::Index>(a.coeffs().size());
  const Eigen::Index nq = na - nb;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(na, nq);
  for (Eigen::Index j = 0; j < nq; ++j)
    for (Eigen::Index i = 0; i <= nb; ++i) T(i + j, j) = b[static_cast<std::size_t>(i)];
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(a.coeffs().data(), na);
  Eigen::VectorXd q = T.colPivHouseholderQr().solve(rhs);
  // The plain fit is accurate relative to the largest coefficient only. Two
  // passes weighting each row by its own magnitude scale recover the small
  // coefficients of quotients that span many decades.
  const Eigen::MatrixXd Tabs = T.cwiseAbs();
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXd scale = Tabs * q.cwiseAbs() + rhs.cwiseAbs();
    const double floor = scale.maxCoeff() * 1e-300;
    if (!(floor > 0.0)) break;
    scale = scale.cwiseMax(floor);
    const Eigen::MatrixXd W = scale.cwiseInverse().asDiagonal() * T;
    Eigen::VectorXd col = q.cwiseAbs();
    const double cfloor = col.maxCoeff() * 1e-300;
    col = col.cwiseMax(cfloor > 0.0 ? cfloor : 1.0);
    const Eigen::VectorXd y =
        (W * col.asDiagonal()).colPivHouseholderQr().solve(rhs.cwiseQuotient(scale));
    const Eigen::VectorXd next = col.cwiseProduct(y);
    if (!next.allFinite()) break;
    q = next;
  }
  Polynomial quo(std::vector<double>(q.data(), q.data() + nq));
  return {quo, a - quo * b};
}

// ---------------------------------------------------------------------------

std::vector<Complex> RootSet::flattened() const {
  std::vector<Complex> out;
  for (const Root& r : roots) out.insert(out.end(), static_cast<std::size_t>(r.multiplicity), r.value);
  return out;
}

int RootSet::total_multiplicity() const {
  return std::accumulate(roots.begin(), roots.end(), 0, [](int acc, const Root& r) { return acc + r.multiplicity; });
}

double RootSet::max_real_part() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const Root& r : roots) m = std::max(m, r.value.real());
  return m;
}

double RootSet::max_modulus() const {
  double m = 0.0;
  for (const Root& r : roots) m = std::max(m, std::abs(r.value));
  return m;
}

namespace {

// Parlett-Reinsch diagonal similarity scaling (radix 2).
void balance(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  constexpr double radix = 2.0;
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix, f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= radix * radix;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= radix * radix;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        a.row(i) /= f;
        a.col(i) *= f;
      }
    }
  }
}

std::vector<Complex> companion_eigenvalues(const Polynomial& p) {
  const int n = p.degree();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  const double lead = p.leading();
  for (int i = 0; i < n; ++i) c(0, n - 1 - i) = -p[static_cast<std::size_t>(i)] / lead;
  for (int i = 1; i < n; ++i) c(i, i - 1) = 1.0;
  balance(c);
  Eigen::EigenSolver<Eigen::MatrixXd> es(c, false);
  if (es.info() != Eigen::Success) throw DomainError("poly_roots: eigenvalue iteration did not converge");
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
  return out;
}

using LComplex = std::complex<long double>;

LComplex eval_extended(const Polynomial& p, LComplex s) {
  LComplex acc(0.0L);
  const auto& c = p.coeffs();
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + static_cast<long double>(*it);
  return acc;
}

// Residuals are evaluated in extended precision so the step is not driven by
// rounding noise in Horner's rule.
void newton_polish(const Polynomial& p, const Polynomial& dp, std::vector<Complex>& roots) {
  for (Complex& r : roots) {
    const LComplex z(r.real(), r.imag());
    const LComplex f = eval_extended(p, z);
    const LComplex df = eval_extended(dp, z);
    if (std::abs(df) == 0.0L) continue;
    const LComplex next = z - f / df;
    const Complex cand(static_cast<double>(next.real()), static_cast<double>(next.imag()));
    if (!std::isfinite(cand.real()) || !std::isfinite(cand.imag())) continue;
    const LComplex zc(cand.real(), cand.imag());
    if (std::abs(eval_extended(p, zc)) <= std::abs(f)) r = cand;
  }
}

void pair_conjugates(std::vector<Complex>& roots) {
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    Complex& z = roots[i];
    if (std::abs(z.imag()) <= kConjugatePairTol * (1.0 + std::abs(z))) {
      z = Complex(z.real(), 0.0);
      used[i] = true;
    }
  }
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i] || roots[i].imag() < 0) continue;
    std::size_t best = roots.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (used[j] || j == i || roots[j].imag() >= 0) continue;
      const double d = std::abs(roots[i] - std::conj(roots[j]));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == roots.size()) continue;
    const Complex avg = 0.5 * (roots[i] + std::conj(roots[best]));
    roots[i] = avg;
    roots[best] = std::conj(avg);
    used[i] = used[best] = true;
  }
}

// Groups numerically split repeated roots. A group is accepted when every
// derivative below its size nearly vanishes at the group centre.
std::vector<Root> cluster(const Polynomial& p, std::vector<Complex> flat) {
  std::sort(flat.begin(), flat.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<Root> out;
  std::vector<bool> taken(flat.size(), false);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (taken[i]) continue;
    std::vector<std::size_t> group{i};
    for (std::size_t j = i + 1; j < flat.size(); ++j) {
      if (taken[j]) continue;
      if (std::abs(flat[j] - flat[i]) <= 1e-5 * (1.0 + std::abs(flat[i]))) group.push_back(j);
    }
    bool accept = group.size() > 1;
    Complex centre(0.0);
    for (std::size_t g : group) centre += flat[g];
    centre /= static_cast<double>(group.size());
    if (std::abs(centre.imag()) <= kConjugatePairTol * (1.0 + std::abs(centre))) centre = Complex(centre.real(), 0.0);
    if (accept) {
      Polynomial d = p;
      for (std::size_t j = 0; j < group.size() && accept; ++j) {
        const double scale = d.magnitude_bound(centre);
        if (scale > 0 && std::abs(d(centre)) > 1e-6 * scale) accept = false;
        d = d.derivative();
      }
    }
    if (accept) {
      for (std::size_t g : group) taken[g] = true;
      out.push_back({centre, static_cast<int>(group.size())});
    } else {
      taken[i] = true;
      out.push_back({flat[i], 1});
    }
  }
  return out;
}

}  // namespace

RootSet poly_roots(const Polynomial& p) {
  if (p.degree() < 1) throw DomainError("poly_roots: polynomial must have degree >= 1");
  std::size_t origin = 0;
  while (p[origin] == 0.0) ++origin;
  std::vector<double> rest(p.coeffs().begin() + static_cast<std::ptrdiff_t>(origin), p.coeffs().end());
  const Polynomial q(std::move(rest));

  std::vector<Complex> flat;
  if (q.degree() >= 1) {
    flat = companion_eigenvalues(q);
    newton_polish(q, q.derivative(), flat);
    pair_conjugates(flat);
  }
  RootSet out;
  out.roots = cluster(p, flat);
  if (origin > 0) out.roots.push_back({Complex(0.0), static_cast<int>(origin)});
  std::sort(out.roots.begin(), out.roots.end(), [](const Root& a, const Root& b) {
    return a.value.real() != b.value.real() ? a.value.real() < b.value.real() : a.value.imag() < b.value.imag();
  });
  for (const Root& r : out.roots) {
    const LComplex z(r.value.real(), r.value.imag());
    out.residual_bound = std::max(out.residual_bound, static_cast<double>(std::abs(eval_extended(p, z))));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool is_zero_root_count(const Polynomial& p) { return p[0] == 0.0; }

}  // namespace

std::optional<int> routh_rhp_count(const Polynomial& p) {
  const int n = p.degree();
  if (n < 0) return std::nullopt;
  if (n == 0) return 0;
  if (is_zero_root_count(p)) return std::nullopt;

  // s -> sigma*s keeps both half planes and evens out the coefficients.
  const double sigma = std::pow(std::abs(p[0] / p.leading()), 1.0 / n);
  std::vector<double> a(static_cast<std::size_t>(n) + 1);
  double scale = 1.0;
  for (int i = 0; i <= n; ++i) {
    a[static_cast<std::size_t>(i)] = p[static_cast<std::size_t>(i)] * scale;
    scale *= sigma;
  }
  if (a.back() < 0)
    for (double& x : a) x = -x;

  const std::size_t width = static_cast<std::size_t>(n) / 2 + 1;
  std::vector<double> prev(width, 0.0), cur(width, 0.0);
  for (std::size_t j = 0; j < width; ++j) {
    const auto hi = static_cast<std::ptrdiff_t>(n) - 2 * static_cast<std::ptrdiff_t>(j);
    if (hi >= 0) prev[j] = a[static_cast<std::size_t>(hi)];
    if (hi - 1 >= 0) cur[j] = a[static_cast<std::size_t>(hi - 1)];
  }
  std::vector<double> first{prev[0], cur[0]};
  for (int row = 2; row <= n; ++row) {
    const double pivot = cur[0];
    double row_scale = 0.0;
    for (double x : cur) row_scale = std::max(row_scale, std::abs(x));
    if (row_scale == 0.0 || std::abs(pivot) <= 1e-12 * row_scale) return std::nullopt;
    std::vector<double> next(width, 0.0);
    for (std::size_t j = 0; j + 1 < width; ++j) {
      const double lhs = pivot * prev[j + 1];
      const double rhs = prev[0] * cur[j + 1];
      const double v = lhs - rhs;
      // Catastrophic cancellation in the pivot column means the sign is noise.
      if (j == 0 && (std::abs(lhs) + std::abs(rhs)) > 0 && std::abs(v) <= 1e-9 * (std::abs(lhs) + std::abs(rhs)))
        return std::nullopt;
      next[j] = v / pivot;
    }
    prev = std::move(cur);
    cur = std::move(next);
    first.push_back(cur[0]);
  }
  int changes = 0;
  for (std::size_t i = 1; i < first.size(); ++i) {
    if (first[i] == 0.0) return std::nullopt;
    if ((first[i] > 0) != (first[i - 1] > 0)) ++changes;
  }
  return changes;
}

HurwitzVerdict is_hurwitz(const Polynomial& p, double margin) {
  if (p.is_zero()) throw DomainError("is_hurwitz: zero polynomial");
  if (p.degree() == 0) return HurwitzVerdict::kYes;
  const RootSet rs = poly_roots(p);
  HurwitzVerdict v = HurwitzVerdict::kYes;
  for (const Root& r : rs.roots) {
    const double re = r.value.real();
    if (std::abs(re) <= margin) return HurwitzVerdict::kMarginal;
    if (re > 0) v = HurwitzVerdict::kNo;
  }
  if (const auto count = routh_rhp_count(p)) {
    const bool routh_yes = *count == 0;
    if (routh_yes != (v == HurwitzVerdict::kYes)) return HurwitzVerdict::kMarginal;
  }
  return v;
}

const char* to_string(HurwitzVerdict v) {
  switch (v) {
    case HurwitzVerdict::kYes: return "yes";
    case HurwitzVerdict::kNo: return "no";
    case HurwitzVerdict::kMarginal: return "marginal";
  }
  return "?";
}

// ---------------------------------------------------------------------------

std::vector<Complex> taylor_coefficients(const Polynomial& p, Complex s0, std::size_t count) {
  std::vector<Complex> c(p.coeffs().begin(), p.coeffs().end());
  std::vector<Complex> out(count, Complex(0.0));
  // Repeated synthetic division by (s - s0).
  for (std::size_t k = 0; k < count && !c.empty(); ++k) {
    for (std::size_t i = c.size() - 1; i-- > 0;) c[i] += s0 * c[i + 1];
    out[k] = c[0];
    c.erase(c.begin());
  }
  return out;
}

HermiteResult hermite_interpolant(std::span<const HermiteNode> nodes, std::span<const std::vector<Complex>> values) {
  if (nodes.size() != values.size()) throw DomainError("hermite_interpolant: one value list per node required");
  int total = 0;
  double sigma = 1.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].multiplicity < 1) throw DomainError("hermite_interpolant: multiplicity must be positive");
    if (values[i].size() != static_cast<std::size_t>(nodes[i].multiplicity))
      throw DomainError("hermite_interpolant: value count must equal node multiplicity");
    total += nodes[i].multiplicity;
    sigma = std::max(sigma, std::abs(nodes[i].point));
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(nodes[i].point - nodes[j].point) <= 1e-12 * (1.0 + std::abs(nodes[i].point)))
        throw DomainError("hermite_interpolant: repeated node; merge it into one node with a multiplicity");
  }
  if (total < 1) throw DomainError("hermite_interpolant: at least one condition required");

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Complex z = nodes[i].point;
    const double tol = 1e-9 * (1.0 + std::abs(z));
    if (std::abs(z.imag()) <= tol) continue;
    bool found = false;
    for (std::size_t j = 0; j < nodes.size() && !found; ++j) {
      if (std::abs(nodes[j].point - std::conj(z)) > tol || nodes[j].multiplicity != nodes[i].multiplicity) continue;
      found = true;
      for (std::size_t k = 0; k < values[i].size(); ++k) {
        const double mag = std::max(1.0, std::abs(values[i][k]));
        if (std::abs(values[j][k] - std::conj(values[i][k])) > 1e-8 * mag) found = false;
      }
    }
    if (!found) throw DomainError("hermite_interpolant: nodes and values must be closed under conjugation");
  }

  // Unknowns are coefficients in t = s / sigma.
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(total, total);
  Eigen::VectorXcd rhs(total);
  int row = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Complex t = nodes[i].point / sigma;
    for (int j = 0; j < nodes[i].multiplicity; ++j, ++row) {
      for (int c = j; c < total; ++c) {
        double falling = 1.0;
        for (int f = 0; f < j; ++f) falling *= static_cast<double>(c - f);
        m(row, c) = falling * std::pow(t, c - j);
      }
      rhs(row) = values[i][static_cast<std::size_t>(j)] * std::pow(sigma, j);
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  const Eigen::VectorXcd sol = lu.solve(rhs);

  HermiteResult out;
  out.rcond = lu.rcond();
  std::vector<double> re(static_cast<std::size_t>(total));
  double max_abs = 0.0, max_imag = 0.0, scale = 1.0;
  for (int c = 0; c < total; ++c) {
    const Complex coef = sol(c) / scale;
    re[static_cast<std::size_t>(c)] = coef.real();
    max_abs = std::max(max_abs, std::abs(coef));
    max_imag = std::max(max_imag, std::abs(coef.imag()));
    scale *= sigma;
  }
  if (max_imag > 1e-6 * std::max(max_abs, 1e-300))
    throw DomainError("hermite_interpolant: interpolant is not real; data is not conjugate-consistent");
  if (out.rcond < 1e-12) out.warning = "ill-conditioned confluent Vandermonde system (rcond " + std::to_string(out.rcond) + ")";
  out.poly = Polynomial(std::move(re));
  return out;
}

// ---------------------------------------------------------------------------

Polynomial poly_gcd(const Polynomial& a, const Polynomial& b, double tol) {
  if (a.is_zero() && b.is_zero()) throw DomainError("poly_gcd: both operands are zero");
  if (a.is_zero()) return b.monic();
  if (b.is_zero()) return a.monic();
  if (a.degree() == 0 || b.degree() == 0) return Polynomial::constant(1.0);
  const Polynomial& small = a.degree() <= b.degree() ? a : b;
  const Polynomial& large = a.degree() <= b.degree() ? b : a;

  // A root is shared when it nearly annihilates the other operand and a
  // computed root of the other operand sits next to it. The residual test
  // alone is too permissive for clustered roots of large modulus.
  const double dist_tol = std::sqrt(tol);
  std::vector<Complex> other = poly_roots(large).flattened();
  std::vector<bool> used(other.size(), false);
  std::vector<Complex> common;
  for (const Complex& r : poly_roots(small).flattened()) {
    if (r.imag() < 0) continue;
    if (std::abs(large(r)) > tol * large.magnitude_bound(r)) continue;
    std::size_t best = other.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < other.size(); ++j) {
      if (used[j] || (r.imag() == 0.0) != (other[j].imag() == 0.0) || other[j].imag() < 0) continue;
      const double d = std::abs(other[j] - r);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (best == other.size() || best_d > dist_tol * (1.0 + std::abs(r))) continue;
    used[best] = true;
    const Complex mid = 0.5 * (r + other[best]);
    common.push_back(mid);
    if (mid.imag() != 0.0) {
      // Consume the conjugate partner as well.
      for (std::size_t j = 0; j < other.size(); ++j)
        if (!used[j] && other[j] == std::conj(other[best])) {
          used[j] = true;
          break;
        }
      common.push_back(std::conj(mid));
    }
  }
  if (common.empty()) return Polynomial::constant(1.0);
  return Polynomial::from_roots(common);
}

}  // namespace parastab
