#include "parastab/interlacing.hpp"

#include <algorithm>
#include <cmath>

#include "parastab/errors.hpp"

namespace parastab {

namespace {

bool is_real(Complex z) { return std::abs(z.imag()) < kAxisImagTol * (1.0 + std::abs(z)); }

std::vector<AxisPoint> real_nonneg(const RootSet& rs) {
  std::vector<AxisPoint> out;
  for (const Root& r : rs.roots)
    if (is_real(r.value) && r.value.real() > kClosedRhpReal)
      out.push_back({std::max(r.value.real(), 0.0), r.multiplicity});
  std::sort(out.begin(), out.end(), [](const AxisPoint& a, const AxisPoint& b) { return a.value < b.value; });
  return out;
}

double positive_axis_distance(const RootSet& a, const RootSet& b) {
  double d = std::numeric_limits<double>::infinity();
  for (const RootSet* rs : {&a, &b})
    for (const Root& r : rs->roots)
      if (!is_real(r.value) && r.value.real() > 0) d = std::min(d, std::abs(r.value.imag()));
  return d;
}

bool same_point(double x, double y) { return std::abs(x - y) <= 1e-9 * (1.0 + std::abs(x)); }

// Shared by both tests: consecutive endpoints bound the gaps, counted roots
// strictly inside are tallied with multiplicity.
void fill_gaps(InterlacingReport& rep, std::vector<double> endpoints, const std::vector<AxisPoint>& counted) {
  endpoints.erase(std::unique(endpoints.begin(), endpoints.end(), same_point), endpoints.end());
  for (std::size_t i = 0; i + 1 < endpoints.size(); ++i) {
    Gap g{endpoints[i], endpoints[i + 1], 0, false};
    for (const AxisPoint& c : counted) {
      if (c.value <= 0.0) continue;
      if (same_point(c.value, g.lo) || (std::isfinite(g.hi) && same_point(c.value, g.hi)))
        g.touches_endpoint = true;
      else if (c.value > g.lo && c.value < g.hi)
        g.count += c.multiplicity;
    }
    rep.gaps.push_back(g);
    if (g.offending()) rep.offending_gaps.push_back(g);
  }
  rep.verdict = rep.offending_gaps.empty();
}

InterlacingReport base_report(const RationalTF& P, RootSet& poles, RootSet& zeros) {
  if (P.den().degree() >= 1) poles = poly_roots(P.den());
  if (P.num().degree() >= 1) zeros = poly_roots(P.num());
  InterlacingReport rep;
  rep.real_nonneg_poles = real_nonneg(poles);
  rep.real_nonneg_zeros = real_nonneg(zeros);
  rep.origin_pole = !rep.real_nonneg_poles.empty() && rep.real_nonneg_poles.front().value == 0.0;
  rep.positive_axis_distance = positive_axis_distance(poles, zeros);
  return rep;
}

}  // namespace

InterlacingReport check_pip(const RationalTF& P) {
  RootSet poles, zeros;
  InterlacingReport rep = base_report(P, poles, zeros);
  std::vector<double> ends;
  for (const AxisPoint& z : rep.real_nonneg_zeros) ends.push_back(z.value);
  if (P.relative_degree() > 0) ends.push_back(std::numeric_limits<double>::infinity());
  fill_gaps(rep, ends, rep.real_nonneg_poles);
  return rep;
}

InterlacingReport check_ipip(const RationalTF& P) {
  if (!P.is_proper()) throw DomainError("check_ipip: plant is improper");
  RootSet poles, zeros;
  InterlacingReport rep = base_report(P, poles, zeros);
  std::vector<double> ends;
  for (const AxisPoint& p : rep.real_nonneg_poles) ends.push_back(p.value);
  fill_gaps(rep, ends, rep.real_nonneg_zeros);
  return rep;
}

int InterpolationData::condition_count() const {
  int n = 0;
  for (const InterpolationNode& nd : all_nodes) n += nd.multiplicity;
  return n;
}

InterpolationData interpolation_data(const CoprimeFactorization& F) {
  InterpolationData out;
  // D.num is the plant denominator; N = n_p / (s + lambda)^n.
  if (F.D.num().degree() < 1) return out;
  const Polynomial& n_p = F.N.num();
  const Polynomial& shaping = F.N.den();
  bool seen_sign = false;
  bool positive = false;
  for (const Root& r : poly_roots(F.D.num()).roots) {
    const auto m = static_cast<std::size_t>(r.multiplicity);
    // Taylor coefficients of N at the node by power-series division.
    const auto a = taylor_coefficients(n_p, r.value, m);
    const auto b = taylor_coefficients(shaping, r.value, m);
    std::vector<Complex> c(m);
    for (std::size_t k = 0; k < m; ++k) {
      Complex acc = a[k];
      for (std::size_t j = 1; j <= k; ++j) acc -= b[j] * c[k - j];
      c[k] = acc / b[0];
    }
    InterpolationNode node{r.value, r.multiplicity, {}};
    double factorial = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k > 0) factorial *= static_cast<double>(k);
      node.values.push_back(c[k] * factorial);
    }
    const bool on_axis = std::abs(r.value.real()) <= 1e-9 * (1.0 + std::abs(r.value));
    if (on_axis && std::abs(n_p(r.value)) <= 1e-10 * n_p.magnitude_bound(r.value))
      throw DegenerateInterpolation("plant numerator vanishes at imaginary-axis pole " + std::to_string(r.value.real()) +
                                    (r.value.imag() >= 0 ? "+" : "") + std::to_string(r.value.imag()) + "i");
    out.all_nodes.push_back(node);
    if (r.value.real() >= kClosedRhpReal) {
      out.nodes.push_back(node);
      if (is_real(r.value)) {
        const bool pos = node.values[0].real() > 0;
        if (seen_sign && pos != positive) out.sign_consistent = false;
        seen_sign = true;
        positive = pos;
      }
    }
  }
  return out;
}

RationalTF effective_compensator(const RationalTF& C_s, const RationalTF& C_p, double K) {
  const RationalTF loop = RationalTF::constant(1.0) + K * C_p;
  if (loop.is_zero()) throw DomainError("effective_compensator: 1 + K C_p vanishes identically");
  return (K * C_s) * reciprocal(loop);
}

}  // namespace parastab
