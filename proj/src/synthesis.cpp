#include "parastab/synthesis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace parastab {

namespace {

using CVec = std::vector<Complex>;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// ---------------------------------------------------------------------------
// Series compensator

SeriesDesign assemble_series(const RationalTF& P, const std::vector<double>& zeros) {
  SeriesDesign sd;
  Polynomial zn = Polynomial::constant(1.0), zd = Polynomial::constant(1.0);
  for (double z : zeros) {
    const double a = std::max(5.0, 3.0 * z);
    zn *= Polynomial{-z, 1.0};
    zd *= Polynomial{a, 1.0};
    sd.inserted_zeros.push_back(z);
    sd.inserted_poles.push_back(-a);
  }
  const RationalTF base(zn, zd);
  const RationalTF Q = base * P;
  const InterlacingReport after = check_ipip(Q);
  double sign = Q.num().leading() > 0 ? 1.0 : -1.0;
  if (!after.real_nonneg_poles.empty()) sign = Q.num()(after.real_nonneg_poles.front().value) > 0 ? 1.0 : -1.0;
  sd.gain_sign = sign;
  sd.C_s = sign * base;
  return sd;
}

int series_degree_bound(const RationalTF& P, const std::vector<double>& zeros) {
  const RationalTF Q = assemble_series(P, zeros).C_s * P;
  const CoprimeFactorization F = coprime_factorize(Q, default_shaping_pole(Q));
  const InterpolationData data = interpolation_data(F);
  if (!data.sign_consistent) return std::numeric_limits<int>::max();
  return unit_degree_lower_bound(F, data);
}

// One zero per odd gap. Within a gap the zero may sit in any free subinterval
// between plant zeros; a grid over all of them is scored by the unit degree
// bound, and the middle of the longest run of best-scoring points wins. When
// every point scores alike this is the midpoint of the longest subinterval.
SeriesDesign build_series(const RationalTF& P) {
  const InterlacingReport rep = check_ipip(P);
  std::vector<std::vector<std::pair<double, double>>> free;
  std::vector<double> zeros;
  for (const Gap& gap : rep.offending_gaps) {
    if (gap.count % 2 == 0) continue;
    std::vector<double> pts{gap.lo};
    for (const AxisPoint& z : rep.real_nonneg_zeros)
      if (z.value > gap.lo && z.value < gap.hi) pts.push_back(z.value);
    pts.push_back(gap.hi);
    std::sort(pts.begin(), pts.end());
    std::vector<std::pair<double, double>> parts;
    std::size_t longest = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      parts.emplace_back(pts[i], pts[i + 1]);
      if (pts[i + 1] - pts[i] > parts[longest].second - parts[longest].first) longest = i;
    }
    zeros.push_back(0.5 * (parts[longest].first + parts[longest].second));
    free.push_back(std::move(parts));
  }

  constexpr int kGrid = 40;
  for (std::size_t g = 0; g < zeros.size(); ++g) {
    int best_bound = std::numeric_limits<int>::max();
    double best_z = zeros[g];
    int best_run = 0;
    for (const auto& [lo, hi] : free[g]) {
      int run = 0;
      for (int j = 1; j <= kGrid + 1; ++j) {
        int bound = std::numeric_limits<int>::max();
        if (j <= kGrid) {
          std::vector<double> trial = zeros;
          trial[g] = lo + (hi - lo) * j / (kGrid + 1);
          try {
            bound = series_degree_bound(P, trial);
          } catch (const DomainError&) {
          }
        }
        if (bound < best_bound) {
          best_bound = bound;
          best_run = 0;
          run = 0;
        }
        if (bound == best_bound) {
          ++run;
          continue;
        }
        // A run of best-scoring points [j - run, j - 1] just ended.
        if (run > best_run) {
          best_run = run;
          best_z = lo + (hi - lo) * (j - 1 - 0.5 * (run - 1)) / (kGrid + 1);
        }
        run = 0;
      }
    }
    zeros[g] = best_z;
  }
  return assemble_series(P, zeros);
}

// ---------------------------------------------------------------------------
// Unit search, factored form
//
// psi = c * prod_i (s^2 + e^{a_i} s + e^{b_i}) * (s + e^w), and the extra
// compensator poles e = prod_j (s^2 + e^{a_j} s + e^{b_j}) * (s + e^v) in the
// same monic form. Every iterate has psi and e Hurwitz. Residuals compare the
// log-Taylor coefficients of psi / e with those of n_p at the closed-RHP poles
// (upper half plane only).

CVec log_series(CVec c, std::size_t m) {
  c.resize(std::max(c.size(), m), Complex(0.0));
  CVec l(m, Complex(0.0));
  if (m == 0) return l;
  l[0] = std::log(c[0]);
  for (std::size_t k = 1; k < m; ++k) {
    Complex s = static_cast<double>(k) * c[k];
    for (std::size_t j = 1; j < k; ++j) s -= static_cast<double>(j) * l[j] * c[k - j];
    l[k] = s / (static_cast<double>(k) * c[0]);
  }
  return l;
}

struct Node {
  Complex point;
  std::size_t multiplicity;
  CVec target;  // log-Taylor coefficients of n_p
};

// Monic Hurwitz polynomial of fixed degree stored at x[offset, offset + size).
struct FactorBlock {
  std::size_t offset = 0;
  int quads = 0;
  bool linear = false;

  [[nodiscard]] std::size_t size() const { return 2 * static_cast<std::size_t>(quads) + (linear ? 1 : 0); }

  [[nodiscard]] Polynomial build(const std::vector<double>& x) const {
    Polynomial p = Polynomial::constant(1.0);
    for (int i = 0; i < quads; ++i) p *= Polynomial{std::exp(x[offset + 2 * i + 1]), std::exp(x[offset + 2 * i]), 1.0};
    if (linear) p *= Polynomial{std::exp(x[offset + size() - 1]), 1.0};
    return p;
  }

  void add_log_taylor(const std::vector<double>& x, Complex b, CVec& tot, double w) const {
    const std::size_t m = tot.size();
    auto add = [&](const CVec& l) {
      for (std::size_t j = 0; j < m; ++j) tot[j] += w * l[j];
    };
    for (int i = 0; i < quads; ++i) {
      const double a = std::exp(x[offset + 2 * i]), c0 = std::exp(x[offset + 2 * i + 1]);
      add(log_series({b * b + a * b + c0, 2.0 * b + a, 1.0}, m));
    }
    if (linear) add(log_series({b + std::exp(x[offset + size() - 1]), 1.0}, m));
  }

  // Damped quadratics with natural frequencies spread geometrically around w0;
  // spreading avoids root clusters.
  void start(std::vector<double>& x, double w0) const {
    for (int i = 0; i < quads; ++i) {
      const double w = w0 * std::pow(1.4, i - 0.5 * (quads - 1));
      x[offset + 2 * i] = std::log(1.4 * w);
      x[offset + 2 * i + 1] = 2.0 * std::log(w);
    }
    if (linear) x[offset + size() - 1] = std::log(w0);
  }
};

class FactoredModel {
 public:
  FactoredModel(int degree, int k) {
    psi_ = {1, degree / 2, degree % 2 == 1};
    e_ = {1 + psi_.size(), k / 2, k % 2 == 1};
  }

  [[nodiscard]] std::size_t size() const { return 1 + psi_.size() + e_.size(); }

  [[nodiscard]] Polynomial psi(const std::vector<double>& x) const { return psi_.build(x) * std::exp(x[0]); }
  [[nodiscard]] Polynomial e(const std::vector<double>& x) const { return e_.build(x); }

  [[nodiscard]] CVec log_taylor(const std::vector<double>& x, const Node& nd) const {
    CVec d(nd.multiplicity, Complex(0.0));
    d[0] = x[0];
    psi_.add_log_taylor(x, nd.point, d, 1.0);
    e_.add_log_taylor(x, nd.point, d, -1.0);
    return d;
  }

  [[nodiscard]] Eigen::VectorXd residual(const std::vector<double>& x, const std::vector<Node>& nodes) const {
    std::vector<double> r;
    for (const Node& nd : nodes) {
      CVec d = log_taylor(x, nd);
      for (std::size_t j = 0; j < nd.multiplicity; ++j) d[j] -= nd.target[j];
      d[0] = Complex(d[0].real(), std::remainder(d[0].imag(), 2.0 * std::numbers::pi));
      const bool real_node = nd.point.imag() == 0.0;
      for (std::size_t j = 0; j < nd.multiplicity; ++j) {
        r.push_back(d[j].real());
        if (!real_node) r.push_back(d[j].imag());
      }
    }
    return Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
  }

  [[nodiscard]] std::vector<double> start(double psi_scale, double e_scale) const {
    std::vector<double> x(size(), 0.0);
    psi_.start(x, psi_scale);
    e_.start(x, e_scale);
    return x;
  }

 private:
  FactorBlock psi_;
  FactorBlock e_;
};

struct LmOutcome {
  std::vector<double> x;
  double cost = std::numeric_limits<double>::infinity();
};

LmOutcome levenberg_marquardt(const FactoredModel& model, const std::vector<Node>& nodes, std::vector<double> x,
                              int iterations) {
  Eigen::VectorXd r = model.residual(x, nodes);
  // Fit the overall scale to the mean order-0 mismatch of the real parts.
  if (r.size() > 0) {
    double mean = 0.0;
    int count = 0;
    std::size_t idx = 0;
    for (const Node& nd : nodes) {
      mean += r[static_cast<Eigen::Index>(idx)];
      ++count;
      idx += nd.multiplicity * (nd.point.imag() == 0.0 ? 1 : 2);
    }
    x[0] -= mean / count;
    r = model.residual(x, nodes);
  }
  double cost = r.squaredNorm();
  const auto n = static_cast<Eigen::Index>(x.size());
  double damping = 1e-3;
  constexpr double h = 1e-7;
  for (int it = 0; it < iterations && cost > 1e-26 && r.size() > 0; ++it) {
    Eigen::MatrixXd J(r.size(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
      std::vector<double> xp = x, xm = x;
      xp[static_cast<std::size_t>(j)] += h;
      xm[static_cast<std::size_t>(j)] -= h;
      J.col(j) = (model.residual(xp, nodes) - model.residual(xm, nodes)) / (2.0 * h);
    }
    const Eigen::MatrixXd A = J.transpose() * J + damping * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd step = -A.ldlt().solve(J.transpose() * r);
    std::vector<double> xn = x;
    bool bounded = step.allFinite();
    for (Eigen::Index j = 0; j < n && bounded; ++j) {
      xn[static_cast<std::size_t>(j)] += step[j];
      bounded = std::abs(xn[static_cast<std::size_t>(j)]) <= 40.0;
    }
    if (!bounded) {
      damping *= 10.0;
    } else {
      const Eigen::VectorXd rn = model.residual(xn, nodes);
      const double cn = rn.squaredNorm();
      if (std::isfinite(cn) && cn < cost) {
        x = std::move(xn);
        r = rn;
        cost = cn;
        damping = std::max(damping / 3.0, 1e-12);
      } else {
        damping *= 4.0;
      }
    }
    if (damping > 1e12) break;
  }
  return {std::move(x), r.size() > 0 ? cost : 0.0};
}

// Deforms the targets from the start model's own log-Taylor data to the
// requested ones, warm-starting every step. Reaches solutions that a direct
// solve from a generic start misses.
LmOutcome continuation(const FactoredModel& model, const std::vector<Node>& nodes, std::vector<double> x,
                       int iterations) {
  std::vector<Node> from = nodes;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    from[i].target = model.log_taylor(x, nodes[i]);
    // Branch of the final phase nearest to the start.
    const double gap = nodes[i].target[0].imag() - from[i].target[0].imag();
    from[i].target[0] -= Complex(0.0, gap - std::remainder(gap, 2.0 * std::numbers::pi));
  }
  std::vector<Node> step = nodes;
  double t = 0.0, dt = 0.25;
  int budget = 40 * iterations;
  while (t < 1.0 && budget > 0) {
    const double tn = std::min(1.0, t + dt);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = 0; j < nodes[i].multiplicity; ++j)
        step[i].target[j] = from[i].target[j] + tn * (nodes[i].target[j] - from[i].target[j]);
    const int its = std::min(iterations / 4 + 10, budget);
    budget -= its;
    LmOutcome lm = levenberg_marquardt(model, step, x, its);
    if (lm.cost < 1e-14) {
      x = std::move(lm.x);
      t = tn;
      dt = std::min(2.0 * dt, 0.5);
    } else {
      dt *= 0.5;
      if (dt < 1e-3) break;
    }
  }
  if (t < 1.0) return {std::move(x), std::numeric_limits<double>::infinity()};
  return levenberg_marquardt(model, nodes, std::move(x), iterations);
}

// ---------------------------------------------------------------------------

struct Problem {
  Polynomial n_p;
  Polynomial d_p;
  Polynomial d_u;
  Polynomial d_s;
  int n = 0;
  std::vector<HermiteNode> nodes;  // upper half plane and real closed-RHP poles
  double scale = 1.0;
};

double normalized_margin(const Polynomial& psi, double* abs_margin = nullptr) {
  if (psi.degree() < 1) {
    if (abs_margin) *abs_margin = std::numeric_limits<double>::infinity();
    return psi.leading() > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  if (psi.leading() <= 0) return -std::numeric_limits<double>::infinity();
  const RootSet rs = poly_roots(psi);
  if (abs_margin) *abs_margin = -rs.max_real_part();
  return -rs.max_real_part() / (1.0 + rs.max_modulus());
}

// Total order used to pick among accepted candidates.
bool better(const UnitCandidate& a, const UnitCandidate& b) {
  if (a.normalized_margin != b.normalized_margin) return a.normalized_margin > b.normalized_margin;
  const auto& ca = a.psi.coeffs();
  const auto& cb = b.psi.coeffs();
  return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
}

// Projects psi onto the exact congruence class of n_p e modulo d_u and packs
// the candidate. Returns nothing when the result is not numerically sound.
std::optional<UnitCandidate> finalize(const Problem& pb, const Polynomial& psi_raw, const Polynomial& e, int k,
                                      double mu, const char* method) {
  const Polynomial target = pb.n_p * e;
  Polynomial psi = psi_raw;
  if (pb.d_u.degree() >= 1) {
    const Polynomial h = divrem(target, pb.d_u).second;
    psi = h + pb.d_u * divrem(psi_raw - h, pb.d_u).first;
  }
  if (psi.degree() != pb.n + k || psi.leading() <= 0) return std::nullopt;
  for (double c : psi.coeffs())
    if (!std::isfinite(c)) return std::nullopt;
  UnitCandidate u;
  u.psi = psi;
  u.d_stable = pb.d_s;
  u.phi = pb.d_s * psi;
  u.d_c = pb.d_s * e;
  u.k = k;
  u.mu = mu;
  u.method = method;
  double abs_margin = 0.0;
  u.normalized_margin = normalized_margin(psi, &abs_margin);
  u.stability_margin = abs_margin;
  if (e.degree() >= 1) {
    double e_margin = 0.0;
    u.normalized_margin = std::min(u.normalized_margin, normalized_margin(e, &e_margin));
    u.stability_margin = std::min(u.stability_margin, e_margin);
  }
  if (pb.d_s.degree() >= 1) u.stability_margin = std::min(u.stability_margin, -poly_roots(pb.d_s).max_real_part());
  // Interpolation exactness on the full numerator.
  const Polynomial diff = u.phi - pb.n_p * u.d_c;
  const double rem = exact_divide(diff, pb.d_p).second.norm_inf();
  if (rem > 1e-8 * std::max(u.phi.norm_inf(), (pb.n_p * u.d_c).norm_inf())) return std::nullopt;
  // Round trip through the parallel compensator numerator: the combined plant
  // numerator is d_s (n_p e + n_c d_u), which must keep the margin.
  const Polynomial n_c = exact_divide(diff, pb.d_p).first;
  const Polynomial psi_back = pb.n_p * e + n_c * pb.d_u;
  if (psi_back.degree() != psi.degree() || normalized_margin(psi_back) < 0.5 * u.normalized_margin) return std::nullopt;
  return u;
}

// Coordinate-wise pattern search on q in psi = h + d_u q.
std::optional<UnitCandidate> pattern_search(const Problem& pb, const Polynomial& e, int k, double mu, double c,
                                            double q_mu, int iterations, double target) {
  const Polynomial h = pb.d_u.degree() >= 1 ? divrem(pb.n_p * e, pb.d_u).second : Polynomial{};
  const int deg_q = pb.n + k - pb.d_u.degree();
  std::vector<double> q = (Polynomial::shifted_power(q_mu, static_cast<std::size_t>(deg_q)) * c).coeffs();
  auto objective = [&](const std::vector<double>& coeffs) {
    if (coeffs.back() <= 0) return std::numeric_limits<double>::infinity();
    const Polynomial psi = h + pb.d_u * Polynomial(coeffs);
    const double v = -normalized_margin(psi);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  double best = objective(q);
  std::vector<double> step(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) step[i] = 0.25 * std::max(std::abs(q[i]), 1e-3 * std::abs(c));
  for (int it = 0; it < iterations && best >= -target; ++it) {
    bool improved = false;
    for (std::size_t i = 0; i < q.size(); ++i) {
      for (double dir : {1.0, -1.0}) {
        std::vector<double> trial = q;
        trial[i] += dir * step[i];
        const double v = objective(trial);
        if (v < best) {
          best = v;
          q = std::move(trial);
          improved = true;
          break;
        }
      }
    }
    if (!improved)
      for (double& s : step) s *= 0.5;
  }
  if (best >= -target) return std::nullopt;
  return finalize(pb, h + pb.d_u * Polynomial(q), e, k, mu, "pattern-search");
}

// Classical construction: V = prod_j (1 + G_j) with G_j = h_j / d_j, where
// h_j interpolates d_j (W^(1/M) - 1) at the closed-RHP poles and
// W = n_p / a. Each factor is a unit once d_j + h_j is Hurwitz, which holds
// for M large enough. psi = a prod_j (d_j + h_j), e = prod_j d_j.
CVec exp_series(const CVec& l) {
  CVec c(l.size(), Complex(0.0));
  if (l.empty()) return c;
  c[0] = std::exp(l[0]);
  for (std::size_t k = 1; k < l.size(); ++k) {
    Complex acc(0.0);
    for (std::size_t j = 1; j <= k; ++j) acc += static_cast<double>(j) * l[j] * c[k - j];
    c[k] = acc / static_cast<double>(k);
  }
  return c;
}

Polynomial spread_poles(int count, double base) {
  std::vector<Complex> r;
  for (int i = 0; i < count; ++i) r.emplace_back(-base * std::pow(1.25, i), 0.0);
  return Polynomial::from_roots(r);
}

std::optional<UnitCandidate> power_unit(const Problem& pb, int M, double beta) {
  const int m = pb.d_u.degree();
  if (m < 1 || M < 1) return std::nullopt;
  const Polynomial a = spread_poles(pb.n, pb.scale);
  std::vector<HermiteNode> hnodes;
  std::vector<CVec> logs;
  for (const HermiteNode& nd : pb.nodes) {
    const auto mult = static_cast<std::size_t>(nd.multiplicity);
    CVec l = log_series(taylor_coefficients(pb.n_p, nd.point, mult), mult);
    const CVec la = log_series(taylor_coefficients(a, nd.point, mult), mult);
    for (std::size_t j = 0; j < mult; ++j) l[j] = (l[j] - la[j]) / static_cast<double>(M);
    hnodes.push_back(nd);
    logs.push_back(l);
    if (nd.point.imag() != 0.0) {
      hnodes.push_back({std::conj(nd.point), nd.multiplicity});
      for (Complex& c : l) c = std::conj(c);
      logs.push_back(l);
    }
  }
  Polynomial psi = a, e = Polynomial::constant(1.0);
  for (int j = 0; j < M; ++j) {
    const Polynomial d = spread_poles(m, beta * std::pow(1.1, j));
    std::vector<CVec> values;
    for (std::size_t i = 0; i < hnodes.size(); ++i) {
      const auto mult = static_cast<std::size_t>(hnodes[i].multiplicity);
      CVec v = exp_series(logs[i]);
      v[0] -= 1.0;
      const CVec dt = taylor_coefficients(d, hnodes[i].point, mult);
      CVec h(mult, Complex(0.0));
      double factorial = 1.0;
      for (std::size_t q = 0; q < mult; ++q) {
        for (std::size_t r = 0; r <= q; ++r) h[q] += dt[r] * v[q - r];
        if (q > 0) factorial *= static_cast<double>(q);
        h[q] *= factorial;
      }
      values.push_back(std::move(h));
    }
    Polynomial factor;
    try {
      factor = d + hermite_interpolant(hnodes, values).poly;
    } catch (const DomainError&) {
      return std::nullopt;
    }
    if (factor.degree() != m || normalized_margin(factor) <= 0) return std::nullopt;
    psi *= factor;
    e *= d;
  }
  return finalize(pb, psi, e, m * M, std::pow(e[0], 1.0 / (m * M)), "power-unit");
}

Problem make_problem(const CoprimeFactorization& F, const InterpolationData& data) {
  Problem pb;
  pb.n_p = F.N.num();
  pb.d_p = F.D.num();
  pb.n = pb.d_p.degree();
  std::vector<Complex> unstable, stable;
  if (pb.n >= 1)
    for (const Complex& r : poly_roots(pb.d_p).flattened()) (r.real() >= kClosedRhpReal ? unstable : stable).push_back(r);
  pb.d_u = Polynomial::from_roots(unstable);
  pb.d_s = Polynomial::from_roots(stable) * pb.d_p.leading();

  int conditions = 0;
  for (const InterpolationNode& nd : data.nodes) {
    conditions += nd.multiplicity;
    if (nd.point.imag() < 0) continue;
    pb.nodes.push_back({nd.point, nd.multiplicity});
    pb.scale = std::max(pb.scale, std::abs(nd.point));
  }
  if (conditions != pb.d_u.degree())
    throw DomainError("synthesize_unit: interpolation nodes do not match the unstable part of the plant denominator");
  return pb;
}

}  // namespace

// ---------------------------------------------------------------------------

bool Diagnostics::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

void Diagnostics::add(std::string name, bool passed, std::string detail) {
  checks.push_back({std::move(name), passed, std::move(detail)});
}

SeriesDesign design_series(const RationalTF& P) {
  if (P.is_zero()) throw DomainError("design_series: zero plant");
  if (!P.is_proper()) throw DomainError("design_series: plant is improper");
  if (P.rhp_cancelled()) throw DomainError("design_series: plant has a right-half-plane pole-zero cancellation");
  SeriesDesign sd = build_series(P);
  if (!check_ipip(sd.C_s * P).verdict) throw Error("design_series: inserted zeros did not restore IPIP");
  return sd;
}

int unit_degree_lower_bound(const CoprimeFactorization& F, const InterpolationData& data) {
  const Polynomial& n_p = F.N.num();
  const int n = F.D.num().degree();
  // Smallest k with -k <= L / ell <= n + k, for a log change L over a
  // log-interval ell > 0. The non-strict form never overstates the bound.
  auto need = [n](double L, double ell) {
    const double ratio = L / ell;
    return std::max({0, static_cast<int>(std::ceil(ratio - n - 1e-9)), static_cast<int>(std::ceil(-ratio - 1e-9))});
  };
  std::vector<std::pair<double, int>> reals;
  int k = 0;
  for (const InterpolationNode& nd : data.nodes) {
    const Complex z = nd.point;
    if (z.real() <= 0.0) continue;
    if (z.imag() == 0.0) {
      reals.emplace_back(z.real(), nd.multiplicity);
    } else if (z.imag() > 0.0) {
      // W is positive on the positive real axis, and each root moves its phase
      // at z by an angle in (0, theta); the phase must reach arg n_p(z) mod 2 pi.
      const double theta = std::atan(z.imag() / z.real());
      const double target = std::arg(n_p(z));
      int best = std::numeric_limits<int>::max();
      for (int j = -2; j <= 2; ++j) best = std::min(best, need(target + 2.0 * std::numbers::pi * j, theta));
      k = std::max(k, best);
    }
  }
  for (std::size_t i = 0; i < reals.size(); ++i) {
    const double si = reals[i].first;
    const double vi = n_p(si);
    if (!(vi > 0)) continue;
    if (reals[i].second > 1) {
      // Log-derivative at s: s * p'/p lies in (-k, n + k).
      const double slope = si * n_p.derivative()(si) / vi;
      k = std::max(k, need(slope, 1.0));
    }
    for (std::size_t j = 0; j < reals.size(); ++j) {
      const double sj = reals[j].first;
      const double vj = n_p(sj);
      if (sj <= si || !(vj > 0)) continue;
      k = std::max(k, need(std::log(vj / vi), std::log(sj / si)));
    }
  }
  return k;
}

UnitCandidate synthesize_unit(const CoprimeFactorization& F, const InterpolationData& data,
                              const SynthesisOptions& options) {
  if (!data.sign_consistent) throw DomainError("synthesize_unit: plant numerator changes sign over unstable real poles");
  const Problem pb = make_problem(F, data);
  for (const HermiteNode& nd : pb.nodes)
    if (nd.point.imag() == 0.0 && pb.n_p(nd.point.real()) <= 0)
      throw DomainError("synthesize_unit: plant numerator must be positive at unstable real poles");

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double sc = pb.scale;
  std::optional<UnitCandidate> best_any;
  std::vector<Node> targets;
  for (const HermiteNode& nd : pb.nodes) {
    const auto m = static_cast<std::size_t>(nd.multiplicity);
    targets.push_back({nd.point, m, log_series(taylor_coefficients(pb.n_p, nd.point, m), m)});
  }

  const int k_min = unit_degree_lower_bound(F, data);
  if (k_min > options.k_max)
    throw SynthesisError("no unit exists with fewer than " + std::to_string(k_min) +
                             " extra compensator poles (k_max = " + std::to_string(options.k_max) + ")",
                         std::nullopt);
  for (int k = k_min; k <= options.k_max; ++k) {
    struct Start {
      double mu, mu0;
      double jitter;
    };
    std::vector<Start> starts;
    const std::vector<double> mus =
        k == 0 ? std::vector<double>{sc} : std::vector<double>{sc, 5 * sc, 20 * sc, 100 * sc, 0.3 * sc};
    for (double mu : mus)
      for (double mu0 : {sc, 0.3 * sc, 0.05 * sc, 3 * sc, 10 * sc}) starts.push_back({mu, mu0, 0.0});
    for (int i = 0; i < 4; ++i)
      starts.push_back({sc * std::pow(10.0, -0.5 + 2.0 * unit(rng)), sc * std::pow(10.0, -0.7 + 1.4 * unit(rng)), 0.3});

    std::vector<UnitCandidate> accepted;
    const FactoredModel model(pb.n + k, k);
    for (const Start& st : starts) {
      std::vector<double> x0 = model.start(st.mu0, st.mu);
      for (std::size_t i = 1; i < x0.size(); ++i) x0[i] += st.jitter * (2.0 * unit(rng) - 1.0);
      LmOutcome lm = levenberg_marquardt(model, targets, x0, options.budget);
      if (!(lm.cost < 1e-20)) lm = continuation(model, targets, x0, options.budget);
      if (!(lm.cost < 1e-20)) continue;
      const Polynomial e = model.e(lm.x);
      const double mu = k > 0 ? std::pow(e[0], 1.0 / k) : 0.0;
      auto cand = finalize(pb, model.psi(lm.x), e, k, mu, "factored-lm");
      if (!cand) continue;
      if (!best_any || better(*cand, *best_any)) best_any = cand;
      if (cand->normalized_margin > options.target_margin) accepted.push_back(std::move(*cand));
    }

    if (accepted.empty()) {
      for (double mu : {1.0, 5.0, 20.0, 100.0}) {
        for (double c : {1e-2, 1.0, 1e2, 1e4}) {
          const Polynomial e = Polynomial::shifted_power(mu, static_cast<std::size_t>(k));
          auto cand = pattern_search(pb, e, k, mu, c, mu, options.budget, options.target_margin);
          if (!cand) continue;
          if (!best_any || better(*cand, *best_any)) best_any = cand;
          if (cand->normalized_margin > options.target_margin) accepted.push_back(std::move(*cand));
          break;
        }
        if (!accepted.empty()) break;
      }
    }
    if (accepted.empty() && k > 0 && k % std::max(pb.d_u.degree(), 1) == 0) {
      for (double beta : {sc, 3 * sc, 10 * sc, 30 * sc}) {
        auto cand = power_unit(pb, k / pb.d_u.degree(), beta);
        if (!cand) continue;
        if (!best_any || better(*cand, *best_any)) best_any = cand;
        if (cand->normalized_margin > options.target_margin) accepted.push_back(std::move(*cand));
      }
    }
    if (!accepted.empty()) return *std::min_element(accepted.begin(), accepted.end(), better);
  }
  std::string msg = "unit synthesis exhausted its budget up to k = " + std::to_string(options.k_max);
  if (best_any) msg += "; best normalized margin " + fmt(best_any->normalized_margin);
  throw SynthesisError(msg, best_any);
}

RationalTF parallel_from_unit(const CoprimeFactorization& F, const UnitCandidate& u) {
  const Polynomial& n_p = F.N.num();
  const Polynomial& d_p = F.D.num();
  const Polynomial diff = u.phi - n_p * u.d_c;
  const auto [n_c, rem] = exact_divide(diff, d_p);
  const double scale = std::max(u.phi.norm_inf(), (n_p * u.d_c).norm_inf());
  if (rem.norm_inf() > 1e-8 * scale)
    throw InconsistentCandidate("parallel_from_unit: phi - n_p d_c is not divisible by d_p (relative remainder " +
                                fmt(rem.norm_inf() / scale) + ")");
  return RationalTF(n_c, u.d_c);
}

// ---------------------------------------------------------------------------

namespace {

// D (C_s P + C_p) assembled from root sets. Dividing coefficient lists loses
// the small leading coefficients of a numerator that spans many decades.
RationalTF unit_from_combined(const RationalTF& combined, const CoprimeFactorization& F) {
  std::vector<Complex> zeros = poly_roots(combined.num()).flattened();
  std::vector<Complex> poles = poly_roots(combined.den()).flattened();
  std::vector<Complex> extra;
  for (const Complex& r : poly_roots(F.D.num()).flattened()) {
    auto best = std::min_element(poles.begin(), poles.end(),
                                 [&](const Complex& a, const Complex& b) { return std::abs(a - r) < std::abs(b - r); });
    if (best != poles.end() && std::abs(*best - r) <= std::sqrt(kGcdTolerance) * (1.0 + std::abs(r)))
      poles.erase(best);
    else
      extra.push_back(r);
  }
  zeros.insert(zeros.end(), extra.begin(), extra.end());
  for (int i = 0; i < F.order; ++i) poles.push_back(Complex(-F.lambda));
  const double gain = combined.num().leading() * F.D.num().leading() / combined.den().leading();
  return RationalTF(Polynomial::from_roots(zeros) * gain, Polynomial::from_roots(poles));
}

// Real and imaginary parts of p(j w) as polynomials in w.
std::pair<Polynomial, Polynomial> split_jw(const Polynomial& p) {
  std::vector<double> re(p.coeffs().size(), 0.0), im(p.coeffs().size(), 0.0);
  for (std::size_t k = 0; k < p.coeffs().size(); ++k) {
    const double c = p[k];
    switch (k % 4) {
      case 0: re[k] = c; break;
      case 1: im[k] = c; break;
      case 2: re[k] = -c; break;
      default: im[k] = -c; break;
    }
  }
  return {Polynomial(re), Polynomial(im)};
}

bool open_loop_stable(const RationalTF& R, double K) {
  const Polynomial p = closed_loop_char(R, K);
  return p.degree() < 1 ? true : poly_roots(p).max_real_part() < 0.0;
}

}  // namespace

GainAnalysis gain_threshold(const RationalTF& R) {
  if (!R.is_biproper()) throw DomainError("gain_threshold: combined plant must be biproper");
  if (R.num().leading() / R.den().leading() <= 0) throw DomainError("gain_threshold: high-frequency gain must be positive");
  if (R.num().degree() >= 1 && poly_roots(R.num()).max_real_part() >= 0)
    throw DomainError("gain_threshold: combined plant must be minimum phase");

  GainAnalysis out;
  const auto [Nr, Ni] = split_jw(R.num());
  const auto [Dr, Di] = split_jw(R.den());
  const Polynomial crossing = Di * Nr - Dr * Ni;
  std::vector<CrossingGain> cands;
  if (crossing.degree() >= 1) {
    for (const Root& r : poly_roots(crossing).roots) {
      const double w = r.value.real();
      if (std::abs(r.value.imag()) > 1e-6 * (1.0 + std::abs(w)) || w < 0.0) continue;
      const double nr = Nr(w), ni = Ni(w), dr = Dr(w), di = Di(w);
      const double K = -(dr * nr + di * ni) / (nr * nr + ni * ni);
      if (K > 0 && std::isfinite(K)) cands.push_back({K, w});
    }
  }
  const double drop = -R.den().leading() / R.num().leading();
  if (drop > 0) cands.push_back({drop, std::numeric_limits<double>::infinity()});
  std::sort(cands.begin(), cands.end(), [](const CrossingGain& a, const CrossingGain& b) { return a.K > b.K; });
  out.crossing_gains = cands;
  constexpr double delta = 1e-5;
  for (const CrossingGain& c : cands) {
    if (open_loop_stable(R, c.K * (1 + delta)) != open_loop_stable(R, c.K * (1 - delta))) {
      out.K0 = c.K;
      break;
    }
  }
  const double base = out.K0 > 0 ? out.K0 : 1.0;
  for (double f : {1.01, 2.0, 10.0, 100.0}) {
    const double K = base * f;
    out.verified_at.push_back({K, is_hurwitz(closed_loop_char(R, K))});
  }
  return out;
}

// ---------------------------------------------------------------------------

DesignResult verify_design(const RationalTF& P, const RationalTF& C_s, const RationalTF& C_p,
                           const SynthesisOptions& options) {
  DesignResult r;
  r.plant = P;
  r.C_s = C_s;
  r.C_p = C_p;
  r.combined = C_s * P + C_p;
  Diagnostics& d = r.diagnostics;
  const double margin = options.margin;

  d.add("C_s stable", is_stable(C_s, margin));
  d.add("C_s proper", C_s.is_proper());
  d.add("C_p stable", is_stable(C_p, margin));
  d.add("C_p proper", C_p.is_proper(), "relative degree " + std::to_string(C_p.is_zero() ? 0 : C_p.relative_degree()));
  d.add("combined biproper", r.combined.is_biproper());
  const bool min_phase = is_minimum_phase(r.combined, margin);
  d.add("combined minimum phase", min_phase);
  const double hf = r.combined.num().leading() / r.combined.den().leading();
  d.add("combined high-frequency gain positive", hf > 0, "hf gain " + fmt(hf));
  if (r.combined.rhp_cancelled()) d.notes.push_back("combined plant formation cancelled a closed right-half-plane root");

  try {
    const RationalTF Q = C_s * P;
    const double lambda = options.lambda > 0 ? options.lambda : default_shaping_pole(Q);
    const CoprimeFactorization F = coprime_factorize(Q, lambda);
    r.lambda = lambda;
    r.U_p = unit_from_combined(r.combined, F);
    d.add("U_p is a unit", r.U_p->is_biproper() && is_stable(*r.U_p, margin) && is_minimum_phase(*r.U_p, margin));
  } catch (const DomainError& e) {
    d.notes.push_back(std::string("U_p not formed: ") + e.what());
  }

  if (r.combined.is_biproper() && min_phase && hf > 0) {
    r.gain = gain_threshold(r.combined);
    const char* labels[] = {"closed loop Hurwitz at 1.01 K0", "closed loop Hurwitz at 2 K0", "closed loop Hurwitz at 10 K0",
                            "closed loop Hurwitz at 100 K0"};
    for (std::size_t i = 0; i < r.gain->verified_at.size(); ++i) {
      const GainSample& s = r.gain->verified_at[i];
      d.add(labels[i], s.verdict == HurwitzVerdict::kYes, "K = " + fmt(s.K) + ", " + to_string(s.verdict));
    }
  } else {
    d.notes.push_back("gain threshold skipped: combined plant is not biproper minimum phase with positive gain");
    d.add("gain threshold computed", false);
  }
  return r;
}

DesignResult design_full(const RationalTF& P, const SynthesisOptions& options) {
  const SeriesDesign sd = design_series(P);
  const RationalTF Q = sd.C_s * P;
  const double lambda = options.lambda > 0 ? options.lambda : default_shaping_pole(Q);
  const CoprimeFactorization F = coprime_factorize(Q, lambda);
  const InterpolationData data = interpolation_data(F);
  const UnitCandidate u = synthesize_unit(F, data, options);
  const RationalTF C_p = parallel_from_unit(F, u);

  SynthesisOptions verify_opts = options;
  verify_opts.lambda = lambda;
  DesignResult r = verify_design(P, sd.C_s, C_p, verify_opts);
  r.series = sd;
  r.unit = u;
  if (!r.diagnostics.ok()) {
    std::string failed;
    for (const Check& c : r.diagnostics.checks)
      if (!c.passed) failed += (failed.empty() ? "" : ", ") + c.name;
    throw SynthesisError("design failed verification: " + failed, u);
  }
  return r;
}

}  // namespace parastab
