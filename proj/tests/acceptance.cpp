// Runs the nine acceptance criteria and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria. Arguments select criteria by
// number.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "parastab/catalog.hpp"
#include "parastab/errors.hpp"
#include "parastab/interlacing.hpp"
#include "parastab/simulation.hpp"
#include "parastab/synthesis.hpp"
#include "test_util.hpp"

namespace {

using namespace parastab;
using testing::horner;
using testing::multiset_distance;
using testing::Rng;

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (!passed) detail << "; ";
    passed = false;
    detail << what;
  }
};

std::string g(double x) {
  std::ostringstream o;
  o.precision(6);
  o << x;
  return o.str();
}

bool near_set(const std::vector<Complex>& got, const std::vector<Complex>& want, double rel) {
  if (got.size() != want.size()) return false;
  std::vector<Complex> pool = got;
  for (const Complex& w : want) {
    auto best = std::min_element(pool.begin(), pool.end(),
                                 [&](const Complex& a, const Complex& b) { return std::abs(a - w) < std::abs(b - w); });
    if (std::abs(*best - w) > rel * std::abs(w)) return false;
    pool.erase(best);
  }
  return true;
}

// Runs f(i) for i in [0, n) over the available cores.
void parallel_for(int n, const std::function<void(int)>& f) {
  std::atomic<int> next{0};
  const unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(), static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) f(i);
    });
  for (std::thread& t : pool) t.join();
}

// ---------------------------------------------------------------------------

Outcome classification() {
  Outcome o;
  for (const CatalogEntry& e : example_catalog()) {
    const bool ipip = check_ipip(e.plant).verdict;
    o.require(ipip == e.expected_ipip, e.name + " IPIP " + (ipip ? "true" : "false"));
    if (e.expected_pip) {
      const bool pip = check_pip(e.plant).verdict;
      o.require(pip == *e.expected_pip, e.name + " PIP " + (pip ? "true" : "false"));
    }
  }
  return o;
}

Outcome example_one_fixture() {
  Outcome o;
  const CatalogEntry& e = catalog_entry("example1");
  const DesignResult r = verify_design(e.plant, e.fixture_C_s, e.fixture_C_p);
  const PoleZeroProfile pz = profile(r.combined);
  o.require(near_set(pz.poles.flattened(), {{-80.38, 0}, {-78.77, 0}, {-5, 0}, {2, 0}, {4, 0}}, 1e-3),
            "combined poles off by more than 0.1%");
  o.require(near_set(pz.zeros.flattened(),
                     {{-5.8775, 1.6335}, {-5.8775, -1.6335}, {-2.5999, 1.9296}, {-2.5999, -1.9296}, {-1.3053, 0}}, 1e-2),
            "combined zeros off by more than 1%");
  const double K0 = r.gain ? r.gain->K0 : NAN;
  o.require(K0 >= 361 && K0 <= 399, "K0 = " + g(K0));
  o.detail << (o.passed ? "K0 = " + g(K0) : "");
  return o;
}

Outcome other_fixtures() {
  Outcome o;
  std::string values;
  for (const char* name : {"example2", "example3", "example5", "example6_part1", "example6_part2"}) {
    const CatalogEntry& e = catalog_entry(name);
    const DesignResult r = verify_design(e.plant, e.fixture_C_s, e.fixture_C_p);
    o.require(r.combined.is_biproper(), std::string(name) + " combined not biproper");
    o.require(profile(r.combined).zeros.max_real_part() < 0.0, std::string(name) + " combined zero in closed RHP");
    const double K0 = r.gain ? r.gain->K0 : NAN;
    o.require(std::abs(K0 - e.published_K0) <= 0.1 * e.published_K0,
              std::string(name) + " K0 = " + g(K0) + " vs " + g(e.published_K0));
    values += (values.empty() ? "K0 = " : ", ") + g(K0);
  }
  if (o.passed) o.detail << values;
  return o;
}

// Soundness checks of a synthesized design, independent of its diagnostics.
std::string unsound(const DesignResult& r) {
  if (!is_stable(r.C_s)) return "C_s unstable";
  if (!is_stable(r.C_p)) return "C_p unstable";
  if (!r.C_p.is_proper()) return "C_p improper";
  if (!r.combined.is_biproper()) return "combined not biproper";
  if (!is_minimum_phase(r.combined)) return "combined not minimum phase";
  if (!r.gain || !std::isfinite(r.gain->K0)) return "no finite K0";
  const double base = std::max(r.gain->K0, 1e-3);
  for (double f : {1.01, 10.0, 100.0})
    if (is_hurwitz(closed_loop_char(r.combined, f * base)) != HurwitzVerdict::kYes) return "not Hurwitz at " + g(f) + " K0";
  return {};
}

Outcome synthesis_soundness() {
  Outcome o;
  std::vector<std::pair<std::string, RationalTF>> plants;
  for (const CatalogEntry& e : example_catalog()) plants.emplace_back(e.name, e.plant);
  Rng rng(42);
  for (int i = 0; i < 50; ++i) plants.emplace_back("random " + std::to_string(i), rng.plant(6, 0.5));

  std::vector<std::string> problems(plants.size());
  parallel_for(static_cast<int>(plants.size()), [&](int i) {
    try {
      problems[i] = unsound(design_full(plants[i].second));
    } catch (const Error& e) {
      problems[i] = e.what();
    }
  });
  int failed = 0;
  for (std::size_t i = 0; i < plants.size(); ++i)
    if (!problems[i].empty()) {
      ++failed;
      o.require(false, plants[i].first + ": " + problems[i]);
    }
  o.detail << (o.passed ? "" : " | ") << plants.size() - failed << "/" << plants.size() << " designs sound";
  return o;
}

Outcome gain_oracle() {
  Outcome o;
  Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const RationalTF R = rng.biproper_minimum_phase(6);
    const double a = gain_threshold(R).K0;
    const double b = testing::bisection_threshold(R);
    const double err = std::abs(a - b) / std::max(std::abs(b), 1e-12);
    worst = std::max(worst, a == b ? 0.0 : err);
    o.require(a == b || err < 1e-4, "plant " + std::to_string(i) + ": crossing " + g(a) + ", bisection " + g(b));
  }
  o.detail << (o.passed ? "" : " | ") << "worst relative gap " << g(worst);
  return o;
}

Outcome effective_compensator_equivalence() {
  Outcome o;
  double worst = 0.0;
  std::vector<std::pair<std::string, DesignResult>> designs;
  for (const CatalogEntry& e : example_catalog()) {
    designs.emplace_back(e.name, design_full(e.plant));
    designs.emplace_back(e.name + " fixture", verify_design(e.plant, e.fixture_C_s, e.fixture_C_p));
  }
  for (const auto& [name, r] : designs) {
    const double K0 = std::max(r.gain->K0, 1e-3);
    for (double K : {2.0 * K0, 10.0 * K0}) {
      // Unreduced 1 + C_eff P. Roots it shares with its denominator are modes
      // cancelled in the loop; the rest must be the characteristic roots.
      const RationalTF Ceff = effective_compensator(r.C_s, r.C_p, K);
      const Polynomial loop_den = Ceff.den() * r.plant.den();
      std::vector<Complex> a = poly_roots(Ceff.num() * r.plant.num() + loop_den).flattened();
      const std::vector<Complex> b = poly_roots(closed_loop_char(r.combined, K)).flattened();
      double worst_here = 0.0;
      for (const Complex& z : b) {
        auto best = std::min_element(a.begin(), a.end(), [&](const Complex& x, const Complex& y) {
          return std::abs(x - z) < std::abs(y - z);
        });
        if (best == a.end()) {
          worst_here = INFINITY;
          break;
        }
        worst_here = std::max(worst_here, std::abs(*best - z) / (1.0 + std::abs(z)));
        a.erase(best);
      }
      std::vector<Complex> den_roots = poly_roots(loop_den).flattened();
      for (const Complex& z : a) {
        double gap = INFINITY;
        for (const Complex& p : den_roots) gap = std::min(gap, std::abs(p - z) / (1.0 + std::abs(z)));
        worst_here = std::max(worst_here, gap);
      }
      worst = std::max(worst, worst_here);
      o.require(worst_here < 1e-6, name + " at K = " + g(K) + ": root distance " + g(worst_here));
    }
  }
  const CatalogEntry& e1 = catalog_entry("example1");
  const RationalTF Ceff = effective_compensator(e1.fixture_C_s, e1.fixture_C_p, 400.0);
  const double pole = profile(Ceff).poles.max_real_part();
  o.require(is_stable(e1.fixture_C_s) && is_stable(e1.fixture_C_p), "example 1 fixture compensators unstable");
  o.require(pole >= 0.0, "example 1 C_eff at K = 400 has no closed-RHP pole");
  o.detail << (o.passed ? "" : " | ") << "worst scaled root distance " << g(worst) << ", example 1 C_eff pole at Re "
           << g(pole);
  return o;
}

Outcome pendulum() {
  Outcome o;
  const RationalTF P = pendulum_cart_plant(9.8, 2.0, 0.5, 0.5, 1.2, 0.8);
  const PoleZeroProfile pz = profile(P);
  o.require(std::abs(pz.hf_gain + 0.41667) < 1e-3, "gain " + g(pz.hf_gain));
  auto match = [](const std::vector<Complex>& got, const std::vector<Complex>& want) {
    return got.size() == want.size() && multiset_distance(got, want) < 1e-3;
  };
  o.require(match(pz.zeros.flattened(), {{3.5, 0}, {-3.5, 0}}), "zeros");
  o.require(match(pz.poles.flattened(), {{3.031, 0}, {-3.031, 0}, {4.041, 0}, {-4.041, 0}}), "poles");
  return o;
}

Outcome switched_start() {
  Outcome o;
  const DesignResult r = design_full(catalog_entry("example2").plant);
  const double K = 2.0 * r.gain->K0;
  SimulationOptions opts;
  opts.switch_time = 1.0;
  opts.horizon = 20.0;
  opts.step = 1e-3;
  opts.plant_state = {1e-3, 0.0, 0.0};
  const SwitchedTrace tr = simulate_switched(r.plant, r.C_s, r.C_p, K, opts);

  bool grounded = true;
  for (std::size_t k = 0; k < tr.switch_index; ++k) grounded = grounded && tr.z[k] == 0.0;
  o.require(grounded, "compensator output nonzero before the switch");

  // Envelope: max |y| over consecutive windows of 0.25 s from the switch on.
  // From the window holding the post-switch peak it must not increase.
  const std::size_t window = static_cast<std::size_t>(std::lround(0.25 / opts.step));
  std::vector<double> env;
  for (std::size_t k = tr.switch_index; k < tr.y.size(); k += window) {
    double m = 0.0;
    for (std::size_t j = k; j < std::min(k + window, tr.y.size()); ++j) m = std::max(m, std::abs(tr.y[j]));
    env.push_back(m);
  }
  const auto peak = std::max_element(env.begin(), env.end());
  o.require(std::is_sorted(peak, env.end(), std::greater_equal<double>()), "envelope increases after its peak");
  const double at_switch = std::abs(tr.y[tr.switch_index]);
  const double last = std::abs(tr.y.back());
  o.require(at_switch > 0.0 && last < 1e-3 * at_switch, "final |y| = " + g(last) + ", |y(t_s)| = " + g(at_switch));

  opts.step = 5e-4;
  const SwitchedTrace half = simulate_switched(r.plant, r.C_s, r.C_p, K, opts);
  const double change = (half.final_state - tr.final_state).norm() / tr.final_state.norm();
  o.require(change < 1e-6, "step halving changes final state by " + g(change));
  o.detail << (o.passed ? "" : " | ") << "|y(t_s)| = " << g(at_switch) << ", peak " << g(*peak) << ", final "
           << g(last) << ", halving change " << g(change);
  return o;
}

Outcome numerical_bedrock() {
  Outcome o;
  Rng rng(2024);
  int residual_failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> c(static_cast<std::size_t>(rng.integer(1, 20)) + 1);
    for (double& x : c) x = rng.uniform(-10, 10);
    const Polynomial p(c);
    if (p.degree() < 1) continue;
    double r = 0.0;
    for (const Complex& z : poly_roots(p).flattened()) r = std::max(r, std::abs(horner(p.coeffs(), z)));
    const double ratio = r / p.norm_inf();
    worst = std::max(worst, ratio);
    if (ratio >= 1e-8) ++residual_failures;
  }
  o.require(residual_failures == 0,
            std::to_string(residual_failures) + "/300 root sets exceed 1e-8 ||p||, worst " + g(worst));

  int checked = 0, disagreements = 0;
  Rng hr(99);
  while (checked < 200) {
    std::vector<double> c(static_cast<std::size_t>(hr.integer(1, 20)) + 1);
    for (double& x : c) x = hr.uniform(-10, 10);
    const Polynomial p(c);
    if (p.degree() < 1) continue;
    const std::vector<Complex> roots = poly_roots(p).flattened();
    bool marginal = false;
    int rhp = 0;
    for (const Complex& z : roots) {
      marginal = marginal || std::abs(z.real()) < 1e-6 * (1.0 + std::abs(z));
      rhp += z.real() > 0.0;
    }
    if (marginal) continue;
    ++checked;
    const auto routh = routh_rhp_count(p);
    const bool by_roots = rhp == 0;
    const HurwitzVerdict v = is_hurwitz(p);
    if (!routh || *routh != rhp || (v == HurwitzVerdict::kYes) != by_roots) ++disagreements;
  }
  o.require(disagreements == 0, std::to_string(disagreements) + "/200 Routh/root disagreements");
  if (o.passed) o.detail << "worst residual " << g(worst) << " ||p||";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"classification regression", classification},
      {"example 1 fixture", example_one_fixture},
      {"fixtures of examples 2, 3, 5, 6", other_fixtures},
      {"synthesis soundness", synthesis_soundness},
      {"gain threshold oracle", gain_oracle},
      {"effective compensator equivalence", effective_compensator_equivalence},
      {"pendulum formula", pendulum},
      {"switched-start simulation", switched_start},
      {"numerical bedrock", numerical_bedrock},
  };
  int failed = 0;
  int index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    if (!only.empty() && std::find(only.begin(), only.end(), index) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.require(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !out.passed;
    std::printf("%s %d %s (%.1fs) %s\n", out.passed ? "PASS" : "FAIL", index, c.name, secs, out.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed;
}
