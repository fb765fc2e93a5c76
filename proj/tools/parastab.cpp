// Command line front end: analyze, design, verify, simulate, locus, examples.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "parastab/catalog.hpp"
#include "parastab/errors.hpp"
#include "parastab/interlacing.hpp"
#include "parastab/io.hpp"
#include "parastab/simulation.hpp"
#include "parastab/synthesis.hpp"

#ifndef PARASTAB_VERSION
#define PARASTAB_VERSION "dev"
#endif

using namespace parastab;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;

struct Common {
  SynthesisOptions options;
  std::string out;
  bool json = false;
};

// A plant argument is a file, or the name of a built-in example.
PlantSpec load_plant(const std::string& arg) {
  if (!std::filesystem::exists(arg)) {
    for (const CatalogEntry& e : example_catalog())
      if (e.name == arg) return {e.plant, e.name};
    throw InputError("'" + arg + "' is neither a readable file nor a built-in example");
  }
  PlantSpec spec = parse_plant(read_text_file(arg));
  if (spec.label.empty()) spec.label = std::filesystem::path(arg).stem().string();
  return spec;
}

std::optional<CompensatorPair> load_design(const std::string& plant_arg, const std::string& design_arg) {
  if (!design_arg.empty()) return parse_design(read_text_file(design_arg));
  if (!std::filesystem::exists(plant_arg))
    for (const CatalogEntry& e : example_catalog())
      if (e.name == plant_arg) return CompensatorPair{e.fixture_C_s, e.fixture_C_p};
  return std::nullopt;
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::ostringstream ss;
  ss << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

void emit_report(const Common& c, Json report) {
  const std::string text = render_text(report);
  report["generated_at"] = timestamp();
  if (!c.out.empty()) {
    std::ofstream f(c.out);
    if (!f) throw InputError("cannot write '" + c.out + "'");
    f << report.dump(2) << '\n';
  }
  if (c.json)
    std::cout << report.dump(2) << '\n';
  else
    std::cout << text;
}

// Writes to --out when given, otherwise stdout.
template <typename F>
void emit_stream(const Common& c, F&& write) {
  if (c.out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw InputError("cannot write '" + c.out + "'");
  write(f);
}

Provenance provenance(const Common& c) { return {c.options, PARASTAB_VERSION}; }

int run_analyze(const Common& c, const std::string& plant) {
  const PlantSpec spec = load_plant(plant);
  Json report;
  if (!spec.label.empty()) report["label"] = spec.label;
  report["analysis"] = analysis_json(spec.tf);
  emit_report(c, report);
  return 0;
}

int run_design(const Common& c, const std::string& plant) {
  const PlantSpec spec = load_plant(plant);
  const DesignResult r = design_full(spec.tf, c.options);
  emit_report(c, design_report(r, provenance(c), spec.label));
  return r.diagnostics.ok() ? 0 : kExitFailure;
}

int run_verify(const Common& c, const std::string& plant, const std::string& design) {
  const PlantSpec spec = load_plant(plant);
  const auto pair = load_design(plant, design);
  if (!pair) throw InputError("verify needs a design file for '" + plant + "'");
  const DesignResult r = verify_design(spec.tf, pair->C_s, pair->C_p, c.options);
  emit_report(c, design_report(r, provenance(c), spec.label));
  return r.diagnostics.ok() ? 0 : kExitFailure;
}

struct SimulateArgs {
  double gain = 0.0;
  double gain_factor = 2.0;
  double switch_time = 1.0;
  double horizon = 10.0;
  double step = 1e-3;
  std::vector<double> x0{1e-3};
  double input = 0.0;
};

int run_simulate(const Common& c, const std::string& plant, const std::string& design, const SimulateArgs& a) {
  const PlantSpec spec = load_plant(plant);
  RationalTF C_s = RationalTF::constant(1.0), C_p;
  if (const auto pair = load_design(plant, design)) {
    C_s = pair->C_s;
    C_p = pair->C_p;
  } else {
    const DesignResult r = design_full(spec.tf, c.options);
    C_s = r.C_s;
    C_p = r.C_p;
  }
  double K = a.gain;
  if (K == 0.0) {
    const DesignResult v = verify_design(spec.tf, C_s, C_p, c.options);
    if (!v.gain) throw DomainError("no gain threshold for this design; pass --gain");
    K = a.gain_factor * std::max(v.gain->K0, 1e-3);
  }
  SimulationOptions o;
  o.switch_time = a.switch_time;
  o.horizon = a.horizon;
  o.step = a.step;
  o.plant_state = a.x0;
  if (a.input != 0.0) o.input = [u = a.input](double) { return u; };
  const SwitchedTrace tr = simulate_switched(spec.tf, C_s, C_p, K, o);
  emit_stream(c, [&](std::ostream& os) { write_trace_csv(os, tr); });
  std::cerr << "K = " << K << ", switch at t = " << tr.switch_time << ", max |y| after switch " << tr.after_switch.y
            << ", final |y| " << std::abs(tr.y.back()) << '\n';
  return 0;
}

struct LocusArgs {
  double from = 1e-2;
  double to = 1e4;
  int points = 61;
};

int run_locus(const Common& c, const std::string& plant, const std::string& design, const LocusArgs& a) {
  if (!(a.from > 0.0 && a.to > a.from && a.points >= 2)) throw InputError("locus needs 0 < --from < --to and --points >= 2");
  const PlantSpec spec = load_plant(plant);
  RationalTF R = spec.tf;
  if (const auto pair = load_design(plant, design)) R = pair->C_s * spec.tf + pair->C_p;
  emit_stream(c, [&](std::ostream& os) {
    os << "K,root_index,re,im\n" << std::setprecision(9);
    for (int i = 0; i < a.points; ++i) {
      const double K = a.from * std::pow(a.to / a.from, static_cast<double>(i) / (a.points - 1));
      const Polynomial ch = closed_loop_char(R, K);
      if (ch.degree() < 1) continue;
      const auto roots = poly_roots(ch).flattened();
      for (std::size_t k = 0; k < roots.size(); ++k)
        os << K << ',' << k << ',' << roots[k].real() << ',' << roots[k].imag() << '\n';
    }
  });
  return 0;
}

int run_examples(const Common& c) {
  std::printf("%-16s %-10s %-22s %-24s %s\n", "example", "PIP/IPIP", "fixture K0 (published)", "designed k / K0", "status");
  bool all = true;
  for (const CatalogEntry& e : example_catalog()) {
    const bool pip_ok = !e.expected_pip || check_pip(e.plant).verdict == *e.expected_pip;
    const bool ipip_ok = check_ipip(e.plant).verdict == e.expected_ipip;
    const DesignResult fx = verify_design(e.plant, e.fixture_C_s, e.fixture_C_p, c.options);
    const double fK0 = fx.gain ? fx.gain->K0 : NAN;
    const bool fixture_ok = fx.gain && fx.combined.is_biproper() && is_minimum_phase(fx.combined) &&
                            std::abs(fK0 - e.published_K0) <= e.K0_tolerance * e.published_K0;
    std::string designed = "failed";
    bool design_ok = false;
    try {
      const DesignResult r = design_full(e.plant, c.options);
      design_ok = r.diagnostics.ok();
      char buf[64];
      std::snprintf(buf, sizeof buf, "%d / %.4g", r.unit ? r.unit->k : -1, r.gain ? r.gain->K0 : NAN);
      designed = buf;
    } catch (const Error& err) {
      designed = std::string("error: ") + err.what();
    }
    const bool ok = pip_ok && ipip_ok && fixture_ok && design_ok;
    all = all && ok;
    char fixture[64];
    std::snprintf(fixture, sizeof fixture, "%.4g (%.4g)", fK0, e.published_K0);
    std::printf("%-16s %-10s %-22s %-24s %s\n", e.name.c_str(), pip_ok && ipip_ok ? "match" : "MISMATCH", fixture,
                designed.c_str(), ok ? "pass" : "FAIL");
  }
  return all ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilization with stable series and parallel compensators and a static gain"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  app.add_option("--seed", c.options.seed, "Seed of the multi-start search");
  app.add_option("--budget", c.options.budget, "Iterations per start");
  app.add_option("--margin", c.options.margin, "Stability margin for compensator and zero checks");
  app.add_option("--lambda", c.options.lambda, "Shaping pole of the coprime factorization (0 picks the default)");
  app.add_option("--k-max", c.options.k_max, "Largest number of extra compensator poles");
  app.add_option("--out", c.out, "Write the JSON report or CSV here");
  app.add_flag("--json", c.json, "Print the JSON report instead of text");

  std::string plant, design;
  auto* analyze = app.add_subcommand("analyze", "Interlacing verdicts and pole-zero report");
  analyze->add_option("plant", plant, "Plant file (JSON) or built-in example name")->required();

  auto* design_cmd = app.add_subcommand("design", "Full synthesis");
  design_cmd->add_option("plant", plant, "Plant file (JSON) or built-in example name")->required();

  auto* verify = app.add_subcommand("verify", "Check externally supplied compensators");
  verify->add_option("plant", plant, "Plant file (JSON) or built-in example name")->required();
  verify->add_option("design", design, "File with C_s and C_p (a design report works); defaults to the published "
                                       "compensators of a built-in example");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Switched start-up simulation, CSV t,i,e,x,y,z");
  simulate->add_option("plant", plant, "Plant file (JSON) or built-in example name")->required();
  simulate->add_option("design", design, "File with C_s and C_p; synthesized when omitted");
  simulate->add_option("--gain", sim.gain, "Static gain K (default: --gain-factor times K0)");
  simulate->add_option("--gain-factor", sim.gain_factor, "K as a multiple of K0");
  simulate->add_option("--switch-time", sim.switch_time, "Time at which both switches close");
  simulate->add_option("--horizon", sim.horizon, "End time");
  simulate->add_option("--step", sim.step, "RK4 step");
  simulate->add_option("--x0", sim.x0, "Plant initial state in controllable canonical coordinates, comma separated")->delimiter(',');
  simulate->add_option("--input", sim.input, "Constant external input i");

  LocusArgs locus_args;
  auto* locus = app.add_subcommand("locus", "Closed-loop roots over a log-spaced K grid, CSV K,root_index,re,im");
  locus->add_option("plant", plant, "Plant file (JSON) or built-in example name")->required();
  locus->add_option("design", design, "File with C_s and C_p; the locus is of C_s P + C_p when given");
  locus->add_option("--from", locus_args.from, "Smallest K");
  locus->add_option("--to", locus_args.to, "Largest K");
  locus->add_option("--points", locus_args.points, "Number of K values");

  auto* examples = app.add_subcommand("examples", "Run the built-in catalog end to end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*analyze) return run_analyze(c, plant);
    if (*design_cmd) return run_design(c, plant);
    if (*verify) return run_verify(c, plant, design);
    if (*simulate) return run_simulate(c, plant, design, sim);
    if (*locus) return run_locus(c, plant, design, locus_args);
    if (*examples) return run_examples(c);
  } catch (const SynthesisError& e) {
    std::cerr << "synthesis failed: " << e.what() << '\n';
    return kExitFailure;
  } catch (const InconsistentCandidate& e) {
    std::cerr << "synthesis failed: " << e.what() << '\n';
    return kExitFailure;
  } catch (const SimulationError& e) {
    std::cerr << "simulation failed: " << e.what() << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
