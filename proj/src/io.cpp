#include "parastab/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "parastab/errors.hpp"
#include "parastab/interlacing.hpp"

namespace parastab {

namespace {

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] parse error at ..." prefix.
    if (const auto colon = what.find(": "); colon != std::string::npos) what = what.substr(colon + 2);
    throw InputError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
  }
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(where + ": not finite");
  return v;
}

Polynomial coefficients(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of coefficients, constant term first");
  std::vector<double> c;
  for (std::size_t k = 0; k < j.size(); ++k) c.push_back(number(j[k], where + "[" + std::to_string(k) + "]"));
  return Polynomial(c);
}

Complex complex_entry(const Json& j, const std::string& where) {
  if (j.is_number()) return {number(j, where), 0.0};
  if (!j.is_array() || j.size() != 2) throw InputError(where + ": expected [re, im]");
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

std::vector<Complex> complex_list(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where + ": expected an array of [re, im] entries");
  std::vector<Complex> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(complex_entry(j[k], where + "[" + std::to_string(k) + "]"));
  // Conjugate closure, matched one to one.
  std::vector<bool> used(out.size(), false);
  for (std::size_t a = 0; a < out.size(); ++a) {
    if (used[a] || out[a].imag() == 0.0) continue;
    used[a] = true;
    bool found = false;
    for (std::size_t b = 0; b < out.size() && !found; ++b) {
      if (used[b]) continue;
      if (std::abs(out[b] - std::conj(out[a])) <= 1e-9 * (1.0 + std::abs(out[a]))) {
        used[b] = found = true;
        out[b] = std::conj(out[a]);
      }
    }
    if (!found)
      throw InputError(where + "[" + std::to_string(a) + "]: complex entry has no conjugate partner");
  }
  return out;
}

Json complex_json(const Complex& z) { return Json::array({round_sig9(z.real()), round_sig9(z.imag())}); }

Json roots_json(const Polynomial& p) {
  Json out = Json::array();
  if (p.degree() < 1) return out;
  for (const Complex& z : poly_roots(p).flattened()) out.push_back(complex_json(z));
  return out;
}

Json interlacing_json(const InterlacingReport& r) {
  auto points = [](const std::vector<AxisPoint>& v) {
    Json out = Json::array();
    for (const AxisPoint& p : v) out.push_back({{"value", round_sig9(p.value)}, {"multiplicity", p.multiplicity}});
    return out;
  };
  Json gaps = Json::array();
  for (const Gap& g : r.offending_gaps) {
    Json hi = std::isinf(g.hi) ? Json("inf") : Json(round_sig9(g.hi));
    gaps.push_back({{"lo", round_sig9(g.lo)}, {"hi", hi}, {"count", g.count}, {"touches_endpoint", g.touches_endpoint}});
  }
  return {{"verdict", r.verdict},
          {"real_nonneg_poles", points(r.real_nonneg_poles)},
          {"real_nonneg_zeros", points(r.real_nonneg_zeros)},
          {"offending_gaps", gaps},
          {"origin_pole", r.origin_pole}};
}

Json checks_json(const Diagnostics& d) {
  Json out = Json::array();
  for (const Check& c : d.checks) out.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return out;
}

std::string fmt9(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string json_number_text(const Json& j) {
  if (j.is_number()) return fmt9(j.get<double>());
  if (j.is_string()) return j.get<std::string>();
  return j.dump();
}

std::string complex_text(const Json& z) {
  const double re = z[0].get<double>(), im = z[1].get<double>();
  if (im == 0.0) return fmt9(re);
  return fmt9(re) + (im < 0 ? " - " : " + ") + fmt9(std::abs(im)) + "i";
}

void render_roots(std::ostringstream& out, const char* name, const Json& list) {
  out << "  " << name << ":";
  if (list.empty()) out << " none";
  for (const Json& z : list) out << "  " << complex_text(z);
  out << '\n';
}

void render_interlacing(std::ostringstream& out, const char* name, const Json& r) {
  out << name << ": " << (r.at("verdict").get<bool>() ? "satisfied" : "violated");
  for (const Json& g : r.at("offending_gaps"))
    out << "  [gap (" << json_number_text(g.at("lo")) << ", " << json_number_text(g.at("hi")) << ") holds "
        << g.at("count").get<int>() << (g.at("touches_endpoint").get<bool>() ? ", endpoint hit" : "") << "]";
  out << '\n';
}

std::string tf_text(const Json& tf) {
  auto poly = [](const Json& c) {
    std::vector<double> v;
    for (const Json& x : c) v.push_back(x.get<double>());
    return Polynomial(v).to_string();
  };
  return "(" + poly(tf.at("num")) + ") / (" + poly(tf.at("den")) + ")";
}

}  // namespace

double round_sig9(double x) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  return std::strtod(fmt9(x).c_str(), nullptr);
}

PlantSpec plant_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  const bool coeff = j.contains("num") || j.contains("den");
  const bool zpk = j.contains("zeros") || j.contains("poles") || j.contains("gain");
  if (coeff == zpk)
    throw InputError(where + ": give exactly one of {num, den} or {zeros, poles, gain}");
  PlantSpec spec;
  if (j.contains("label")) {
    if (!j["label"].is_string()) throw InputError(where + ".label: expected a string");
    spec.label = j["label"].get<std::string>();
  }
  Polynomial num, den;
  if (coeff) {
    if (!j.contains("num") || !j.contains("den")) throw InputError(where + ": both num and den are required");
    num = coefficients(j["num"], where + ".num");
    den = coefficients(j["den"], where + ".den");
  } else {
    if (!j.contains("zeros") || !j.contains("poles") || !j.contains("gain"))
      throw InputError(where + ": zeros, poles and gain are all required");
    num = Polynomial::from_roots(complex_list(j["zeros"], where + ".zeros")) * number(j["gain"], where + ".gain");
    den = Polynomial::from_roots(complex_list(j["poles"], where + ".poles"));
  }
  if (den.is_zero()) throw InputError(where + ".den: denominator is zero");
  spec.tf = RationalTF(num, den);
  return spec;
}

PlantSpec parse_plant(const std::string& text) { return plant_from_json(parse_json(text)); }

CompensatorPair parse_design(const std::string& text) {
  const Json doc = parse_json(text);
  if (!doc.is_object()) throw InputError("design: expected an object");
  const Json& d = doc.contains("design") ? doc["design"] : doc;
  const std::string base = doc.contains("design") ? "design" : "";
  auto field = [&](const char* name) { return base.empty() ? std::string(name) : base + "." + name; };
  if (!d.is_object() || !d.contains("C_p")) throw InputError(field("C_p") + ": missing");
  CompensatorPair out;
  if (d.contains("C_s")) out.C_s = plant_from_json(d["C_s"], field("C_s")).tf;
  out.C_p = plant_from_json(d["C_p"], field("C_p")).tf;
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json tf_json(const RationalTF& tf) {
  auto coeffs = [](const Polynomial& p) {
    Json out = Json::array();
    for (double c : p.coeffs()) out.push_back(round_sig9(c));
    if (out.empty()) out.push_back(0.0);
    return out;
  };
  return {{"num", coeffs(tf.num())}, {"den", coeffs(tf.den())}};
}

Json analysis_json(const RationalTF& P) {
  Json j = {{"plant", tf_json(P)}, {"poles", roots_json(P.den())}, {"zeros", roots_json(P.num())}};
  j["relative_degree"] = P.is_zero() ? Json(nullptr) : Json(P.relative_degree());
  j["pip"] = interlacing_json(check_pip(P));
  if (P.is_proper()) j["ipip"] = interlacing_json(check_ipip(P));
  j["rhp_cancellation"] = P.rhp_cancelled();
  return j;
}

Json design_report(const DesignResult& r, const Provenance& prov, const std::string& label) {
  Json j;
  if (!label.empty()) j["label"] = label;
  j["analysis"] = analysis_json(r.plant);
  Json d = {{"C_s", tf_json(r.C_s)}, {"C_p", tf_json(r.C_p)}};
  if (r.U_p) d["U_p"] = tf_json(*r.U_p);
  d["combined"] = tf_json(r.combined);
  d["combined_poles"] = roots_json(r.combined.den());
  d["combined_zeros"] = roots_json(r.combined.num());
  d["lambda"] = round_sig9(r.lambda);
  if (r.series) {
    Json z = Json::array(), p = Json::array();
    for (double v : r.series->inserted_zeros) z.push_back(round_sig9(v));
    for (double v : r.series->inserted_poles) p.push_back(round_sig9(v));
    d["series"] = {{"inserted_zeros", z}, {"inserted_poles", p}, {"gain_sign", r.series->gain_sign}};
  }
  if (r.unit)
    d["unit"] = {{"k", r.unit->k},
                 {"mu", round_sig9(r.unit->mu)},
                 {"normalized_margin", round_sig9(r.unit->normalized_margin)},
                 {"method", r.unit->method}};
  if (r.gain) {
    Json crossings = Json::array(), samples = Json::array();
    for (const CrossingGain& c : r.gain->crossing_gains)
      crossings.push_back({{"K", round_sig9(c.K)}, {"omega", round_sig9(c.omega)}});
    for (const GainSample& s : r.gain->verified_at)
      samples.push_back({{"K", round_sig9(s.K)}, {"verdict", to_string(s.verdict)}});
    d["K0"] = round_sig9(r.gain->K0);
    d["crossing_gains"] = crossings;
    d["verified_at"] = samples;
  }
  j["design"] = d;
  j["checks"] = checks_json(r.diagnostics);
  j["notes"] = r.diagnostics.notes;
  j["ok"] = r.diagnostics.ok();
  const SynthesisOptions& o = prov.options;
  j["provenance"] = {{"seed", o.seed},
                     {"budget", o.budget},
                     {"margin", o.margin},
                     {"lambda", o.lambda},
                     {"k_max", o.k_max},
                     {"target_margin", o.target_margin},
                     {"tool_version", prov.tool_version}};
  return j;
}

std::string render_text(const Json& report) {
  std::ostringstream out;
  if (report.contains("label")) out << "label: " << report["label"].get<std::string>() << '\n';
  const Json& a = report.contains("analysis") ? report["analysis"] : report;
  out << "plant: " << tf_text(a.at("plant")) << '\n';
  render_roots(out, "poles", a.at("poles"));
  render_roots(out, "zeros", a.at("zeros"));
  render_interlacing(out, "PIP", a.at("pip"));
  if (a.contains("ipip")) render_interlacing(out, "IPIP", a["ipip"]);
  if (a.value("rhp_cancellation", false)) out << "warning: a right-half-plane pole-zero pair was cancelled\n";
  if (!report.contains("design")) return out.str();

  const Json& d = report["design"];
  out << "C_s: " << tf_text(d.at("C_s")) << '\n';
  out << "C_p: " << tf_text(d.at("C_p")) << '\n';
  if (d.contains("unit"))
    out << "unit: k = " << d["unit"]["k"].get<int>() << ", normalized margin "
        << fmt9(d["unit"]["normalized_margin"].get<double>()) << " (" << d["unit"]["method"].get<std::string>()
        << ")\n";
  out << "combined: " << tf_text(d.at("combined")) << '\n';
  render_roots(out, "poles", d.at("combined_poles"));
  render_roots(out, "zeros", d.at("combined_zeros"));
  if (d.contains("K0")) out << "stable for K > " << fmt9(d["K0"].get<double>()) << '\n';
  for (const Json& c : report.at("checks"))
    out << (c.at("passed").get<bool>() ? "  ok    " : "  FAIL  ") << c.at("name").get<std::string>()
        << (c.at("detail").get<std::string>().empty() ? "" : "  (" + c.at("detail").get<std::string>() + ")") << '\n';
  for (const Json& n : report.at("notes")) out << "  note: " << n.get<std::string>() << '\n';
  out << (report.at("ok").get<bool>() ? "verdict: pass" : "verdict: FAIL") << '\n';
  return out.str();
}

}  // namespace parastab
