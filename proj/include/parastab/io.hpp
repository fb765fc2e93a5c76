#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "parastab/synthesis.hpp"

namespace parastab {

using Json = nlohmann::ordered_json;

/// A plant file holds either {"num": [...], "den": [...]} with ascending
/// coefficients (constant term first) or {"zeros": [...], "poles": [...],
/// "gain": g} with complex entries as [re, im] (a bare number is real) and g
/// the ratio of leading coefficients. "label" is optional.
struct PlantSpec {
  RationalTF tf;
  std::string label;
};

/// Throws InputError naming the line and column of a syntax error or the
/// offending field.
PlantSpec parse_plant(const std::string& text);
PlantSpec plant_from_json(const Json& j, const std::string& where = "plant");

struct CompensatorPair {
  RationalTF C_s = RationalTF::constant(1.0);
  RationalTF C_p;
};

/// Accepts {"C_s": plant, "C_p": plant} at the top level or under "design",
/// so an emitted design report can be fed back to verify. C_s defaults to 1.
CompensatorPair parse_design(const std::string& text);

/// Whole file contents; throws InputError when unreadable.
std::string read_text_file(const std::string& path);

struct Provenance {
  SynthesisOptions options;
  std::string tool_version;
};

/// x rounded to 9 significant digits.
double round_sig9(double x);

Json tf_json(const RationalTF& tf);
Json analysis_json(const RationalTF& P);
/// Plant echo, interlacing reports, design, checks and provenance. The
/// time of generation is kept out of the document so identical inputs give
/// identical bytes.
Json design_report(const DesignResult& r, const Provenance& prov, const std::string& label = {});
/// Human-readable rendering of analysis_json or design_report output.
std::string render_text(const Json& report);

}  // namespace parastab
