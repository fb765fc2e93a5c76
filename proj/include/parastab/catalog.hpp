#pragma once

#include <optional>
#include <string>
#include <vector>

#include "parastab/transfer_function.hpp"

namespace parastab {

/// Two-pendulum cart, force input, first pendulum angle output:
///
///   (g - L2 s^2) / (L2 L1 M s^4 - g (L1 M + L1 m2 + L2 M + L2 m1) s^2 + g^2 (M + m1 + m2))
///
/// Throws DomainError unless every parameter is positive.
RationalTF pendulum_cart_plant(double g, double M, double m1, double m2, double L1, double L2);

/// A published example with its reference compensators. The compensator
/// coefficients are the printed, rounded values.
struct CatalogEntry {
  std::string name;
  std::string description;
  RationalTF plant;
  std::optional<bool> expected_pip;
  bool expected_ipip = true;
  RationalTF fixture_C_s;
  RationalTF fixture_C_p;
  double published_K0 = 0.0;
  /// Relative tolerance on K0 when verifying the rounded fixture.
  double K0_tolerance = 0.1;
};

const std::vector<CatalogEntry>& example_catalog();

/// Looks an entry up by name; throws InputError when unknown.
const CatalogEntry& catalog_entry(const std::string& name);

}  // namespace parastab
