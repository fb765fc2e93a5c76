#include "parastab/catalog.hpp"

#include "parastab/errors.hpp"

namespace parastab {

namespace {

// Product of monic factors given in ascending coefficients, e.g. {3, 1} is s + 3.
Polynomial prod(std::initializer_list<Polynomial> factors, double gain = 1.0) {
  Polynomial p = Polynomial::constant(gain);
  for (const Polynomial& f : factors) p *= f;
  return p;
}

Polynomial lin(double a) { return Polynomial{a, 1.0}; }
Polynomial quad(double b, double c) { return Polynomial{c, b, 1.0}; }
Polynomial pow(const Polynomial& f, int n) {
  Polynomial p = Polynomial::constant(1.0);
  for (int i = 0; i < n; ++i) p *= f;
  return p;
}

std::vector<CatalogEntry> build() {
  std::vector<CatalogEntry> out;

  out.push_back({"example1", "Violates both PIP and IPIP",
                 RationalTF(prod({lin(-1), lin(-3)}), prod({lin(-2), lin(-4)})), false, false,
                 RationalTF(lin(-2.8), lin(5)),
                 RationalTF(prod({lin(45.38), lin(-1.103)}, -134.09), prod({lin(80.38), lin(78.77), lin(5)})), 380.0,
                 0.05});

  out.push_back({"example2", "Satisfies PIP and IPIP but is hard to stabilize in a single loop",
                 RationalTF(quad(-2, 1.1), prod({lin(2), lin(3), lin(-4)})), true, true, RationalTF::constant(1.0),
                 RationalTF(prod({lin(18.17), lin(-4.657), lin(-0.5159)}), prod({lin(180.6), lin(3), lin(2)})), 180.0,
                 0.1});

  out.push_back({"example3", "Repeated right-half-plane complex zeros",
                 RationalTF(pow(quad(-4, 40), 2), prod({lin(2), lin(-4), lin(6), lin(8), lin(10), lin(12)})), true, true,
                 RationalTF::constant(1.0),
                 RationalTF(prod({quad(-1.957, 18.18), quad(2.56, 59.16), lin(22.45), quad(24.95, 315.1)}),
                            prod({pow(lin(138), 2), lin(2), lin(6), lin(8), lin(10), lin(12)})),
                 2.36e4, 0.1});

  out.push_back({"example5", "Symmetric pole and zero placement",
                 RationalTF(prod({quad(-2, 2), quad(-2, 5)}), prod({lin(-3), quad(2, 2), quad(2, 5)})), std::nullopt,
                 true, RationalTF::constant(1.0),
                 RationalTF(prod({lin(18.72), lin(-4.584), lin(-2.401), quad(-1.739, 3.202)}),
                            prod({lin(201), quad(2, 2), quad(2, 5)})),
                 196.0, 0.1});

  out.push_back({"example6_part1", "Cart with one inverted pendulum, cart position measured",
                 RationalTF(Polynomial{-1, 0, 1}, Polynomial{0, 0, -1.3, 0, 0.3}), false, false,
                 RationalTF(lin(-1.5), lin(15)),
                 RationalTF(prod({lin(1.39), lin(1), lin(-30.99), quad(2.425, 1.594), quad(86.56, 1944), quad(69.75, 2188),
                                  quad(-3.429, 1773)}),
                            prod({lin(15), pow(lin(271.1), 3), lin(2.082), pow(lin(1.087), 4), pow(lin(59.87), 2)})),
                 1.25e4, 0.1});

  out.push_back({"example6_part2", "Cart with two inverted pendulums, first pendulum angle measured",
                 pendulum_cart_plant(9.8, 2.0, 0.5, 0.5, 1.2, 0.8), false, false,
                 RationalTF(lin(-3.5) * -2.4, lin(3.5)),
                 RationalTF(prod({quad(2.139, 1.153), quad(130.2, 4599), quad(78.13, 4132), quad(-21.6, 2924), lin(-41.73),
                                  lin(0.8532)}),
                            prod({lin(3.031), pow(lin(1), 3), pow(lin(297.8), 4), lin(4.041), lin(297.8)})),
                 6.8e4, 0.1});
  return out;
}

}  // namespace

RationalTF pendulum_cart_plant(double g, double M, double m1, double m2, double L1, double L2) {
  for (double v : {g, M, m1, m2, L1, L2})
    if (!(v > 0.0)) throw DomainError("pendulum_cart_plant: all parameters must be positive");
  const Polynomial num{g, 0.0, -L2};
  const Polynomial den{g * g * (M + m1 + m2), 0.0, -g * (L1 * M + L1 * m2 + L2 * M + L2 * m1), 0.0, L2 * L1 * M};
  return RationalTF(num, den);
}

const std::vector<CatalogEntry>& example_catalog() {
  static const std::vector<CatalogEntry> catalog = build();
  return catalog;
}

const CatalogEntry& catalog_entry(const std::string& name) {
  for (const CatalogEntry& e : example_catalog())
    if (e.name == name) return e;
  throw InputError("unknown catalog example '" + name + "'");
}

}  // namespace parastab
