#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "parastab/catalog.hpp"
#include "parastab/interlacing.hpp"
#include "parastab/synthesis.hpp"
#include "test_util.hpp"

namespace parastab {
namespace {

using testing::bisection_threshold;
using testing::max_real_part;
using testing::horner;
using testing::raw_companion_roots;
using testing::Rng;

Polynomial real_roots(std::initializer_list<double> rs, double gain = 1.0) {
  std::vector<Complex> v;
  for (double r : rs) v.emplace_back(r, 0.0);
  return Polynomial::from_roots(v) * gain;
}

Polynomial power(const Polynomial& f, int n) {
  Polynomial p = Polynomial::constant(1.0);
  for (int i = 0; i < n; ++i) p *= f;
  return p;
}

Complex eval(const RationalTF& tf, Complex s) { return horner(tf.num().coeffs(), s) / horner(tf.den().coeffs(), s); }

bool hurwitz_at(const RationalTF& R, double K) { return is_hurwitz(closed_loop_char(R, K)) == HurwitzVerdict::kYes; }

void expect_sound(const DesignResult& r) {
  EXPECT_TRUE(r.diagnostics.ok());
  EXPECT_TRUE(is_stable(r.C_s));
  EXPECT_TRUE(is_stable(r.C_p));
  EXPECT_TRUE(r.C_p.is_proper());
  EXPECT_TRUE(r.combined.is_biproper());
  EXPECT_TRUE(is_minimum_phase(r.combined));
  ASSERT_TRUE(r.gain.has_value());
  const double K0 = r.gain->K0;
  EXPECT_TRUE(std::isfinite(K0));
  for (double K : {std::max(K0, 1e-3) * 1.01, std::max(K0, 1e-3) * 10.0, std::max(K0, 1e-3) * 100.0})
    EXPECT_TRUE(hurwitz_at(r.combined, K)) << "K = " << K;
}

TEST(DesignSeries, ExampleTwoNeedsNoSeriesCompensator) {
  const SeriesDesign s = design_series(catalog_entry("example2").plant);
  EXPECT_TRUE(s.inserted_zeros.empty());
  EXPECT_EQ(s.C_s.num().degree(), 0);
  EXPECT_EQ(s.C_s.den().degree(), 0);
  EXPECT_DOUBLE_EQ(std::abs(s.C_s.num()[0]), 1.0);
}

// With z in (2, 3) the compensated numerator is positive at 2 and 4 with
// ratio 3 (4 - z) / (z - 2), and deg d_p = 3. A unit with k extra poles needs
// ratio <= 2^(3 + k): z = 2.5 gives 9 > 8, so k >= 1, while z = 2.8 gives
// 4.5 and allows k = 0. The placement picks a zero with bound 0.
TEST(DesignSeries, ExampleOnePlacementMinimisesDegreeBound) {
  const RationalTF P = catalog_entry("example1").plant;
  auto bound_for = [&](const RationalTF& C_s) {
    const RationalTF Q = C_s * P;
    const CoprimeFactorization F = coprime_factorize(Q, default_shaping_pole(Q));
    return unit_degree_lower_bound(F, interpolation_data(F));
  };
  EXPECT_EQ(bound_for(RationalTF(Polynomial{-2.5, 1}, Polynomial{7.5, 1})), 1);
  EXPECT_EQ(bound_for(RationalTF(Polynomial{-2.8, 1}, Polynomial{8.4, 1})), 0);
  EXPECT_EQ(bound_for(design_series(P).C_s), 0);
}

TEST(DesignSeries, ExampleOneInsertsOneZeroBetweenThePoles) {
  const RationalTF P = catalog_entry("example1").plant;
  const SeriesDesign s = design_series(P);
  ASSERT_EQ(s.inserted_zeros.size(), 1u);
  EXPECT_GT(s.inserted_zeros[0], 2.0);
  EXPECT_LT(s.inserted_zeros[0], 4.0);
  ASSERT_EQ(s.inserted_poles.size(), 1u);
  EXPECT_DOUBLE_EQ(s.inserted_poles[0], -std::max(5.0, 3.0 * s.inserted_zeros[0]));
  EXPECT_TRUE(is_stable(s.C_s));
  EXPECT_TRUE(s.C_s.is_biproper());
  EXPECT_TRUE(check_ipip(s.C_s * P).verdict);
}

TEST(DesignSeries, PublishedExampleOneChoiceRepairsInterlacing) {
  const RationalTF P = catalog_entry("example1").plant;
  EXPECT_FALSE(check_ipip(P).verdict);
  EXPECT_TRUE(check_ipip(RationalTF(Polynomial{-2.8, 1}, Polynomial{5, 1}) * P).verdict);
}

TEST(DesignSeries, PendulumGetsZeroInGapAndNegativeGain) {
  const SeriesDesign s = design_series(catalog_entry("example6_part2").plant);
  ASSERT_EQ(s.inserted_zeros.size(), 1u);
  EXPECT_GT(s.inserted_zeros[0], 3.031);
  EXPECT_LT(s.inserted_zeros[0], 4.041);
  EXPECT_LT(s.gain_sign, 0.0);
}

TEST(DesignSeries, RandomPlantsSatisfyIpipAfterRepair) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const RationalTF P = rng.plant(6);
    const SeriesDesign s = design_series(P);
    const RationalTF Q = s.C_s * P;
    EXPECT_TRUE(is_stable(s.C_s));
    EXPECT_TRUE(s.C_s.is_biproper());
    EXPECT_TRUE(check_ipip(Q).verdict) << P.to_string();
    EXPECT_EQ(check_ipip(P).verdict, s.inserted_zeros.empty());
  }
}

TEST(SynthesizeUnit, ExampleOneUnitInterpolatesAtTheNodes) {
  const DesignResult r = design_full(catalog_entry("example1").plant);
  ASSERT_TRUE(r.U_p.has_value());
  const CoprimeFactorization F = coprime_factorize(r.C_s * r.plant, r.lambda);
  for (double node : {2.0, 4.0}) {
    const Complex u = eval(*r.U_p, node), n = eval(F.N, node);
    EXPECT_LT(std::abs(u - n), 1e-8 * std::max(1.0, std::abs(n))) << "node " << node;
  }
  expect_sound(r);
}

TEST(SynthesizeUnit, ExampleTwoIsLowOrder) {
  const DesignResult r = design_full(catalog_entry("example2").plant);
  ASSERT_TRUE(r.unit.has_value());
  EXPECT_LE(r.unit->k, 3);
  EXPECT_TRUE(r.combined.is_biproper());
  EXPECT_EQ(r.combined.den().degree(), 3 + r.unit->k);
  int rhp = 0;
  for (const Complex& p : raw_companion_roots(r.combined.den())) rhp += p.real() > 0 ? 1 : 0;
  EXPECT_EQ(rhp, 1);
  EXPECT_LT(max_real_part(r.combined.num()), 0.0);
  expect_sound(r);
}

TEST(SynthesizeUnit, StablePlantSucceedsImmediately) {
  const RationalTF P(Polynomial{-1, 1}, real_roots({-1, -2, -3}));
  const DesignResult r = design_full(P);
  ASSERT_TRUE(r.unit.has_value());
  EXPECT_LE(r.unit->k, 1);
  expect_sound(r);
}

TEST(SynthesizeUnit, CandidateInvariants) {
  Rng rng(77);
  for (int trial = 0; trial < 8; ++trial) {
    const RationalTF P = rng.plant(4, 0.5);
    const DesignResult r = design_full(P);
    ASSERT_TRUE(r.unit.has_value());
    const UnitCandidate& u = *r.unit;
    const CoprimeFactorization F = coprime_factorize(r.C_s * r.plant, r.lambda);
    const Polynomial diff = u.phi - F.N.num() * u.d_c;
    const Polynomial rem = exact_divide(diff, F.D.num()).second;
    EXPECT_LT(rem.norm_inf(), 1e-8 * std::max(u.phi.norm_inf(), diff.norm_inf()));
    EXPECT_EQ(u.phi.degree(), F.D.num().degree() + u.d_c.degree());
    EXPECT_GT(u.phi.leading(), 0.0);
    EXPECT_GT(u.normalized_margin, 1e-4);
    EXPECT_EQ(is_hurwitz(u.phi), HurwitzVerdict::kYes);
    EXPECT_EQ(is_hurwitz(u.d_c), HurwitzVerdict::kYes);
    // Combined denominator is d_p d_c up to cancellation of the stable plant poles.
    const RationalTF expected(u.phi, F.D.num() * u.d_c);
    EXPECT_LT(testing::multiset_distance(raw_companion_roots(r.combined.den()), raw_companion_roots(expected.den())),
              1e-5 * (1.0 + r.combined.den().norm_inf()));
  }
}

TEST(SynthesizeUnit, Deterministic) {
  const RationalTF P = catalog_entry("example5").plant;
  const DesignResult a = design_full(P), b = design_full(P);
  EXPECT_EQ(a.C_p.num(), b.C_p.num());
  EXPECT_EQ(a.C_p.den(), b.C_p.den());
}

// For n_p = (s - 3)^m and unstable poles 1 and 2, the ratio n_p(2)/n_p(1) is
// 2^-m, and the unit must fall by that factor over an octave. Each extra
// compensator pole contributes at most a factor 2, so k >= m.
RationalTF steep_plant(int m) {
  return RationalTF(power(Polynomial{-3, 1}, m), real_roots({1, 2}) * power(Polynomial{1, 1}, m));
}

TEST(UnitDegreeBound, RealNodePairByHand) {
  for (int m : {2, 4, 7}) {
    const RationalTF P = steep_plant(m);
    ASSERT_TRUE(check_ipip(P).verdict);
    const RationalTF Q = design_series(P).C_s * P;
    const CoprimeFactorization F = coprime_factorize(Q, default_shaping_pole(Q));
    EXPECT_EQ(unit_degree_lower_bound(F, interpolation_data(F)), m);
  }
}

TEST(UnitDegreeBound, DesignedUnitRespectsBound) {
  const DesignResult r = design_full(steep_plant(3));
  ASSERT_TRUE(r.unit.has_value());
  EXPECT_GE(r.unit->k, 3);
  expect_sound(r);
}

TEST(UnitDegreeBound, InfeasibleBudgetFailsFast) {
  SynthesisOptions opts;
  opts.k_max = 12;
  try {
    design_full(steep_plant(14), opts);
    FAIL() << "expected SynthesisError";
  } catch (const SynthesisError& e) {
    EXPECT_NE(std::string(e.what()).find("no unit exists"), std::string::npos) << e.what();
  }
}

TEST(UnitDegreeBound, NoUnstablePolesGivesZero) {
  const RationalTF P(Polynomial{-1, 1}, real_roots({-1, -2}));
  const CoprimeFactorization F = coprime_factorize(P, default_shaping_pole(P));
  EXPECT_EQ(unit_degree_lower_bound(F, interpolation_data(F)), 0);
}

TEST(ParallelFromUnit, ZeroWhenPlantNumeratorIsAlreadyAUnit) {
  const RationalTF P(Polynomial{2, 1}, real_roots({1, -3}));
  const CoprimeFactorization F = coprime_factorize(P, 1.0);
  UnitCandidate u;
  u.d_c = Polynomial::constant(1.0);
  u.phi = F.N.num();
  const RationalTF Cp = parallel_from_unit(F, u);
  EXPECT_TRUE(Cp.is_zero());
}

TEST(ParallelFromUnit, RejectsInconsistentCandidate) {
  const RationalTF P(Polynomial{2, 1}, real_roots({1, -3}));
  const CoprimeFactorization F = coprime_factorize(P, 1.0);
  UnitCandidate u;
  u.d_c = Polynomial::constant(1.0);
  u.phi = F.N.num() + Polynomial::constant(0.5);
  EXPECT_THROW(parallel_from_unit(F, u), InconsistentCandidate);
}

TEST(GainThreshold, FirstOrderByHand) {
  // s - 1 + K (s + 2) is stable exactly for K > 1/2.
  const GainAnalysis g = gain_threshold(RationalTF(Polynomial{2, 1}, Polynomial{-1, 1}));
  EXPECT_NEAR(g.K0, 0.5, 1e-12);
  for (const GainSample& s : g.verified_at) EXPECT_EQ(s.verdict, HurwitzVerdict::kYes);
  EXPECT_NEAR(bisection_threshold(RationalTF(Polynomial{2, 1}, Polynomial{-1, 1})), 0.5, 1e-9);
}

TEST(GainThreshold, StableForAllGainsGivesZero) {
  const GainAnalysis g = gain_threshold(RationalTF(Polynomial{2, 1}, Polynomial{1, 1}));
  EXPECT_EQ(g.K0, 0.0);
}

TEST(GainThreshold, RejectsNonMinimumPhase) {
  EXPECT_THROW(gain_threshold(RationalTF(Polynomial{-2, 1}, Polynomial{1, 1})), DomainError);
  EXPECT_THROW(gain_threshold(RationalTF(Polynomial{1}, Polynomial{1, 1})), DomainError);
}

TEST(GainThreshold, AgreesWithBisectionOnRandomPlants) {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const RationalTF R = rng.biproper_minimum_phase(6);
    const double K0 = gain_threshold(R).K0;
    const double ref = bisection_threshold(R);
    if (ref == 0.0)
      EXPECT_EQ(K0, 0.0) << R.to_string();
    else
      EXPECT_LT(std::abs(K0 - ref), 1e-4 * ref) << R.to_string() << " K0 " << K0 << " ref " << ref;
  }
}

TEST(DesignFull, RandomPlantsAreSound) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const RationalTF P = rng.plant(5, 0.5);
    const DesignResult r = design_full(P);
    expect_sound(r);
    EXPECT_FALSE(r.combined.rhp_cancelled());
  }
}

TEST(DesignFull, RejectsImproperPlant) {
  EXPECT_THROW(design_full(RationalTF(Polynomial{1, 1, 1}, Polynomial{-1, 1})), DomainError);
}

TEST(VerifyDesign, FlagsBadCompensator) {
  const RationalTF P = catalog_entry("example1").plant;
  const DesignResult r = verify_design(P, RationalTF::constant(1.0), RationalTF::constant(0.0));
  EXPECT_FALSE(r.diagnostics.ok());
}

}  // namespace
}  // namespace parastab
