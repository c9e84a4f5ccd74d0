#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cornerkit/acms.hpp"
#include "cornerkit/corner.hpp"
#include "cornerkit/family.hpp"
#include "support.hpp"

using namespace cornerkit;

namespace {

std::vector<Point> box_points(std::size_t n = 60, std::uint64_t seed = 4) { return ChartDomain{}.sample(n, seed); }

} // namespace

TEST(BuildFamily, ConstantFunctionsGiveFlatCosymplectic) {
  const AcmStructure s = build_family(FamilyParams::from_strings("1", "1", "1"));
  EXPECT_EQ(check_axioms(s, box_points()).worst(), 0.0);
  EXPECT_EQ(classify(s, box_points()).verdict, Verdict::Cosymplectic);
  EXPECT_THROW(corner_frame(s, Point{{0.5, 0.5, 0.5}}), DegenerateCorner);
}

TEST(BuildFamily, PresetBHasUnitPsi) {
  const AcmStructure s = preset_structure("family:B");
  EXPECT_TRUE(corner_residual(s, box_points()).passed());
  for (const Point& p : box_points(20)) EXPECT_NEAR(corner_frame(s, p).e_rho, 1.0, 1e-12);
}

TEST(BuildFamily, PresetADivergence) {
  const AcmStructure s = preset_structure("family:A");
  EXPECT_TRUE(corner_residual(s, box_points()).passed());
  for (const Point& p : box_points(20)) EXPECT_NEAR(corner_frame(s, p).div_v, 2.0, 1e-12);
}

TEST(BuildFamily, PsiNormClosedForm) {
  // |psi|^2 = (1/tau^2)(tau_2^2/kappa^2 + tau_3^2/mu^2)
  const Preset d = preset("family:D");
  const AcmStructure s = build_family(d.params);
  for (const Point& p : box_points(20)) {
    const Jet2 t = d.params.tau.eval_jet2(p);
    const double k = d.params.kappa.eval(p), m = d.params.mu.eval(p);
    const double expected =
        std::sqrt(t.grad[1] * t.grad[1] / (k * k) + t.grad[2] * t.grad[2] / (m * m)) / t.value;
    EXPECT_NEAR(corner_frame(s, p).e_rho, expected, 1e-12);
  }
}

TEST(BuildFamily, OmegaClosedForm) {
  // omega = d_2 ln tau dx2 + d_3 ln tau dx3 for tau = e^{x2 + x3}
  for (const Point& p : box_points(20)) {
    const CornerFrame f = corner_frame(preset_structure("family:D"), p);
    EXPECT_NEAR(f.omega[0], 0.0, 1e-12);
    EXPECT_NEAR(f.omega[1], 1.0, 1e-12);
    EXPECT_NEAR(f.omega[2], 1.0, 1e-12);
  }
}

TEST(BuildFamilyProperty, RandomCornerDrawsPassAxiomsAndCorner) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const FamilyParams fp = testing_support::random_corner_family(rng);
    const auto pts = box_points(30, trial);
    EXPECT_NO_THROW(validate(fp, pts));
    const AcmStructure s = build_family(fp);
    EXPECT_TRUE(check_axioms(s, pts).passed()) << trial;
    EXPECT_TRUE(corner_residual(s, pts).passed()) << trial;
  }
}

TEST(Validate, NonPositiveTauRejected) {
  EXPECT_THROW(validate(FamilyParams::from_strings("x1 - 0.5", "1", "1"), box_points()), InvalidParams);
  EXPECT_THROW(validate(FamilyParams::from_strings("-1", "1", "1"), box_points(1)), InvalidParams);
  EXPECT_THROW(validate(FamilyParams::from_strings("1", "0", "1"), box_points(1)), InvalidParams);
  EXPECT_THROW(build_family_checked(FamilyParams::from_strings("0", "1", "1")), InvalidParams);
  EXPECT_NO_THROW(build_family_checked(FamilyParams::from_strings("exp(x1)", "2", "3")));
}

TEST(FamilyCriterion, Directions) {
  const auto pts = box_points();
  const FamilyCriterion ok = family_corner_criterion(FamilyParams::from_strings("exp(x2*x3)", "1 + x2^2", "2 + x2*x3"), pts);
  EXPECT_TRUE(ok.criterion_holds);
  EXPECT_TRUE(ok.corner_holds);
  EXPECT_LT(ok.corner_residual, 1e-8);
  const FamilyCriterion bad = family_corner_criterion(FamilyParams::from_strings("exp(x2)", "exp(x1)", "1"), pts);
  EXPECT_FALSE(bad.criterion_holds);
  EXPECT_FALSE(bad.corner_holds);
  EXPECT_GT(bad.corner_residual, 1e-3);
  EXPECT_TRUE(ok.agree());
  EXPECT_TRUE(bad.agree());
  EXPECT_TRUE(family_corner_criterion(FamilyParams::from_strings("exp(x1 + x2)", "3", "0.5"), pts).corner_holds);
}

TEST(FamilyCriterionProperty, AgreesOnRandomDraws) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const FamilyParams fp =
        trial % 2 ? testing_support::random_family(rng) : testing_support::random_corner_family(rng);
    const FamilyCriterion c = family_corner_criterion(fp, box_points(30, trial));
    EXPECT_TRUE(c.agree()) << trial;
    EXPECT_EQ(c.criterion_holds, trial % 2 == 0) << trial;
  }
}

TEST(Presets, ExpectationsHold) {
  const auto pts = box_points();
  for (const std::string& name : preset_names()) {
    const Preset pr = preset(name);
    const AcmStructure s = build_family(pr.params, name);
    EXPECT_EQ(corner_residual(s, pts).passed(), pr.expected.corner) << name;
    if (!pr.expected.corner) continue;
    EXPECT_EQ(closed_omega_check(s, pts).omega_closed, pr.expected.omega_closed) << name;
  }
  EXPECT_TRUE(preset("family:A").expected.thken);
  EXPECT_TRUE(preset("family:B").expected.thcos);
  EXPECT_FALSE(preset("family:C").expected.corner);
}

TEST(Presets, PresetABetaClosedForm) {
  // beta = tau_2 / (tau kappa)
  const Preset a = preset("family:A");
  const AcmStructure s = build_family(a.params);
  for (const Point& p : box_points(20)) {
    const Jet2 t = a.params.tau.eval_jet2(p);
    EXPECT_NEAR(corner_frame(s, p).e_rho, t.grad[1] / (t.value * a.params.kappa.eval(p)), 1e-12);
  }
}

TEST(Presets, UnknownNameThrows) {
  EXPECT_THROW(preset("family:Z"), UnknownPreset);
  EXPECT_THROW(preset_structure(""), UnknownPreset);
}

TEST(SubFamilyProperty, FrameScalarsMatchClosedForms) {
  // tau(x1, x2), kappa(x2, x3), mu(x2, x3): V = d2 / kappa, phiV = d3 / mu.
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> c(0.2, 0.9);
  for (int trial = 0; trial < 10; ++trial) {
    char buf[3][96];
    std::snprintf(buf[0], sizeof buf[0], "exp(%.3f*x2 + %.3f*x1*x2)", 1.0 + c(rng), c(rng));
    std::snprintf(buf[1], sizeof buf[1], "1 + %.3f*x2^2 + %.3f*x3", c(rng), c(rng));
    std::snprintf(buf[2], sizeof buf[2], "2 + sin(%.3f*x2*x3)", c(rng));
    const FamilyParams fp = FamilyParams::from_strings(buf[0], buf[1], buf[2]);
    const AcmStructure s = build_family(fp);
    for (const Point& p : box_points(20, trial)) {
      const CornerFrame f = corner_frame(s, p);
      const Jet2 t = fp.tau.eval_jet2(p), k = fp.kappa.eval_jet2(p), m = fp.mu.eval_jet2(p);
      const double t2 = t.grad[1];
      const double e_rho = t2 / (t.value * k.value);
      EXPECT_NEAR(f.e_rho, e_rho, 1e-10);
      EXPECT_NEAR(f.sigma, 0.0, 1e-10);
      // phiV(rho) = -kappa_3 / (kappa mu); the quoted -2 tau_2^2 kappa_3 / (tau^2 kappa^3 mu) is phiV(e^{2 rho}).
      EXPECT_NEAR(f.phi_v_rho, -k.grad[2] / (k.value * m.value), 1e-6);
      const double quoted = -2.0 * t2 * t2 * k.grad[2] / (t.value * t.value * std::pow(k.value, 3) * m.value);
      EXPECT_NEAR(2.0 * e_rho * e_rho * f.phi_v_rho, quoted, 1e-6);
      // div V = (tau mu)_2 / (tau kappa mu)
      const double tm2 = t.grad[1] * m.value + t.value * m.grad[1];
      EXPECT_NEAR(f.div_v, tm2 / (t.value * k.value * m.value), 1e-7);
    }
  }
}
