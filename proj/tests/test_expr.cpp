#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cornerkit/expr.hpp"
#include "cornerkit/report.hpp"
#include "support.hpp"

using namespace cornerkit;

namespace {

const Point origin{{0.0, 0.0, 0.0}};

} // namespace

TEST(Parse, FunctionCall) {
  const ScalarExpr e = parse("exp(x2)");
  EXPECT_EQ(e.to_string(), "exp(x2)");
  EXPECT_DOUBLE_EQ(e.eval(Point{{0.0, 1.0, 0.0}}), std::exp(1.0));
}

TEST(Parse, PrecedenceOfPowerAndProduct) {
  const ScalarExpr e = parse("x2^2 + 3*x3");
  EXPECT_EQ(e.to_string(), "((x2 ^ 2) + (3 * x3))");
}

TEST(Parse, UnbalancedCallReportsOffset) {
  try {
    parse("exp(");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::Syntax);
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Parse, UnknownIdentifier) {
  try {
    parse("tan(x1)");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::UnknownIdentifier);
    EXPECT_EQ(e.offset(), 0u);
  }
  EXPECT_THROW(parse("x4"), ParseError);
}

TEST(Parse, ArityMismatch) {
  try {
    parse("exp(x1, x2)");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::Arity);
  }
}

TEST(Parse, PowerBindsTighterThanNegationAndIsRightAssociative) {
  EXPECT_DOUBLE_EQ(parse("-x1^2").eval(Point{{3.0, 0.0, 0.0}}), -9.0);
  EXPECT_DOUBLE_EQ(parse("2^3^2").eval(origin), 512.0);
  EXPECT_DOUBLE_EQ(parse("2^-1").eval(origin), 0.5);
  EXPECT_DOUBLE_EQ(parse("1 - 2 - 3").eval(origin), -4.0);
  EXPECT_DOUBLE_EQ(parse("8 / 4 / 2").eval(origin), 1.0);
}

TEST(Parse, NumbersWithExponent) {
  EXPECT_DOUBLE_EQ(parse("1.5e2").eval(origin), 150.0);
  EXPECT_DOUBLE_EQ(parse("2E-1").eval(origin), 0.2);
  EXPECT_DOUBLE_EQ(parse(".5").eval(origin), 0.5);
}

TEST(Parse, ConstantsFold) {
  const ScalarExpr e = parse("2*3 + exp(0)");
  ASSERT_TRUE(e.constant_value().has_value());
  EXPECT_DOUBLE_EQ(*e.constant_value(), 7.0);
}

TEST(Parse, TrailingInputIsAnError) {
  EXPECT_THROW(parse("x1 x2"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("(x1"), ParseError);
}

TEST(Jet, ExponentialAtOrigin) {
  const Jet2 j = parse("exp(x2)").eval_jet2(origin);
  EXPECT_DOUBLE_EQ(j.value, 1.0);
  EXPECT_DOUBLE_EQ(j.grad[1], 1.0);
  EXPECT_DOUBLE_EQ(j.grad[0], 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(j.hess[i][k], (i == 1 && k == 1) ? 1.0 : 0.0);
}

TEST(Jet, Product) {
  const Jet2 j = parse("x1*x3").eval_jet2(Point{{2.0, 0.0, 5.0}});
  EXPECT_DOUBLE_EQ(j.value, 10.0);
  EXPECT_DOUBLE_EQ(j.grad[0], 5.0);
  EXPECT_DOUBLE_EQ(j.grad[1], 0.0);
  EXPECT_DOUBLE_EQ(j.grad[2], 2.0);
  EXPECT_DOUBLE_EQ(j.hess[0][2], 1.0);
  EXPECT_DOUBLE_EQ(j.hess[2][0], 1.0);
  EXPECT_DOUBLE_EQ(j.hess[0][0], 0.0);
}

TEST(Jet, Square) {
  const Jet2 j = parse("x2^2").eval_jet2(Point{{0.0, 3.0, 0.0}});
  EXPECT_DOUBLE_EQ(j.value, 9.0);
  EXPECT_DOUBLE_EQ(j.grad[1], 6.0);
  EXPECT_DOUBLE_EQ(j.hess[1][1], 2.0);
}

TEST(Jet, DomainErrorsNameTheSubexpression) {
  try {
    parse("1 + ln(x1 - 1)").eval_jet2(Point{{0.5, 0.0, 0.0}});
    FAIL() << "expected a domain error";
  } catch (const DomainError& e) {
    EXPECT_NE(e.subexpression().find("ln"), std::string::npos);
  }
  EXPECT_THROW(parse("sqrt(x1)").eval_jet2(Point{{-1.0, 0.0, 0.0}}), DomainError);
  EXPECT_THROW(parse("1/x1").eval_jet2(origin), DomainError);
  EXPECT_THROW(parse("x1^0.5").eval_jet2(Point{{-1.0, 0.0, 0.0}}), DomainError);
}

TEST(Jet, AbsAtZeroIsFlaggedWithZeroDerivative) {
  EvalDiagnostics diag;
  const Jet2 j = eval_jet2(parse("abs(x1)"), origin, &diag);
  EXPECT_TRUE(diag.abs_kink);
  EXPECT_DOUBLE_EQ(j.grad[0], 0.0);
  EvalDiagnostics clean;
  const Jet2 k = eval_jet2(parse("abs(x1)"), Point{{-2.0, 0.0, 0.0}}, &clean);
  EXPECT_FALSE(clean.abs_kink);
  EXPECT_DOUBLE_EQ(k.grad[0], -1.0);
}

TEST(Jet, VariableExponent) {
  const Point p{{0.7, 0.4, 0.0}};
  const Jet2 j = parse("x1^x2").eval_jet2(p);
  EXPECT_NEAR(j.value, std::pow(0.7, 0.4), 1e-15);
  EXPECT_NEAR(j.grad[1], std::pow(0.7, 0.4) * std::log(0.7), 1e-15);
}

TEST(JetProperty, MatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  const ChartDomain box;
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const ScalarExpr e = parse(testing_support::random_expr(rng, 3));
    const auto f = [&](const Point& q) { return e.eval(q); };
    for (const Point& p : box.sample(3, trial)) {
      const Jet2 j = e.eval_jet2(p);
      for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_LT(testing_support::rel_err(j.grad[i], testing_support::central(f, p, i)), 1e-5) << e.to_string();
        const auto fi = [&](const Point& q) { return e.eval_jet2(q).grad[i]; };
        for (std::size_t k = 0; k < 3; ++k)
          EXPECT_LT(testing_support::rel_err(j.hess[i][k], testing_support::central(fi, p, k)), 1e-5)
              << e.to_string();
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 600);
}

TEST(JetProperty, HessianIsExactlySymmetric) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Jet2 j = parse(testing_support::random_expr(rng, 4)).eval_jet2(Point{{0.3, 0.6, 0.9}});
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(j.hess[i][k], j.hess[k][i]);
  }
}

TEST(JetProperty, LeibnizRule) {
  std::mt19937_64 rng(9);
  const Point p{{0.25, 0.5, 0.75}};
  for (int trial = 0; trial < 100; ++trial) {
    const ScalarExpr a = parse(testing_support::random_expr(rng, 3));
    const ScalarExpr b = parse(testing_support::random_expr(rng, 3));
    const Jet2 ja = a.eval_jet2(p), jb = b.eval_jet2(p), jab = (a * b).eval_jet2(p);
    const double scale = 1.0 + std::fabs(ja.value * jb.value);
    EXPECT_NEAR(jab.value, ja.value * jb.value, 1e-14 * scale);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(jab.grad[i], ja.grad[i] * jb.value + ja.value * jb.grad[i], 1e-13 * (1 + std::fabs(jab.grad[i])));
      for (std::size_t k = 0; k < 3; ++k) {
        const double leibniz = ja.hess[i][k] * jb.value + ja.grad[i] * jb.grad[k] + ja.grad[k] * jb.grad[i] +
                               ja.value * jb.hess[i][k];
        EXPECT_NEAR(jab.hess[i][k], leibniz, 1e-12 * (1 + std::fabs(leibniz)));
      }
    }
  }
}

TEST(ExprProperty, PrintParseRoundTrip) {
  std::mt19937_64 rng(21);
  const ChartDomain box;
  for (int trial = 0; trial < 200; ++trial) {
    const ScalarExpr e = parse(testing_support::random_expr(rng, 4));
    const ScalarExpr back = parse(e.to_string());
    for (const Point& p : box.sample(4, trial)) EXPECT_EQ(e.eval(p), back.eval(p)) << e.to_string();
  }
}

TEST(ExprProperty, ConcurrentEvaluationIsSafe) {
  const ScalarExpr e = parse("exp(x1*x2) * sin(x3) / (2 + cos(x1))");
  const auto pts = ChartDomain{}.sample(4000, 3);
  std::vector<double> serial;
  for (const auto& p : pts) serial.push_back(e.eval(p));
  const auto parallel = detail::map_points<double>(pts, [&](const Point& p) { return e.eval(p); });
  EXPECT_EQ(serial, parallel);
}
