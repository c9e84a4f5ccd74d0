#ifndef CORNERKIT_TESTS_SUPPORT_HPP
#define CORNERKIT_TESTS_SUPPORT_HPP

#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "cornerkit/expr.hpp"
#include "cornerkit/family.hpp"
#include "cornerkit/tensor.hpp"

namespace testing_support {

using namespace cornerkit;

/// Random expression over x1..x3 that stays finite and smooth on [0.1, 1]^3.
inline std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 7);
  std::uniform_real_distribution<double> coef(-1.5, 1.5);
  std::uniform_int_distribution<int> var(1, 3);
  const auto num = [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", coef(rng));
    return std::string("(") + buf + ")";
  };
  const auto x = [&] { return "x" + std::to_string(var(rng)); };
  switch (pick(rng)) {
    case 0: return x();
    case 1: return num();
    case 2: return "(" + random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1) + ")";
    case 3: return "(" + random_expr(rng, depth - 1) + " * " + random_expr(rng, depth - 1) + ")";
    case 4: return "exp(" + num() + "*" + random_expr(rng, depth - 1) + ")";
    case 5: return "sin(" + random_expr(rng, depth - 1) + ")";
    case 6: return "(" + random_expr(rng, depth - 1) + ")^2";
    default: return "(" + random_expr(rng, depth - 1) + ")/(2 + cos(" + random_expr(rng, depth - 1) + "))";
  }
}

/// Central difference of f along coordinate i.
inline double central(const std::function<double(const Point&)>& f, const Point& p, std::size_t i,
                      double h = 1e-4) {
  Point a = p, b = p;
  a[i] += h;
  b[i] -= h;
  return (f(a) - f(b)) / (2.0 * h);
}

/// |a - b| relative to max(1, |b|).
inline double rel_err(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

/// Random family with kappa, mu independent of x1 (a corner structure).
inline FamilyParams random_corner_family(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  const auto n = [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", c(rng));
    return std::string("(") + buf + ")";
  };
  const std::string tau = "exp(" + n() + "*x1 + " + n() + "*x2 + " + n() + "*x3 + " + n() + "*x2*x3)";
  const std::string kappa = "exp(" + n() + "*x2 + " + n() + "*x3^2)";
  const std::string mu = "2 + " + n() + "*sin(x2 + " + n() + "*x3)";
  return FamilyParams::from_strings(tau, kappa, mu);
}

/// Random family whose kappa depends on x1 (generally not a corner structure).
inline FamilyParams random_family(std::mt19937_64& rng) {
  FamilyParams p = random_corner_family(rng);
  std::uniform_real_distribution<double> c(0.3, 1.0);
  p.kappa = p.kappa * parse("exp(" + std::to_string(c(rng)) + "*x1)");
  return p;
}

/// Random diagonally dominant (hence positive definite) metric.
inline MetricField random_metric(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  const auto n = [&] {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", c(rng));
    return std::string("(") + buf + ")";
  };
  MetricField g;
  for (std::size_t i = 0; i < 3; ++i) {
    g.g[i][i] = parse("2 + 0.5*sin(" + n() + "*x1 + " + n() + "*x2 + " + n() + "*x3)");
    for (std::size_t j = i + 1; j < 3; ++j) {
      g.g[i][j] = parse("0.3*sin(" + n() + "*x1*x2 + " + n() + "*x3)");
      g.g[j][i] = g.g[i][j];
    }
  }
  return g;
}

/// Random vector field with smooth components.
inline VectorField random_vector_field(std::mt19937_64& rng) {
  return VectorField{{{parse(random_expr(rng, 2)), parse(random_expr(rng, 2)), parse(random_expr(rng, 2))}}};
}

inline OneFormField random_one_form(std::mt19937_64& rng) {
  return OneFormField{{{parse(random_expr(rng, 2)), parse(random_expr(rng, 2)), parse(random_expr(rng, 2))}}};
}

/// Christoffel symbols from central differences of the metric values only.
inline Gamma<double> christoffel_fd(const MetricField& g, const Point& p, double h = 1e-4) {
  const auto value = [&](std::size_t i, std::size_t j) { return [&g, i, j](const Point& q) { return g.g[i][j].eval(q); }; };
  Mat3<double> gv;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) gv[i][j] = g.g[i][j].eval(p);
  const Mat3<double> inv = inverse(gv);
  std::array<Mat3<double>, 3> dg;  // dg[l][i][j] = d_l g_ij
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) dg[l][i][j] = central(value(i, j), p, l, h);
  Gamma<double> gamma;
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (std::size_t l = 0; l < 3; ++l) acc += inv[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]);
        gamma[k][i][j] = 0.5 * acc;
      }
  return gamma;
}

inline AcmStructure flat_structure() {
  return build_family(FamilyParams::from_strings("1", "1", "1"), "flat");
}

} // namespace testing_support

#endif
