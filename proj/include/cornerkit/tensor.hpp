#ifndef CORNERKIT_TENSOR_HPP
#define CORNERKIT_TENSOR_HPP

// Chart-level Riemannian calculus on R^3.
//
// Conventions (used everywhere in cornerkit):
//   * a field evaluated at a point is a jet whose entries are Dual<S>; kernels
//     return plain S, i.e. one derivative order is consumed;
//   * (a ^ b)(X, Y) = 1/2 (a(X) b(Y) - a(Y) b(X)), and more generally
//     a ^ b = Alt(a (x) b);
//   * d theta(X, Y) = 1/2 (X theta(Y) - Y theta(X) - theta([X, Y])), i.e.
//     (d theta)_ij = 1/2 (d_i theta_j - d_j theta_i), and for a 2-form F
//     (dF)_123 = 1/3 (d_1 F_23 + d_2 F_31 + d_3 F_12);
//   * (x1, x2, x3) is positively oriented.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cornerkit/dual.hpp"
#include "cornerkit/expr.hpp"
#include "cornerkit/point.hpp"

namespace cornerkit {

template <class T>
using Vec3 = std::array<T, 3>;
template <class T>
using Mat3 = std::array<std::array<T, 3>, 3>;
/// gamma[k][i][j] = Gamma^k_ij
template <class T>
using Gamma = std::array<Mat3<T>, 3>;

inline constexpr double kSingularMetricGuard = 1e-12;

inline std::string to_string(const Point& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.6g, %.6g, %.6g)", p[0], p[1], p[2]);
  return buf;
}

class SingularMetric : public std::runtime_error {
 public:
  explicit SingularMetric(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Small fixed-size algebra, generic over the entry type.

template <class T>
Vec3<T> zero_vec() {
  return Vec3<T>{T(0.0), T(0.0), T(0.0)};
}

template <class T>
Mat3<T> zero_mat() {
  return Mat3<T>{zero_vec<T>(), zero_vec<T>(), zero_vec<T>()};
}

template <class T>
Vec3<T> operator+(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
template <class T>
Vec3<T> operator-(const Vec3<T>& a, const Vec3<T>& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
template <class T>
Vec3<T> operator-(const Vec3<T>& a) {
  return {-a[0], -a[1], -a[2]};
}
template <class T>
Vec3<T> scale(const T& c, const Vec3<T>& a) {
  return {c * a[0], c * a[1], c * a[2]};
}
template <class T>
Vec3<T> scale(double c, const Vec3<T>& a) requires(!std::is_same_v<T, double>) {
  return {c * a[0], c * a[1], c * a[2]};
}

/// (phi X)^k = phi^k_i X^i
template <class T>
Vec3<T> act(const Mat3<T>& m, const Vec3<T>& x) {
  Vec3<T> r = zero_vec<T>();
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i) r[k] += m[k][i] * x[i];
  return r;
}

/// theta(X)
template <class T>
T pair(const Vec3<T>& form, const Vec3<T>& x) {
  return form[0] * x[0] + form[1] * x[1] + form[2] * x[2];
}

/// g(X, Y)
template <class T>
T inner(const Mat3<T>& g, const Vec3<T>& x, const Vec3<T>& y) {
  return pair(act(g, y), x);
}

/// X^flat
template <class T>
Vec3<T> flat(const Mat3<T>& g, const Vec3<T>& x) {
  return act(g, x);
}

/// (theta o phi)_i = theta_k phi^k_i
template <class T>
Vec3<T> pullback(const Vec3<T>& form, const Mat3<T>& m) {
  Vec3<T> r = zero_vec<T>();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 3; ++k) r[i] += form[k] * m[k][i];
  return r;
}

template <class T>
Mat3<T> matmul(const Mat3<T>& a, const Mat3<T>& b) {
  Mat3<T> r = zero_mat<T>();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

/// (u (x) alpha)^k_i = u^k alpha_i
template <class T>
Mat3<T> outer(const Vec3<T>& u, const Vec3<T>& alpha) {
  Mat3<T> r = zero_mat<T>();
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i) r[k][i] = u[k] * alpha[i];
  return r;
}

template <class T>
T det(const Mat3<T>& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

template <class T>
Mat3<T> inverse(const Mat3<T>& m) {
  const T inv_det = 1.0 / det(m);
  Mat3<T> r = zero_mat<T>();
  r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
  r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
  r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
  r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
  r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
  r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
  r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
  r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
  r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
  return r;
}

/// Levi-Civita symbol contraction: det of the three column vectors.
template <class T>
T triple(const Vec3<T>& a, const Vec3<T>& b, const Vec3<T>& c) {
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
         a[2] * (b[0] * c[1] - b[1] * c[0]);
}

inline double norm(const Vec3<double>& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
inline double norm_g(const Mat3<double>& g, const Vec3<double>& v) {
  return std::sqrt(std::max(0.0, inner(g, v, v)));
}
inline double max_abs(const Mat3<double>& m) {
  double r = 0.0;
  for (const auto& row : m)
    for (double x : row) r = std::max(r, std::fabs(x));
  return r;
}

// ---------------------------------------------------------------------------
// Jets of fields.

template <class S>
Vec3<S> values(const Vec3<Dual<S>>& f) {
  return {f[0].v, f[1].v, f[2].v};
}

template <class S>
Mat3<S> values(const Mat3<Dual<S>>& f) {
  Mat3<S> r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) r[i][j] = f[i][j].v;
  return r;
}

/// Promotes a value to a jet with vanishing derivatives (a constant-coefficient field).
template <class S>
Dual<S> constant_jet(const S& v) {
  return Dual<S>(v, {S(0.0), S(0.0), S(0.0)});
}
template <class S>
Vec3<Dual<S>> constant_field(const Vec3<S>& v) {
  return {constant_jet(v[0]), constant_jet(v[1]), constant_jet(v[2])};
}

/// Drops the innermost derivative layer: Dual<Dual<double>> -> Dual<double>, Dual<double> -> double.
inline double truncate(double x) { return x; }
inline double truncate(const Jet& x) { return x.v; }
inline Jet truncate(const Jet2D& x) { return Jet(x.v.v, {x.d[0].v, x.d[1].v, x.d[2].v}); }

template <class T>
auto truncate(const Vec3<T>& v) {
  using R = decltype(truncate(v[0]));
  return Vec3<R>{truncate(v[0]), truncate(v[1]), truncate(v[2])};
}
template <class T>
auto truncate(const Mat3<T>& m) {
  using R = decltype(truncate(m[0][0]));
  Mat3<R> r;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) r[i][j] = truncate(m[i][j]);
  return r;
}

inline Vec3<double> primal(const Vec3<Jet>& v) { return {v[0].v, v[1].v, v[2].v}; }

// ---------------------------------------------------------------------------
// Kernels.

/// Throws SingularMetric when |det g| falls below the guard.
inline void check_metric(const Mat3<double>& g, const Point& p, double guard = kSingularMetricGuard) {
  const double d = det(g);
  if (!std::isfinite(d) || std::fabs(d) < guard)
    throw SingularMetric("singular metric at " + to_string(p) + " (det g = " + std::to_string(d) + ")");
}

/// True when all leading principal minors of g are positive.
inline bool positive_definite(const Mat3<double>& g) {
  const double m1 = g[0][0];
  const double m2 = g[0][0] * g[1][1] - g[0][1] * g[1][0];
  return m1 > 0.0 && m2 > 0.0 && det(g) > 0.0;
}

/// Gamma^k_ij = 1/2 g^kl (d_i g_lj + d_j g_li - d_l g_ij)
template <class S>
Gamma<S> christoffel(const Mat3<Dual<S>>& g) {
  const Mat3<S> ginv = inverse(values(g));
  Gamma<S> lower;  // Gamma_lij
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        lower[l][i][j] = 0.5 * (g[l][j].d[i] + g[l][i].d[j] - g[i][j].d[l]);
  Gamma<S> out;
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) {
        S acc(0.0);
        for (std::size_t l = 0; l < 3; ++l) acc += ginv[k][l] * lower[l][i][j];
        out[k][i][j] = acc;
      }
  return out;
}

/// Directional derivative X(f) = X^i d_i f.
template <class S>
S directional(const Vec3<S>& x, const Dual<S>& f) {
  return x[0] * f.d[0] + x[1] * f.d[1] + x[2] * f.d[2];
}

/// (nabla_X Y)^k = X^i (d_i Y^k + Gamma^k_ij Y^j)
template <class S>
Vec3<S> covariant(const Gamma<S>& gamma, const Vec3<S>& x, const Vec3<Dual<S>>& y) {
  Vec3<S> r = zero_vec<S>();
  for (std::size_t k = 0; k < 3; ++k) {
    S acc = directional(x, y[k]);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) acc += gamma[k][i][j] * x[i] * y[j].v;
    r[k] = acc;
  }
  return r;
}

/// (nabla_X theta)_j = X^i (d_i theta_j - Gamma^k_ij theta_k)
template <class S>
Vec3<S> covariant_form(const Gamma<S>& gamma, const Vec3<S>& x, const Vec3<Dual<S>>& theta) {
  Vec3<S> r = zero_vec<S>();
  for (std::size_t j = 0; j < 3; ++j) {
    S acc = directional(x, theta[j]);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < 3; ++k) acc -= gamma[k][i][j] * x[i] * theta[k].v;
    r[j] = acc;
  }
  return r;
}

/// ((nabla_X phi) Y)^k for a (1,1)-tensor field phi and a vector Y at the point.
template <class S>
Vec3<S> covariant_endo(const Gamma<S>& gamma, const Vec3<S>& x, const Mat3<Dual<S>>& phi,
                       const Vec3<S>& y) {
  Vec3<S> r = zero_vec<S>();
  for (std::size_t k = 0; k < 3; ++k) {
    S acc(0.0);
    for (std::size_t j = 0; j < 3; ++j) {
      S t = directional(x, phi[k][j]);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t l = 0; l < 3; ++l)
          t += x[i] * (gamma[k][i][l] * phi[l][j].v - phi[k][l].v * gamma[l][i][j]);
      acc += t * y[j];
    }
    r[k] = acc;
  }
  return r;
}

/// [X, Y]^k = X^i d_i Y^k - Y^i d_i X^k
template <class S>
Vec3<S> bracket(const Vec3<Dual<S>>& x, const Vec3<Dual<S>>& y) {
  const Vec3<S> xv = values(x);
  const Vec3<S> yv = values(y);
  Vec3<S> r;
  for (std::size_t k = 0; k < 3; ++k) r[k] = directional(xv, y[k]) - directional(yv, x[k]);
  return r;
}

/// Components of d theta: (d theta)_ij = 1/2 (d_i theta_j - d_j theta_i).
template <class S>
Mat3<S> exterior_d(const Vec3<Dual<S>>& theta) {
  Mat3<S> r = zero_mat<S>();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) r[i][j] = 0.5 * (theta[j].d[i] - theta[i].d[j]);
  return r;
}

/// 123-component of dF for a 2-form F.
template <class S>
S exterior_d(const Mat3<Dual<S>>& f) {
  return (1.0 / 3.0) * (f[1][2].d[0] + f[2][0].d[1] + f[0][1].d[2]);
}

/// (a ^ b)_ij = 1/2 (a_i b_j - a_j b_i)
template <class T>
Mat3<T> wedge(const Vec3<T>& a, const Vec3<T>& b) {
  Mat3<T> r = zero_mat<T>();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) r[i][j] = 0.5 * (a[i] * b[j] - a[j] * b[i]);
  return r;
}

/// 123-component of a ^ F for a 1-form a and a 2-form F.
template <class T>
T wedge(const Vec3<T>& a, const Mat3<T>& f) {
  return (1.0 / 3.0) * (a[0] * f[1][2] + a[1] * f[2][0] + a[2] * f[0][1]);
}

/// F(X, Y) = X^i F_ij Y^j
template <class T>
T eval_form(const Mat3<T>& f, const Vec3<T>& x, const Vec3<T>& y) {
  return pair(x, act(f, y));
}

/// A 3-form with 123-component c evaluated on (X, Y, Z): c det[X Y Z].
inline double eval_three_form(double c123, const Vec3<double>& x, const Vec3<double>& y,
                              const Vec3<double>& z) {
  return c123 * triple(x, y, z);
}

/// div X = d_i X^i + Gamma^i_ij X^j
template <class S>
S divergence(const Gamma<S>& gamma, const Vec3<Dual<S>>& x) {
  S acc(0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    acc += x[i].d[i];
    for (std::size_t j = 0; j < 3; ++j) acc += gamma[i][i][j] * x[j].v;
  }
  return acc;
}

/// dv_g(X, Y, Z) = sqrt(det g) det[X Y Z]
inline double volume_form(const Mat3<double>& g, const Vec3<double>& x, const Vec3<double>& y,
                          const Vec3<double>& z) {
  return std::sqrt(det(g)) * triple(x, y, z);
}

/// The vector X x Y with g(X x Y, Z) = dv_g(X, Y, Z) for all Z.
inline Vec3<double> cross(const Mat3<double>& g, const Vec3<double>& x, const Vec3<double>& y) {
  const double vol = std::sqrt(det(g));
  const Vec3<double> lowered{vol * (x[1] * y[2] - x[2] * y[1]), vol * (x[2] * y[0] - x[0] * y[2]),
                             vol * (x[0] * y[1] - x[1] * y[0])};
  return act(inverse(g), lowered);
}

/// Gram-Schmidt orthonormalization of the coordinate frame with respect to g.
inline std::array<Vec3<double>, 3> orthonormal_frame(const Mat3<double>& g) {
  std::array<Vec3<double>, 3> e{Vec3<double>{1, 0, 0}, Vec3<double>{0, 1, 0}, Vec3<double>{0, 0, 1}};
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < a; ++b) e[a] = e[a] - scale(inner(g, e[a], e[b]), e[b]);
    e[a] = scale(1.0 / norm_g(g, e[a]), e[a]);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Expression-defined fields.

struct MetricField {
  Mat3<ScalarExpr> g;

  Mat3<Jet2> eval(const Point& p) const {
    Mat3<Jet2> r;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) r[i][j] = g[i][j].eval_jet2(p);
    return r;
  }

  template <JetScalar T>
  Mat3<T> jet(const Point& p) const {
    Mat3<T> r;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) r[i][j] = lift<T>(g[i][j].eval_jet2(p));
    return r;
  }

  static MetricField identity() {
    MetricField m;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) m.g[i][j] = ScalarExpr::constant(i == j ? 1.0 : 0.0);
    return m;
  }
  static MetricField diagonal(const ScalarExpr& a, const ScalarExpr& b, const ScalarExpr& c) {
    MetricField m = identity();
    m.g[0][0] = a;
    m.g[1][1] = b;
    m.g[2][2] = c;
    return m;
  }
};

/// Three component expressions; contravariant for VectorField, covariant for OneFormField.
struct ComponentField {
  Vec3<ScalarExpr> c;

  template <JetScalar T>
  Vec3<T> jet(const Point& p) const {
    return {lift<T>(c[0].eval_jet2(p)), lift<T>(c[1].eval_jet2(p)), lift<T>(c[2].eval_jet2(p))};
  }
  Vec3<double> at(const Point& p) const { return {c[0].eval(p), c[1].eval(p), c[2].eval(p)}; }

  static ComponentField of(const std::string& a, const std::string& b, const std::string& c3) {
    return ComponentField{{parse(a), parse(b), parse(c3)}};
  }
};

struct VectorField : ComponentField {};
struct OneFormField : ComponentField {};

inline VectorField vector_field(const std::string& a, const std::string& b, const std::string& c) {
  return VectorField{ComponentField::of(a, b, c)};
}
inline OneFormField one_form(const std::string& a, const std::string& b, const std::string& c) {
  return OneFormField{ComponentField::of(a, b, c)};
}

inline Gamma<double> christoffel(const MetricField& g, const Point& p) {
  const Mat3<Jet> gj = g.jet<Jet>(p);
  check_metric(values(gj), p);
  return christoffel(gj);
}

inline Vec3<double> covariant_deriv_vec(const MetricField& g, const VectorField& x,
                                        const VectorField& y, const Point& p) {
  return covariant(christoffel(g, p), x.at(p), y.jet<Jet>(p));
}

inline Vec3<double> lie_bracket(const VectorField& x, const VectorField& y, const Point& p) {
  return bracket(x.jet<Jet>(p), y.jet<Jet>(p));
}

/// d theta(X, Y) through the invariant formula 1/2 (X theta(Y) - Y theta(X) - theta([X, Y])).
inline double exterior_d_oneform(const OneFormField& theta, const VectorField& x,
                                 const VectorField& y, const Point& p) {
  const Vec3<Jet> t = theta.jet<Jet>(p);
  const Vec3<Jet> xj = x.jet<Jet>(p);
  const Vec3<Jet> yj = y.jet<Jet>(p);
  const Jet theta_y = pair(t, yj);
  const Jet theta_x = pair(t, xj);
  return 0.5 * (directional(values(xj), theta_y) - directional(values(yj), theta_x) -
                pair(values(t), bracket(xj, yj)));
}

inline double divergence(const MetricField& g, const VectorField& x, const Point& p) {
  return divergence(christoffel(g, p), x.jet<Jet>(p));
}

inline Vec3<double> volume_cross(const MetricField& g, const VectorField& x, const VectorField& y,
                                 const Point& p) {
  const Mat3<double> gv = values(g.jet<Jet>(p));
  check_metric(gv, p);
  return cross(gv, x.at(p), y.at(p));
}

// ---------------------------------------------------------------------------

/// Axis-aligned sampling box with a seeded point generator.
struct ChartDomain {
  Point lo{{0.1, 0.1, 0.1}};
  Point hi{{1.0, 1.0, 1.0}};
  double det_guard = kSingularMetricGuard;

  bool valid() const {
    for (std::size_t i = 0; i < 3; ++i)
      if (!(lo[i] < hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i])) return false;
    return det_guard > 0.0;
  }

  std::vector<Point> sample(std::size_t n, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::vector<Point> pts;
    pts.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
      Point p;
      for (std::size_t i = 0; i < 3; ++i) {
        const double u = std::generate_canonical<double, 53>(rng);
        p[i] = lo[i] + u * (hi[i] - lo[i]);
      }
      pts.push_back(p);
    }
    return pts;
  }
};

inline constexpr std::size_t kDefaultSamples = 100;

} // namespace cornerkit

#endif
