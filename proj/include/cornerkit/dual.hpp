#ifndef CORNERKIT_DUAL_HPP
#define CORNERKIT_DUAL_HPP

// Forward-mode first-order jets over an arbitrary scalar type.
//
// Dual<double> carries a value and its three partial derivatives. Nesting one
// level, Dual<Dual<double>>, carries a field together with its first
// derivatives, each of which again carries derivatives: this is how quantities
// built from first derivatives of the structure (Christoffel symbols, psi, the
// fundamental frame) come out with their own exact first derivatives.

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

#include "cornerkit/expr.hpp"

namespace cornerkit {

template <class S>
struct Dual {
  S v{};
  std::array<S, 3> d{};

  Dual() = default;
  Dual(double c) : v(c), d{} {}  // NOLINT: constants convert implicitly
  Dual(S value, std::array<S, 3> deriv) : v(std::move(value)), d(std::move(deriv)) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < 3; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < 3; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
};

using Jet = Dual<double>;
using Jet2D = Dual<Dual<double>>;

template <class T>
struct is_dual : std::false_type {};
template <class S>
struct is_dual<Dual<S>> : std::true_type {};

/// Scalar types the geometry kernels are instantiated with.
template <class T>
concept JetScalar = std::is_same_v<T, double> || is_dual<T>::value;

template <class S>
Dual<S> operator+(Dual<S> a, const Dual<S>& b) { return a += b; }
template <class S>
Dual<S> operator-(Dual<S> a, const Dual<S>& b) { return a -= b; }
template <class S>
Dual<S> operator-(const Dual<S>& a) {
  Dual<S> r;
  r.v = -a.v;
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = -a.d[i];
  return r;
}
template <class S>
Dual<S> operator*(const Dual<S>& a, const Dual<S>& b) {
  Dual<S> r;
  r.v = a.v * b.v;
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = a.v * b.d[i] + a.d[i] * b.v;
  return r;
}
template <class S>
Dual<S> operator*(double c, const Dual<S>& a) {
  Dual<S> r;
  r.v = c * a.v;
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = c * a.d[i];
  return r;
}
template <class S>
Dual<S> operator*(const Dual<S>& a, double c) { return c * a; }
template <class S>
Dual<S> operator+(const Dual<S>& a, double c) { return a + Dual<S>(c); }
template <class S>
Dual<S> operator+(double c, const Dual<S>& a) { return a + Dual<S>(c); }
template <class S>
Dual<S> operator-(const Dual<S>& a, double c) { return a - Dual<S>(c); }
template <class S>
Dual<S> operator-(double c, const Dual<S>& a) { return Dual<S>(c) - a; }

template <class S>
Dual<S> chain(const Dual<S>& a, const S& f0, const S& f1) {
  Dual<S> r;
  r.v = f0;
  for (std::size_t i = 0; i < 3; ++i) r.d[i] = f1 * a.d[i];
  return r;
}

template <class S>
Dual<S> reciprocal(const Dual<S>& a) {
  const S inv = 1.0 / a.v;
  return chain(a, inv, -(inv * inv));
}
template <class S>
Dual<S> operator/(const Dual<S>& a, const Dual<S>& b) { return a * reciprocal(b); }
template <class S>
Dual<S> operator/(double c, const Dual<S>& a) { return c * reciprocal(a); }
template <class S>
Dual<S> operator/(const Dual<S>& a, double c) { return (1.0 / c) * a; }

template <class S>
Dual<S> exp(const Dual<S>& a) {
  using std::exp;
  const S e = exp(a.v);
  return chain(a, e, e);
}
template <class S>
Dual<S> log(const Dual<S>& a) {
  using std::log;
  return chain(a, log(a.v), 1.0 / a.v);
}
template <class S>
Dual<S> sqrt(const Dual<S>& a) {
  using std::sqrt;
  const S s = sqrt(a.v);
  return chain(a, s, 0.5 / s);
}

/// Innermost value of a (possibly nested) jet.
inline double primal(double x) { return x; }
template <class S>
double primal(const Dual<S>& a) { return primal(a.v); }

/// The jet with its outermost derivative layer dropped.
template <class S>
S value_of(const Dual<S>& a) { return a.v; }

/// Partial derivative along coordinate k, as a jet of one lower order.
template <class S>
S partial(const Dual<S>& a, std::size_t k) { return a.d[k]; }

/// First-order jet of an expression jet.
inline Jet to_jet(const Jet2& j) { return Jet(j.value, j.grad); }

/// Second-order expression jet seen as a jet of jets.
inline Jet2D to_jet2d(const Jet2& j) {
  Jet2D r;
  r.v = Jet(j.value, j.grad);
  for (std::size_t k = 0; k < 3; ++k) r.d[k] = Jet(j.grad[k], j.hess[k]);
  return r;
}

template <JetScalar T>
T lift(const Jet2& j);
template <>
inline Jet lift<Jet>(const Jet2& j) { return to_jet(j); }
template <>
inline Jet2D lift<Jet2D>(const Jet2& j) { return to_jet2d(j); }

} // namespace cornerkit

#endif
