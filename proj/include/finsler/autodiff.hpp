#pragma once

// Forward-mode dual and hyper-dual numbers. Both are templated on the
// coefficient type so they nest: HyperDual<HyperDual<double>> carries mixed
// derivatives up to fourth order along four seeded directions.

#include <cmath>
#include <type_traits>

namespace finsler {

template <class T>
struct Dual {
  T a{};  // value
  T b{};  // derivative along the seeded direction

  constexpr Dual() = default;
  constexpr Dual(double v) : a(v), b(0.0) {}  // NOLINT(implicit)
  constexpr Dual(T v, T d) : a(v), b(d) {}
  template <class U = T, class = std::enable_if_t<!std::is_same_v<U, double>>>
  constexpr Dual(const T& v) : a(v), b(0.0) {}  // NOLINT(implicit)
};

/// a + b e1 + c e2 + d e1 e2 with e1^2 = e2^2 = 0.
template <class T>
struct HyperDual {
  T a{};
  T b{};
  T c{};
  T d{};

  constexpr HyperDual() = default;
  constexpr HyperDual(double v) : a(v), b(0.0), c(0.0), d(0.0) {}  // NOLINT
  constexpr HyperDual(T a_, T b_, T c_, T d_) : a(a_), b(b_), c(c_), d(d_) {}
  template <class U = T, class = std::enable_if_t<!std::is_same_v<U, double>>>
  constexpr HyperDual(const T& v) : a(v), b(0.0), c(0.0), d(0.0) {}  // NOLINT
};

template <class T>
struct is_ad : std::false_type {};
template <class T>
struct is_ad<Dual<T>> : std::true_type {};
template <class T>
struct is_ad<HyperDual<T>> : std::true_type {};

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) {
  return primal(x.a);
}
template <class T>
double primal(const HyperDual<T>& x) {
  return primal(x.a);
}

// ---- Dual arithmetic -------------------------------------------------------

template <class T>
Dual<T> operator+(const Dual<T>& x, const Dual<T>& y) {
  return {x.a + y.a, x.b + y.b};
}
template <class T>
Dual<T> operator-(const Dual<T>& x, const Dual<T>& y) {
  return {x.a - y.a, x.b - y.b};
}
template <class T>
Dual<T> operator-(const Dual<T>& x) {
  return {-x.a, -x.b};
}
template <class T>
Dual<T> operator*(const Dual<T>& x, const Dual<T>& y) {
  return {x.a * y.a, x.a * y.b + x.b * y.a};
}
template <class T>
Dual<T> operator/(const Dual<T>& x, const Dual<T>& y) {
  T inv = T(1.0) / y.a;
  T q = x.a * inv;
  return {q, (x.b - q * y.b) * inv};
}
template <class T>
Dual<T> operator*(const Dual<T>& x, double s) {
  return {x.a * s, x.b * s};
}
template <class T>
Dual<T> operator*(double s, const Dual<T>& x) {
  return {x.a * s, x.b * s};
}
template <class T>
Dual<T> operator/(const Dual<T>& x, double s) {
  return {x.a / s, x.b / s};
}
template <class T>
Dual<T> operator+(const Dual<T>& x, double s) {
  return {x.a + s, x.b};
}
template <class T>
Dual<T> operator+(double s, const Dual<T>& x) {
  return {x.a + s, x.b};
}
template <class T>
Dual<T> operator-(const Dual<T>& x, double s) {
  return {x.a - s, x.b};
}
template <class T>
Dual<T> operator-(double s, const Dual<T>& x) {
  return {s - x.a, -x.b};
}
template <class T>
Dual<T> operator/(double s, const Dual<T>& x) {
  return Dual<T>(s) / x;
}

template <class T, class F0, class F1>
Dual<T> chain(const Dual<T>& x, F0&& f, F1&& df) {
  return {f(x.a), df(x.a) * x.b};
}

// ---- HyperDual arithmetic --------------------------------------------------

template <class T>
HyperDual<T> operator+(const HyperDual<T>& x, const HyperDual<T>& y) {
  return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
}
template <class T>
HyperDual<T> operator-(const HyperDual<T>& x, const HyperDual<T>& y) {
  return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
}
template <class T>
HyperDual<T> operator-(const HyperDual<T>& x) {
  return {-x.a, -x.b, -x.c, -x.d};
}
template <class T>
HyperDual<T> operator*(const HyperDual<T>& x, const HyperDual<T>& y) {
  return {x.a * y.a, x.a * y.b + x.b * y.a, x.a * y.c + x.c * y.a,
          x.a * y.d + x.b * y.c + x.c * y.b + x.d * y.a};
}
template <class T>
HyperDual<T> operator/(const HyperDual<T>& x, const HyperDual<T>& y) {
  // x * (1/y); 1/y via chain rule with f' = -1/y^2, f'' = 2/y^3
  T inv = T(1.0) / y.a;
  T inv2 = inv * inv;
  HyperDual<T> r{inv, -inv2 * y.b, -inv2 * y.c,
                 -inv2 * y.d + T(2.0) * inv2 * inv * y.b * y.c};
  return x * r;
}
template <class T>
HyperDual<T> operator*(const HyperDual<T>& x, double s) {
  return {x.a * s, x.b * s, x.c * s, x.d * s};
}
template <class T>
HyperDual<T> operator*(double s, const HyperDual<T>& x) {
  return x * s;
}
template <class T>
HyperDual<T> operator/(const HyperDual<T>& x, double s) {
  return {x.a / s, x.b / s, x.c / s, x.d / s};
}
template <class T>
HyperDual<T> operator+(const HyperDual<T>& x, double s) {
  return {x.a + s, x.b, x.c, x.d};
}
template <class T>
HyperDual<T> operator+(double s, const HyperDual<T>& x) {
  return x + s;
}
template <class T>
HyperDual<T> operator-(const HyperDual<T>& x, double s) {
  return {x.a - s, x.b, x.c, x.d};
}
template <class T>
HyperDual<T> operator-(double s, const HyperDual<T>& x) {
  return {s - x.a, -x.b, -x.c, -x.d};
}
template <class T>
HyperDual<T> operator/(double s, const HyperDual<T>& x) {
  return HyperDual<T>(s) / x;
}

template <class T, class F0, class F1, class F2>
HyperDual<T> chain(const HyperDual<T>& x, F0&& f, F1&& df, F2&& d2f) {
  T f1 = df(x.a);
  return {f(x.a), f1 * x.b, f1 * x.c, f1 * x.d + d2f(x.a) * x.b * x.c};
}

// Compound assignment for any AD type.
template <class A, class B, class = std::enable_if_t<is_ad<A>::value>>
A& operator+=(A& x, const B& y) {
  x = x + y;
  return x;
}
template <class A, class B, class = std::enable_if_t<is_ad<A>::value>>
A& operator-=(A& x, const B& y) {
  x = x - y;
  return x;
}
template <class A, class B, class = std::enable_if_t<is_ad<A>::value>>
A& operator*=(A& x, const B& y) {
  x = x * y;
  return x;
}
template <class A, class B, class = std::enable_if_t<is_ad<A>::value>>
A& operator/=(A& x, const B& y) {
  x = x / y;
  return x;
}

// ---- elementary functions --------------------------------------------------

using std::cos;
using std::exp;
using std::log;
using std::sin;
using std::sqrt;

template <class T>
Dual<T> sqrt(const Dual<T>& x) {
  T s = sqrt(x.a);
  return {s, x.b / (T(2.0) * s)};
}
template <class T>
HyperDual<T> sqrt(const HyperDual<T>& x) {
  T s = sqrt(x.a);
  T f1 = T(0.5) / s;
  T f2 = -f1 / (T(2.0) * x.a);
  return {s, f1 * x.b, f1 * x.c, f1 * x.d + f2 * x.b * x.c};
}

template <class T>
Dual<T> exp(const Dual<T>& x) {
  T e = exp(x.a);
  return {e, e * x.b};
}
template <class T>
HyperDual<T> exp(const HyperDual<T>& x) {
  T e = exp(x.a);
  return {e, e * x.b, e * x.c, e * (x.d + x.b * x.c)};
}

template <class T>
Dual<T> log(const Dual<T>& x) {
  return {log(x.a), x.b / x.a};
}
template <class T>
HyperDual<T> log(const HyperDual<T>& x) {
  T inv = T(1.0) / x.a;
  return {log(x.a), inv * x.b, inv * x.c, inv * x.d - inv * inv * x.b * x.c};
}

template <class T>
Dual<T> sin(const Dual<T>& x) {
  return {sin(x.a), cos(x.a) * x.b};
}
template <class T>
HyperDual<T> sin(const HyperDual<T>& x) {
  T s = sin(x.a);
  T c = cos(x.a);
  return {s, c * x.b, c * x.c, c * x.d - s * x.b * x.c};
}

template <class T>
Dual<T> cos(const Dual<T>& x) {
  return {cos(x.a), -sin(x.a) * x.b};
}
template <class T>
HyperDual<T> cos(const HyperDual<T>& x) {
  T s = sin(x.a);
  T c = cos(x.a);
  return {c, -s * x.b, -s * x.c, -s * x.d - c * x.b * x.c};
}

// ---- seeding helpers -------------------------------------------------------

template <class T>
HyperDual<T> seed(const T& value, double e1, double e2) {
  return {value, T(e1), T(e2), T(0.0)};
}

}  // namespace finsler
