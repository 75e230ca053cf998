#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace ppinn::ad {

// Truncated second-order Taylor value: a scalar together with first and pure
// second derivatives along up to two tracked directions. Mixed second
// derivatives are not carried; none of the supported differential operators
// need them. The scalar type T is double in plain evaluation and a reverse
// tape variable in tests that cross-check the batched network engine.
template <typename T>
struct Jet2 {
  T v{};
  int nd = 0;
  std::array<T, 2> g{};
  std::array<T, 2> h{};

  Jet2() = default;
  explicit Jet2(const T& value, int ndirs = 0) : v(value), nd(ndirs) {}

  // A variable seeded along direction `dir` of `ndirs` tracked directions.
  static Jet2 variable(const T& value, int dir, int ndirs) {
    Jet2 j(value, ndirs);
    j.g[dir] = T(1.0);
    return j;
  }
  static Jet2 constant(const T& value, int ndirs) { return Jet2(value, ndirs); }
};

namespace detail {
inline void check_dirs(int a, int b) {
  if (a != b) throw std::invalid_argument("Jet2: mismatched direction sets");
}
}  // namespace detail

template <typename T>
Jet2<T> operator+(const Jet2<T>& a, const Jet2<T>& b) {
  detail::check_dirs(a.nd, b.nd);
  Jet2<T> c(a.v + b.v, a.nd);
  for (int d = 0; d < a.nd; ++d) {
    c.g[d] = a.g[d] + b.g[d];
    c.h[d] = a.h[d] + b.h[d];
  }
  return c;
}

template <typename T>
Jet2<T> operator-(const Jet2<T>& a, const Jet2<T>& b) {
  detail::check_dirs(a.nd, b.nd);
  Jet2<T> c(a.v - b.v, a.nd);
  for (int d = 0; d < a.nd; ++d) {
    c.g[d] = a.g[d] - b.g[d];
    c.h[d] = a.h[d] - b.h[d];
  }
  return c;
}

template <typename T>
Jet2<T> operator-(const Jet2<T>& a) {
  Jet2<T> c(-a.v, a.nd);
  for (int d = 0; d < a.nd; ++d) {
    c.g[d] = -a.g[d];
    c.h[d] = -a.h[d];
  }
  return c;
}

template <typename T>
Jet2<T> operator*(const Jet2<T>& a, const Jet2<T>& b) {
  detail::check_dirs(a.nd, b.nd);
  Jet2<T> c(a.v * b.v, a.nd);
  for (int d = 0; d < a.nd; ++d) {
    c.g[d] = a.g[d] * b.v + a.v * b.g[d];
    c.h[d] = a.h[d] * b.v + 2.0 * a.g[d] * b.g[d] + a.v * b.h[d];
  }
  return c;
}

template <typename T>
Jet2<T> operator*(double s, const Jet2<T>& a) {
  Jet2<T> c(s * a.v, a.nd);
  for (int d = 0; d < a.nd; ++d) {
    c.g[d] = s * a.g[d];
    c.h[d] = s * a.h[d];
  }
  return c;
}

template <typename T>
Jet2<T> operator*(const Jet2<T>& a, double s) {
  return s * a;
}

template <typename T>
Jet2<T> operator+(const Jet2<T>& a, double s) {
  Jet2<T> c = a;
  c.v = a.v + s;
  return c;
}

template <typename T>
Jet2<T> operator+(double s, const Jet2<T>& a) {
  return a + s;
}

template <typename T>
Jet2<T> operator-(const Jet2<T>& a, double s) {
  return a + (-s);
}

template <typename T>
Jet2<T> operator-(double s, const Jet2<T>& a) {
  return (-a) + s;
}

// Composition with a scalar function given its value and first two
// derivatives at a.v: (f∘a)' = f'·a', (f∘a)'' = f''·a'² + f'·a''.
template <typename T>
Jet2<T> compose(const Jet2<T>& a, const T& f, const T& fp, const T& fpp) {
  Jet2<T> c(f, a.nd);
  for (int d = 0; d < a.nd; ++d) {
    c.g[d] = fp * a.g[d];
    c.h[d] = fpp * a.g[d] * a.g[d] + fp * a.h[d];
  }
  return c;
}

template <typename T>
Jet2<T> tanh(const Jet2<T>& a) {
  using std::tanh;
  const T t = tanh(a.v);
  const T dsq = 1.0 - t * t;
  return compose(a, t, dsq, -2.0 * t * dsq);
}

template <typename T>
Jet2<T> sin(const Jet2<T>& a) {
  using std::cos;
  using std::sin;
  const T s = sin(a.v);
  return compose(a, s, T(cos(a.v)), -s);
}

template <typename T>
Jet2<T> cos(const Jet2<T>& a) {
  using std::cos;
  using std::sin;
  const T c = cos(a.v);
  return compose(a, c, T(-1.0 * sin(a.v)), -c);
}

template <typename T>
Jet2<T> exp(const Jet2<T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return compose(a, e, e, e);
}

template <typename T>
Jet2<T> square(const Jet2<T>& a) {
  return a * a;
}

}  // namespace ppinn::ad
