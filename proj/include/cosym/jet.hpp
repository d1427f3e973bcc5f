#pragma once

// Forward-mode jets over a fixed number of coordinates.
//
// Jet1 carries a value and gradient, Jet2 additionally carries the Hessian.
// Every elementary function is applied through `chain`, which takes the
// value and the first two derivatives of the outer function; the Hessian is
// filled on the upper triangle and mirrored, so it is symmetric bit for bit.

#include <cstddef>
#include <vector>

namespace cosym {

struct Jet1 {
  double value = 0.0;
  std::vector<double> grad;

  Jet1() = default;
  Jet1(double v, std::size_t dim) : value(v), grad(dim, 0.0) {}

  static Jet1 variable(double v, std::size_t dim, std::size_t index) {
    Jet1 j(v, dim);
    j.grad[index] = 1.0;
    return j;
  }
  std::size_t dim() const { return grad.size(); }
};

struct Jet2 {
  double value = 0.0;
  std::vector<double> grad;
  std::vector<double> hess;  // row-major dim x dim

  Jet2() = default;
  Jet2(double v, std::size_t dim) : value(v), grad(dim, 0.0), hess(dim * dim, 0.0) {}

  static Jet2 variable(double v, std::size_t dim, std::size_t index) {
    Jet2 j(v, dim);
    j.grad[index] = 1.0;
    return j;
  }
  std::size_t dim() const { return grad.size(); }
  double h(std::size_t i, std::size_t j) const { return hess[i * grad.size() + j]; }
};

// g(u) with g = (d0, d1, d2) the outer value and derivatives at u.value.
inline Jet1 chain(const Jet1& u, double d0, double d1, double /*d2*/) {
  Jet1 r(d0, u.dim());
  for (std::size_t i = 0; i < u.dim(); ++i) r.grad[i] = d1 * u.grad[i];
  return r;
}

inline Jet2 chain(const Jet2& u, double d0, double d1, double d2) {
  const std::size_t n = u.dim();
  Jet2 r(d0, n);
  for (std::size_t i = 0; i < n; ++i) r.grad[i] = d1 * u.grad[i];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = d1 * u.hess[i * n + j] + d2 * u.grad[i] * u.grad[j];
      r.hess[i * n + j] = v;
      r.hess[j * n + i] = v;
    }
  }
  return r;
}

inline Jet1 operator+(const Jet1& a, const Jet1& b) {
  Jet1 r(a.value + b.value, a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r.grad[i] = a.grad[i] + b.grad[i];
  return r;
}
inline Jet1 operator-(const Jet1& a, const Jet1& b) {
  Jet1 r(a.value - b.value, a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r.grad[i] = a.grad[i] - b.grad[i];
  return r;
}
inline Jet1 operator-(const Jet1& a) { return chain(a, -a.value, -1.0, 0.0); }
inline Jet1 operator*(const Jet1& a, const Jet1& b) {
  Jet1 r(a.value * b.value, a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
  return r;
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r(a.value + b.value, a.dim());
  for (std::size_t i = 0; i < a.grad.size(); ++i) r.grad[i] = a.grad[i] + b.grad[i];
  for (std::size_t i = 0; i < a.hess.size(); ++i) r.hess[i] = a.hess[i] + b.hess[i];
  return r;
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  Jet2 r(a.value - b.value, a.dim());
  for (std::size_t i = 0; i < a.grad.size(); ++i) r.grad[i] = a.grad[i] - b.grad[i];
  for (std::size_t i = 0; i < a.hess.size(); ++i) r.hess[i] = a.hess[i] - b.hess[i];
  return r;
}
inline Jet2 operator-(const Jet2& a) { return chain(a, -a.value, -1.0, 0.0); }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  const std::size_t n = a.dim();
  Jet2 r(a.value * b.value, n);
  for (std::size_t i = 0; i < n; ++i) r.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = a.value * b.hess[i * n + j] + b.value * a.hess[i * n + j] +
                       a.grad[i] * b.grad[j] + a.grad[j] * b.grad[i];
      r.hess[i * n + j] = v;
      r.hess[j * n + i] = v;
    }
  }
  return r;
}

// Scalar-type traits used by the templated evaluator.
inline double value_of(double x) { return x; }
inline double value_of(const Jet1& x) { return x.value; }
inline double value_of(const Jet2& x) { return x.value; }

inline double chain(double /*u*/, double d0, double /*d1*/, double /*d2*/) { return d0; }

}  // namespace cosym
