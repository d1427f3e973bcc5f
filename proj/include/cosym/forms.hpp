#pragma once

// Differential forms and vector fields on a single chart.
//
// Index convention used throughout the library:
//   Omega(i, j) = omega(d/dx_i, d/dx_j)            (antisymmetric matrix)
//   (i_X omega)_j = sum_i X^i Omega(i, j)            i.e. i_X omega = Omega^T X
//   omega(X, Y) = X^T Omega Y
// See docs/CONVENTIONS.md for the worked canonical example.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cosym/chart.hpp"
#include "cosym/expr.hpp"

namespace cosym {

class OneFormField {
 public:
  OneFormField() = default;
  explicit OneFormField(std::vector<Expr> components) : components_(std::move(components)) {}

  std::size_t dim() const { return components_.size(); }
  const std::vector<Expr>& components() const { return components_; }
  const Expr& operator[](std::size_t i) const { return components_[i]; }

  Vector value(const Vector& x) const;
  // J(i, k) = d theta_i / d x_k.
  Matrix jacobian(const Vector& x) const;
  bool is_constant() const;

 private:
  std::vector<Expr> components_;
};

// Upper-triangle storage of an antisymmetric coefficient matrix.
class TwoFormField {
 public:
  TwoFormField() = default;
  explicit TwoFormField(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  // Requires i < j; replaces an existing entry.
  void set(std::size_t i, std::size_t j, Expr e);
  // Entry (i, j) for i < j, or the literal zero.
  Expr get(std::size_t i, std::size_t j) const;
  const std::map<std::pair<std::size_t, std::size_t>, Expr>& entries() const { return entries_; }

  Matrix value(const Vector& x) const;
  bool is_constant() const;

 private:
  std::size_t dim_ = 0;
  std::map<std::pair<std::size_t, std::size_t>, Expr> entries_;
};

// Dense 3-index array, used for the exterior derivative of a 2-form.
class Tensor3 {
 public:
  explicit Tensor3(std::size_t n) : n_(n), data_(n * n * n, 0.0) {}
  std::size_t dim() const { return n_; }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * n_ + j) * n_ + k]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * n_ + j) * n_ + k];
  }
  double max_abs() const;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

// (d theta)_{ij} = d_i theta_j - d_j theta_i.
Matrix exterior_derivative(const OneFormField& theta, const Vector& x);
// (d Omega)_{ijk} = d_i Omega_jk + d_j Omega_ki + d_k Omega_ij.
Tensor3 exterior_derivative(const TwoFormField& omega, const Vector& x);

// Symbolic wedge of two 1-forms.
TwoFormField wedge(const OneFormField& a, const OneFormField& b);
// Symbolic exterior derivative of a scalar and of a 1-form.
OneFormField differential(const Expr& f, std::size_t dim);
TwoFormField exterior_derivative(const OneFormField& theta);

TwoFormField operator+(const TwoFormField& a, const TwoFormField& b);
TwoFormField operator-(const TwoFormField& a);

// A vector field given pointwise, optionally with an exact Jacobian
// J(i, k) = dX^i / dx_k.
struct VectorField {
  std::function<Vector(const Vector&)> value;
  std::function<Matrix(const Vector&)> jacobian;

  Vector operator()(const Vector& x) const { return value(x); }
};

// Vector field with expression components; carries an exact Jacobian.
VectorField expr_vector_field(std::vector<Expr> components);

// Per-coordinate step for the derived-field difference stencils.
inline double fd_step(double xi) { return std::max(1e-4, 1e-4 * std::abs(xi)); }

// Five-point central-difference Jacobian J(i, k) = dX^i / dx_k.
Matrix jacobian_fd(const std::function<Vector(const Vector&)>& field, const Vector& x);
// Five-point central-difference gradient of a scalar function.
Vector gradient_fd(const std::function<double(const Vector&)>& f, const Vector& x);

// [X, Y]^i = sum_j (X^j d_j Y^i - Y^j d_j X^i). Uses exact Jacobians where
// the field carries one and finite differences otherwise.
Vector lie_bracket(const VectorField& X, const VectorField& Y, const Vector& x);

}  // namespace cosym
