#include "cosym/forms.hpp"

#include <cmath>
#include <stdexcept>

namespace cosym {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

Vector OneFormField::value(const Vector& x) const {
  Vector v(ix(dim()));
  for (std::size_t i = 0; i < dim(); ++i) v[ix(i)] = components_[i].eval(as_span(x));
  return v;
}

Matrix OneFormField::jacobian(const Vector& x) const {
  const std::size_t n = dim();
  Matrix J = Matrix::Zero(ix(n), x.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (components_[i].is_constant()) continue;
    const Jet1 j = components_[i].eval_jet1(as_span(x));
    for (std::size_t k = 0; k < j.grad.size(); ++k) J(ix(i), ix(k)) = j.grad[k];
  }
  return J;
}

bool OneFormField::is_constant() const {
  for (const auto& c : components_) {
    if (!c.is_constant()) return false;
  }
  return true;
}

void TwoFormField::set(std::size_t i, std::size_t j, Expr e) {
  if (!(i < j && j < dim_)) throw std::out_of_range("two-form entries are stored for i < j < dim");
  if (e.is_zero()) {
    entries_.erase({i, j});
  } else {
    entries_[{i, j}] = std::move(e);
  }
}

Expr TwoFormField::get(std::size_t i, std::size_t j) const {
  auto it = entries_.find({i, j});
  return it == entries_.end() ? Expr() : it->second;
}

Matrix TwoFormField::value(const Vector& x) const {
  Matrix m = Matrix::Zero(ix(dim_), ix(dim_));
  for (const auto& [key, e] : entries_) {
    const double v = e.eval(as_span(x));
    m(ix(key.first), ix(key.second)) = v;
    m(ix(key.second), ix(key.first)) = -v;
  }
  return m;
}

bool TwoFormField::is_constant() const {
  for (const auto& [key, e] : entries_) {
    if (!e.is_constant()) return false;
  }
  return true;
}

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Matrix exterior_derivative(const OneFormField& theta, const Vector& x) {
  const Matrix J = theta.jacobian(x);  // J(j, i) = d_i theta_j
  return J.transpose() - J;
}

Tensor3 exterior_derivative(const TwoFormField& omega, const Vector& x) {
  const std::size_t n = omega.dim();
  // D[k](i, j) = d_k Omega_ij
  std::vector<Matrix> D(n, Matrix::Zero(ix(n), ix(n)));
  for (const auto& [key, e] : omega.entries()) {
    if (e.is_constant()) continue;
    const Jet1 j = e.eval_jet1(as_span(x));
    for (std::size_t k = 0; k < n; ++k) {
      D[k](ix(key.first), ix(key.second)) = j.grad[k];
      D[k](ix(key.second), ix(key.first)) = -j.grad[k];
    }
  }
  Tensor3 t(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        t(i, j, k) = D[i](ix(j), ix(k)) + D[j](ix(k), ix(i)) + D[k](ix(i), ix(j));
      }
    }
  }
  return t;
}

TwoFormField wedge(const OneFormField& a, const OneFormField& b) {
  const std::size_t n = a.dim();
  TwoFormField w(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      w.set(i, j, a[i] * b[j] - a[j] * b[i]);
    }
  }
  return w;
}

OneFormField differential(const Expr& f, std::size_t dim) {
  std::vector<Expr> c;
  c.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) c.push_back(derivative(f, i));
  return OneFormField(std::move(c));
}

TwoFormField exterior_derivative(const OneFormField& theta) {
  const std::size_t n = theta.dim();
  TwoFormField w(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      w.set(i, j, derivative(theta[j], i) - derivative(theta[i], j));
    }
  }
  return w;
}

TwoFormField operator+(const TwoFormField& a, const TwoFormField& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("two-form dimensions differ");
  TwoFormField s = a;
  for (const auto& [key, e] : b.entries()) s.set(key.first, key.second, a.get(key.first, key.second) + e);
  return s;
}

TwoFormField operator-(const TwoFormField& a) {
  TwoFormField s(a.dim());
  for (const auto& [key, e] : a.entries()) s.set(key.first, key.second, -e);
  return s;
}

VectorField expr_vector_field(std::vector<Expr> components) {
  OneFormField f(std::move(components));  // same storage shape: one Expr per index
  VectorField v;
  v.value = [f](const Vector& x) { return f.value(x); };
  v.jacobian = [f](const Vector& x) { return f.jacobian(x); };
  return v;
}

Matrix jacobian_fd(const std::function<Vector(const Vector&)>& field, const Vector& x) {
  const Eigen::Index n = x.size();
  Matrix J;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = fd_step(x[k]);
    Vector xp1 = x, xm1 = x, xp2 = x, xm2 = x;
    xp1[k] += h;
    xm1[k] -= h;
    xp2[k] += 2 * h;
    xm2[k] -= 2 * h;
    const Vector col = (-field(xp2) + 8.0 * field(xp1) - 8.0 * field(xm1) + field(xm2)) / (12.0 * h);
    if (k == 0) J = Matrix::Zero(col.size(), n);
    J.col(k) = col;
  }
  return J;
}

Vector gradient_fd(const std::function<double(const Vector&)>& f, const Vector& x) {
  const Eigen::Index n = x.size();
  Vector g(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = fd_step(x[k]);
    Vector xp1 = x, xm1 = x, xp2 = x, xm2 = x;
    xp1[k] += h;
    xm1[k] -= h;
    xp2[k] += 2 * h;
    xm2[k] -= 2 * h;
    g[k] = (-f(xp2) + 8.0 * f(xp1) - 8.0 * f(xm1) + f(xm2)) / (12.0 * h);
  }
  return g;
}

Vector lie_bracket(const VectorField& X, const VectorField& Y, const Vector& x) {
  const Matrix JX = X.jacobian ? X.jacobian(x) : jacobian_fd(X.value, x);
  const Matrix JY = Y.jacobian ? Y.jacobian(x) : jacobian_fd(Y.value, x);
  const Vector a = JY * X.value(x);
  const Vector b = JX * Y.value(x);
  return a - b;
}

}  // namespace cosym
