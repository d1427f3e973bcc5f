#pragma once

// Cosymplectic structures (omega, eta) on a chart and the fields derived from
// them.
//
// All pointwise quantities come from one square solve. With
//   A(x) = Omega(x) + eta(x) eta(x)^T
// A is invertible exactly where eta ^ omega^n != 0. Because Omega is
// antisymmetric, A^T = -Omega + eta eta^T, and for any covector b the vector
//   v = A^{-T} b
// satisfies Omega^T v + eta (eta . v) = b. Taking b = eta gives the Reeb field
// (Omega^T Z = 0, eta(Z) = 1). Taking b = df - Z(f) eta, which annihilates Z,
// gives eta(v) = 0 and i_v omega = b, i.e. the Hamiltonian field X_f.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "cosym/chart.hpp"
#include "cosym/forms.hpp"
#include "cosym/tolerance.hpp"

namespace cosym {

// |det A| fell below the volume threshold: eta ^ omega^n vanishes at `point`.
class DegenerateStructure : public std::runtime_error {
 public:
  DegenerateStructure(Vector point, double det);
  const Vector& point() const { return point_; }
  double det() const { return det_; }

 private:
  Vector point_;
  double det_;
};

// A computed field failed its defining conditions beyond tolerance.
class ResidualError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Smooth function on the chart: either an expression (exact derivatives) or a
// numeric callable (five-point difference gradient).
class ScalarField {
 public:
  ScalarField() : expr_(Expr()) {}
  explicit ScalarField(Expr e, std::string name = "");
  static ScalarField numeric(std::string name, std::function<double(const Vector&)> fn);

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  const std::optional<Expr>& expr() const { return expr_; }
  const std::string& name() const { return name_; }

 private:
  std::optional<Expr> expr_;
  std::function<double(const Vector&)> fn_;
  std::string name_;
};

struct CosymplecticStructure {
  ChartSpec chart;
  TwoFormField omega;
  OneFormField eta;
  DomainBox box;
  // A 1-form alpha with -d alpha = omega, when the constructor knows one.
  std::optional<OneFormField> primitive;

  std::size_t dim() const { return chart.dim(); }
  bool is_constant() const { return omega.is_constant() && eta.is_constant(); }
};

// The structure frozen at one point, with A^T factored once.
class PointFrame {
 public:
  PointFrame(const CosymplecticStructure& s, const Vector& x, const ToleranceConfig& tol = {});

  const Vector& point() const { return x_; }
  const Matrix& omega() const { return omega_; }
  const Vector& eta() const { return eta_; }
  double det() const { return det_; }
  const Vector& reeb() const { return reeb_; }

  // Z(f) = <df, Z>.
  double reeb_derivative(const Vector& df) const { return df.dot(reeb_); }
  Vector hamiltonian(const Vector& df) const;
  Vector evaluation(const Vector& df) const { return reeb_ + hamiltonian(df); }
  Vector gradient(const Vector& df) const;
  // omega(X_f, X_g), cross-checked against omega(grad f, grad g).
  double bracket(const Vector& df, const Vector& dg) const;
  // P with {f, g} = df^T P dg.
  Matrix poisson_tensor() const;
  // Euclidean operator norm of A^{-1}.
  double inverse_norm() const;

 private:
  Vector solve(const Vector& b) const;

  Vector x_;
  Matrix omega_;
  Vector eta_;
  Eigen::PartialPivLU<Matrix> lu_;  // of A^T
  double det_ = 0.0;
  Vector reeb_;
  ToleranceConfig tol_;
};

struct ValidationReport {
  std::size_t samples = 0;
  double max_d_omega = 0.0;
  double max_d_eta = 0.0;
  double min_abs_det = 0.0;
  Vector worst_det_point;
  bool closed_omega = false;
  bool closed_eta = false;
  bool nondegenerate = false;
  bool pass = false;
};

// Closedness of omega and eta and the volume condition at `samples` uniform
// random points of the domain box.
ValidationReport validate(const CosymplecticStructure& s, std::size_t samples, std::uint64_t seed = 0,
                          const ToleranceConfig& tol = {});

Vector reeb(const CosymplecticStructure& s, const Vector& x, const ToleranceConfig& tol = {});
Vector hamiltonian_field(const CosymplecticStructure& s, const ScalarField& f, const Vector& x,
                         const ToleranceConfig& tol = {});
Vector evaluation_field(const CosymplecticStructure& s, const ScalarField& f, const Vector& x,
                        const ToleranceConfig& tol = {});
Vector gradient_field(const CosymplecticStructure& s, const ScalarField& f, const Vector& x,
                      const ToleranceConfig& tol = {});
double poisson_bracket(const CosymplecticStructure& s, const ScalarField& f, const ScalarField& g,
                       const Vector& x, const ToleranceConfig& tol = {});

// The same fields as VectorField objects (difference Jacobians).
VectorField reeb_vector_field(const CosymplecticStructure& s, const ToleranceConfig& tol = {});
VectorField hamiltonian_vector_field(const CosymplecticStructure& s, const ScalarField& f,
                                     const ToleranceConfig& tol = {});
VectorField evaluation_vector_field(const CosymplecticStructure& s, const ScalarField& f,
                                    const ToleranceConfig& tol = {});

// x -> Z(f)(x).
ScalarField reeb_derivative_field(const CosymplecticStructure& s, const ScalarField& f,
                                  const ToleranceConfig& tol = {});
// x -> {f, g}(x). Assembled as an expression when the structure has constant
// coefficients and both arguments are expressions; numeric otherwise.
ScalarField bracket_field(const CosymplecticStructure& s, const ScalarField& f, const ScalarField& g,
                          const ToleranceConfig& tol = {});

// Canonical structure on (t, q_1..q_n, p_1..p_n): omega = sum dq_i ^ dp_i,
// eta = dt. Coordinate names are t,q,p for n = 1 and t,q1..qn,p1..pn otherwise.
ChartSpec canonical_chart(std::size_t n, bool periodic_time = false);
CosymplecticStructure make_canonical(std::size_t n, DomainBox box = {});
CosymplecticStructure make_canonical(const ChartSpec& chart, DomainBox box = {});
// omega' = -d alpha with alpha = p dq - H dt, eta = dt; alpha is stored as
// the primitive. The chart must be laid out as (t, q..., p...).
CosymplecticStructure make_poincare_cartan(const ChartSpec& chart, const Expr& H, DomainBox box = {});
// (omega + dH ^ eta, eta), assembled symbolically.
CosymplecticStructure twist(const CosymplecticStructure& s, const Expr& H);

}  // namespace cosym
