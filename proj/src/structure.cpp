#include "cosym/structure.hpp"

#include <cmath>
#include <sstream>

#include "cosym/parallel.hpp"

namespace cosym {

namespace {

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::string format_point(const Vector& x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

DegenerateStructure::DegenerateStructure(Vector point, double det)
    : std::runtime_error("cosymplectic structure is degenerate at " + format_point(point) +
                         " (|det(Omega + eta eta^T)| = " + std::to_string(std::abs(det)) + ")"),
      point_(std::move(point)),
      det_(det) {}

ScalarField::ScalarField(Expr e, std::string name) : expr_(std::move(e)), name_(std::move(name)) {}

ScalarField ScalarField::numeric(std::string name, std::function<double(const Vector&)> fn) {
  ScalarField f;
  f.expr_.reset();
  f.fn_ = std::move(fn);
  f.name_ = std::move(name);
  return f;
}

double ScalarField::value(const Vector& x) const {
  return expr_ ? expr_->eval(as_span(x)) : fn_(x);
}

Vector ScalarField::gradient(const Vector& x) const {
  if (!expr_) return gradient_fd(fn_, x);
  if (expr_->is_constant()) return Vector::Zero(x.size());
  const Jet1 j = expr_->eval_jet1(as_span(x));
  return Eigen::Map<const Vector>(j.grad.data(), ix(j.grad.size()));
}

PointFrame::PointFrame(const CosymplecticStructure& s, const Vector& x, const ToleranceConfig& tol)
    : x_(x), omega_(s.omega.value(x)), eta_(s.eta.value(x)), tol_(tol) {
  const Matrix At = -omega_ + eta_ * eta_.transpose();
  lu_.compute(At);
  det_ = lu_.determinant();
  if (!(std::abs(det_) >= tol.volume_det)) throw DegenerateStructure(x, det_);
  reeb_ = solve(eta_);
  const double scale = std::max(1.0, max_abs(omega_) * max_abs(reeb_));
  const double r1 = max_abs(Vector(omega_.transpose() * reeb_));
  const double r2 = std::abs(eta_.dot(reeb_) - 1.0);
  if (r1 > tol.reeb_residual * scale || r2 > tol.reeb_residual) {
    throw ResidualError("Reeb field fails i_Z omega = 0, eta(Z) = 1 at " + format_point(x));
  }
}

Vector PointFrame::solve(const Vector& b) const { return lu_.solve(b); }

Vector PointFrame::hamiltonian(const Vector& df) const {
  const Vector b = df - reeb_derivative(df) * eta_;
  const Vector v = solve(b);
  const double scale = std::max(1.0, max_abs(omega_) * max_abs(v) + max_abs(b));
  if (std::abs(eta_.dot(v)) > tol_.eta_pairing * std::max(1.0, max_abs(v)) ||
      max_abs(Vector(omega_.transpose() * v - b)) > tol_.field_residual * scale) {
    throw ResidualError("Hamiltonian field fails its defining conditions at " + format_point(x_));
  }
  return v;
}

Vector PointFrame::gradient(const Vector& df) const {
  const double zf = reeb_derivative(df);
  const Vector g = hamiltonian(df) + zf * reeb_;
  const Vector b = df - zf * eta_;
  const double scale = std::max(1.0, max_abs(omega_) * max_abs(g) + max_abs(b));
  if (max_abs(Vector(omega_.transpose() * g - b)) > tol_.field_residual * scale ||
      std::abs(eta_.dot(g) - zf) > tol_.field_residual * std::max(1.0, std::abs(zf))) {
    throw ResidualError("gradient field fails its defining conditions at " + format_point(x_));
  }
  return g;
}

double PointFrame::bracket(const Vector& df, const Vector& dg) const {
  const Vector xf = hamiltonian(df);
  const Vector xg = hamiltonian(dg);
  const double via_fields = xf.dot(omega_ * xg);
  const Vector gf = xf + reeb_derivative(df) * reeb_;
  const Vector gg = xg + reeb_derivative(dg) * reeb_;
  const double via_gradients = gf.dot(omega_ * gg);
  const double scale = std::max({1.0, std::abs(via_fields), max_abs(omega_) * max_abs(gf) * max_abs(gg)});
  if (std::abs(via_fields - via_gradients) > tol_.bracket_agreement * scale) {
    throw ResidualError("Poisson bracket routes disagree at " + format_point(x_));
  }
  return via_fields;
}

Matrix PointFrame::poisson_tensor() const {
  const auto n = x_.size();
  const Matrix projector = Matrix::Identity(n, n) - eta_ * reeb_.transpose();
  Matrix M(n, n);  // columns A^{-T} e_k
  for (Eigen::Index k = 0; k < n; ++k) M.col(k) = solve(Vector::Unit(n, k));
  const Matrix MP = M * projector;
  return MP.transpose() * omega_ * MP;
}

double PointFrame::inverse_norm() const {
  const Matrix A = omega_ + eta_ * eta_.transpose();
  Eigen::JacobiSVD<Matrix> svd(A);
  return 1.0 / svd.singularValues().tail(1)(0);
}

ValidationReport validate(const CosymplecticStructure& s, std::size_t samples, std::uint64_t seed,
                          const ToleranceConfig& tol) {
  if (s.box.empty()) throw std::invalid_argument("validate: domain box is empty");
  if (s.omega.dim() != s.dim() || s.eta.dim() != s.dim()) {
    throw std::invalid_argument("validate: form dimensions do not match the chart");
  }
  PointSampler sampler(seed);
  const std::vector<Vector> pts = sampler.sample(s.box, samples);
  std::vector<double> d_omega(samples), d_eta(samples), det(samples);
  parallel_for(samples, [&](std::size_t k) {
    const Vector& x = pts[k];
    try {
      d_omega[k] = exterior_derivative(s.omega, x).max_abs();
      d_eta[k] = max_abs(exterior_derivative(s.eta, x));
      const Vector eta = s.eta.value(x);
      det[k] = (s.omega.value(x) + eta * eta.transpose()).determinant();
    } catch (const DomainError& e) {
      throw DomainError(e.subexpression(), std::string(e.what()) + " at sample point " + format_point(x));
    }
  });
  ValidationReport r;
  r.samples = samples;
  r.min_abs_det = samples ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    r.max_d_omega = std::max(r.max_d_omega, d_omega[k]);
    r.max_d_eta = std::max(r.max_d_eta, d_eta[k]);
    if (std::abs(det[k]) < r.min_abs_det) {
      r.min_abs_det = std::abs(det[k]);
      r.worst_det_point = pts[k];
    }
  }
  r.closed_omega = r.max_d_omega < tol.closed;
  r.closed_eta = r.max_d_eta < tol.closed;
  r.nondegenerate = samples > 0 && r.min_abs_det > tol.volume_det;
  r.pass = r.closed_omega && r.closed_eta && r.nondegenerate;
  return r;
}

Vector reeb(const CosymplecticStructure& s, const Vector& x, const ToleranceConfig& tol) {
  return PointFrame(s, x, tol).reeb();
}

Vector hamiltonian_field(const CosymplecticStructure& s, const ScalarField& f, const Vector& x,
                         const ToleranceConfig& tol) {
  return PointFrame(s, x, tol).hamiltonian(f.gradient(x));
}

Vector evaluation_field(const CosymplecticStructure& s, const ScalarField& f, const Vector& x,
                        const ToleranceConfig& tol) {
  PointFrame frame(s, x, tol);
  const Vector y = frame.evaluation(f.gradient(x));
  if (std::abs(frame.eta().dot(y) - 1.0) > tol.eta_pairing) {
    throw ResidualError("evaluation field fails eta(Y_f) = 1");
  }
  return y;
}

Vector gradient_field(const CosymplecticStructure& s, const ScalarField& f, const Vector& x,
                      const ToleranceConfig& tol) {
  return PointFrame(s, x, tol).gradient(f.gradient(x));
}

double poisson_bracket(const CosymplecticStructure& s, const ScalarField& f, const ScalarField& g,
                       const Vector& x, const ToleranceConfig& tol) {
  return PointFrame(s, x, tol).bracket(f.gradient(x), g.gradient(x));
}

VectorField reeb_vector_field(const CosymplecticStructure& s, const ToleranceConfig& tol) {
  VectorField v;
  v.value = [s, tol](const Vector& x) { return reeb(s, x, tol); };
  return v;
}

VectorField hamiltonian_vector_field(const CosymplecticStructure& s, const ScalarField& f,
                                     const ToleranceConfig& tol) {
  VectorField v;
  v.value = [s, f, tol](const Vector& x) { return hamiltonian_field(s, f, x, tol); };
  return v;
}

VectorField evaluation_vector_field(const CosymplecticStructure& s, const ScalarField& f,
                                    const ToleranceConfig& tol) {
  VectorField v;
  v.value = [s, f, tol](const Vector& x) { return evaluation_field(s, f, x, tol); };
  return v;
}

ScalarField reeb_derivative_field(const CosymplecticStructure& s, const ScalarField& f,
                                  const ToleranceConfig& tol) {
  return ScalarField::numeric("Z(" + f.name() + ")", [s, f, tol](const Vector& x) {
    return PointFrame(s, x, tol).reeb_derivative(f.gradient(x));
  });
}

ScalarField bracket_field(const CosymplecticStructure& s, const ScalarField& f, const ScalarField& g,
                          const ToleranceConfig& tol) {
  const std::string name = "{" + f.name() + "," + g.name() + "}";
  if (s.is_constant() && f.expr() && g.expr()) {
    Vector x0(ix(s.dim()));
    for (std::size_t i = 0; i < s.dim(); ++i) {
      const auto& b = s.box.bounds.size() == s.dim() ? s.box.bounds[i] : std::pair{0.0, 0.0};
      x0[ix(i)] = 0.5 * (b.first + b.second);
    }
    const Matrix P = PointFrame(s, x0, tol).poisson_tensor();
    Expr sum;
    for (std::size_t i = 0; i < s.dim(); ++i) {
      const Expr fi = derivative(*f.expr(), i);
      if (fi.is_zero()) continue;
      for (std::size_t j = 0; j < s.dim(); ++j) {
        const double pij = P(ix(i), ix(j));
        if (pij == 0.0) continue;
        const Expr gj = derivative(*g.expr(), j);
        if (gj.is_zero()) continue;
        sum = sum + number(pij) * fi * gj;
      }
    }
    return ScalarField(sum, name);
  }
  return ScalarField::numeric(name, [s, f, g, tol](const Vector& x) { return poisson_bracket(s, f, g, x, tol); });
}

ChartSpec canonical_chart(std::size_t n, bool periodic_time) {
  std::vector<std::string> names{"t"};
  if (n == 1) {
    names.push_back("q");
    names.push_back("p");
  } else {
    for (std::size_t i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
    for (std::size_t i = 1; i <= n; ++i) names.push_back("p" + std::to_string(i));
  }
  std::vector<bool> periodic(2 * n + 1, false);
  periodic[0] = periodic_time;
  return ChartSpec(std::move(names), std::move(periodic));
}

namespace {

DomainBox default_box(const ChartSpec& chart) {
  DomainBox box;
  for (std::size_t i = 0; i < chart.dim(); ++i) {
    box.bounds.push_back(chart.is_periodic(i) ? std::pair{0.0, kTwoPi} : std::pair{-1.0, 1.0});
  }
  return box;
}

OneFormField dt_form(std::size_t dim) {
  std::vector<Expr> c(dim);
  c[0] = Expr::constant(1.0);
  return OneFormField(std::move(c));
}

}  // namespace

CosymplecticStructure make_canonical(std::size_t n, DomainBox box) {
  return make_canonical(canonical_chart(n), std::move(box));
}

CosymplecticStructure make_canonical(const ChartSpec& chart, DomainBox box) {
  const std::size_t n = chart.half_dim();
  CosymplecticStructure s;
  s.chart = chart;
  s.omega = TwoFormField(chart.dim());
  for (std::size_t i = 1; i <= n; ++i) s.omega.set(i, i + n, Expr::constant(1.0));
  s.eta = dt_form(chart.dim());
  s.box = box.bounds.empty() ? default_box(chart) : std::move(box);
  // lambda = sum p_i dq_i
  std::vector<Expr> lambda(chart.dim());
  for (std::size_t i = 1; i <= n; ++i) lambda[i] = Expr::variable(i + n, chart.names()[i + n]);
  s.primitive = OneFormField(std::move(lambda));
  return s;
}

CosymplecticStructure make_poincare_cartan(const ChartSpec& chart, const Expr& H, DomainBox box) {
  const std::size_t n = chart.half_dim();
  std::vector<Expr> alpha(chart.dim());
  alpha[0] = -H;
  for (std::size_t i = 1; i <= n; ++i) alpha[i] = Expr::variable(i + n, chart.names()[i + n]);
  const OneFormField a(std::move(alpha));
  CosymplecticStructure s;
  s.chart = chart;
  s.omega = -exterior_derivative(a);
  s.eta = dt_form(chart.dim());
  s.box = box.bounds.empty() ? default_box(chart) : std::move(box);
  s.primitive = a;
  return s;
}

CosymplecticStructure twist(const CosymplecticStructure& s, const Expr& H) {
  CosymplecticStructure t = s;
  t.omega = s.omega + wedge(differential(H, s.dim()), s.eta);
  if (s.primitive) {
    // -d(lambda - H eta) = omega + dH ^ eta because eta is closed
    std::vector<Expr> c;
    for (std::size_t i = 0; i < s.dim(); ++i) c.push_back((*s.primitive)[i] - H * s.eta[i]);
    t.primitive = OneFormField(std::move(c));
  }
  return t;
}

}  // namespace cosym
