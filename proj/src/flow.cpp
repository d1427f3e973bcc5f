#include "cosym/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace cosym {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double scaled_norm(const Vector& v, const Vector& y0, const Vector& y1, double tol) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double sc = tol * (1.0 + std::max(std::abs(y0[i]), std::abs(y1[i])));
    m = std::max(m, std::abs(v[i]) / sc);
  }
  return m;
}

double initial_step(const std::function<Vector(const Vector&)>& f, const Vector& y0, const Vector& f0,
                    double tol) {
  const double d0 = scaled_norm(y0, y0, y0, tol);
  const double d1 = scaled_norm(f0, y0, y0, tol);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  const Vector y1 = y0 + h0 * f0;
  const Vector f1 = f(y1);
  const double d2 = scaled_norm(f1 - f0, y0, y0, tol) / h0;
  const double dm = std::max(d1, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  return std::min(100.0 * h0, h1);
}

std::string format_point(const Vector& x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

using StepVisitor =
    std::function<void(double, const Vector&, const Vector&, double, const Vector&, const Vector&)>;

// Core loop over [0, span] for dy/ds = f(y).
void run(const std::function<Vector(const Vector&)>& f, const Vector& y_start, double span,
         const IntegratorOptions& opts, const StepVisitor& visit) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("integrator tolerance must be positive");
  if (!std::isfinite(span) || span < 0.0) throw std::invalid_argument("flow time must be finite");
  if (span == 0.0) return;
  Vector y = y_start;
  Vector k1 = f(y);
  double s = 0.0;
  double h = opts.initial_step > 0.0 ? opts.initial_step : initial_step(f, y, k1, opts.tol);
  if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
  bool last_rejected = false;
  std::size_t steps = 0;
  while (s < span) {
    if (++steps > opts.max_steps) throw StepUnderflow(y, s);
    const double remaining = span - s;
    bool final_step = false;
    if (h >= remaining) {
      h = remaining;
      final_step = true;
    }
    if (h < 1e-14 * std::max(1.0, std::abs(s))) throw StepUnderflow(y, s);
    const Vector k2 = f(y + h * (a21 * k1));
    const Vector k3 = f(y + h * (a31 * k1 + a32 * k2));
    const Vector k4 = f(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = f(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 = f(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = f(y_new);
    const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = scaled_norm(err, y, y_new, opts.tol);
    if (!std::isfinite(en)) throw StepUnderflow(y, s);
    if (en <= 1.0) {
      const double s_new = final_step ? span : s + h;
      visit(s, y, k1, s_new, y_new, k7);
      s = s_new;
      y = y_new;
      k1 = k7;  // first same as last
      double fac = en == 0.0 ? 5.0 : 0.9 * std::pow(en, -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h *= fac;
      last_rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      last_rejected = true;
    }
    if (opts.max_step > 0.0) h = std::min(h, opts.max_step);
  }
}

void hermite(double theta, double h, double& h00, double& h10, double& h01, double& h11) {
  const double t2 = theta * theta, t3 = t2 * theta;
  h00 = 2 * t3 - 3 * t2 + 1;
  h10 = (t3 - 2 * t2 + theta) * h;
  h01 = -2 * t3 + 3 * t2;
  h11 = (t3 - t2) * h;
}

void hermite_derivative(double theta, double h, double& d00, double& d10, double& d01, double& d11) {
  const double t2 = theta * theta;
  d00 = (6 * t2 - 6 * theta) / h;
  d10 = 3 * t2 - 4 * theta + 1;
  d01 = (-6 * t2 + 6 * theta) / h;
  d11 = 3 * t2 - 2 * theta;
}

}  // namespace

std::string FieldSpec::label() const {
  switch (kind) {
    case FieldKind::Reeb:
      return "reeb";
    case FieldKind::Hamiltonian:
      return "ham:" + function.name();
    case FieldKind::Evaluation:
      return "eval";
  }
  return "";
}

VectorField make_field(const CosymplecticStructure& s, const FieldSpec& spec, const ToleranceConfig& tol) {
  switch (spec.kind) {
    case FieldKind::Reeb:
      return reeb_vector_field(s, tol);
    case FieldKind::Hamiltonian:
      return hamiltonian_vector_field(s, spec.function, tol);
    case FieldKind::Evaluation:
      return evaluation_vector_field(s, spec.function, tol);
  }
  throw std::invalid_argument("unknown field kind");
}

VectorField combine(const std::vector<VectorField>& fields, const Vector& coefficients) {
  if (fields.size() != static_cast<std::size_t>(coefficients.size())) {
    throw std::invalid_argument("combine: one coefficient per field required");
  }
  VectorField w;
  w.value = [fields, coefficients](const Vector& x) {
    Vector sum = Vector::Zero(x.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const double ck = coefficients[static_cast<Eigen::Index>(k)];
      if (ck != 0.0) sum += ck * fields[k](x);
    }
    return sum;
  };
  return w;
}

StepUnderflow::StepUnderflow(Vector state, double tau)
    : std::runtime_error("integration step size underflow at tau = " + std::to_string(tau) + ", state " +
                         format_point(state)),
      state_(std::move(state)),
      tau_(tau) {}

Vector hermite_point(double s0, const Vector& x0, const Vector& dx0, double s1, const Vector& x1,
                     const Vector& dx1, double s) {
  const double h = s1 - s0;
  double a, b, c, d;
  hermite((s - s0) / h, h, a, b, c, d);
  return a * x0 + b * dx0 + c * x1 + d * dx1;
}

void Trajectory::push(double s, const Vector& x, const Vector& dx) {
  times_.push_back(s);
  states_.push_back(x);
  derivs_.push_back(dx);
}

std::size_t Trajectory::segment(double s) const {
  if (times_.size() < 2) return 0;
  auto it = std::upper_bound(times_.begin(), times_.end(), s);
  std::size_t k = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
  return std::min(k, times_.size() - 2);
}

Vector Trajectory::state_at(double s) const {
  if (times_.size() < 2) return states_.front();
  const std::size_t k = segment(s);
  const double h = times_[k + 1] - times_[k];
  double a, b, c, d;
  hermite((s - times_[k]) / h, h, a, b, c, d);
  return a * states_[k] + b * derivs_[k] + c * states_[k + 1] + d * derivs_[k + 1];
}

Vector Trajectory::derivative_at(double s) const {
  if (times_.size() < 2) return derivs_.front();
  const std::size_t k = segment(s);
  const double h = times_[k + 1] - times_[k];
  double a, b, c, d;
  hermite_derivative((s - times_[k]) / h, h, a, b, c, d);
  return a * states_[k] + b * derivs_[k] + c * states_[k + 1] + d * derivs_[k + 1];
}

void flow_steps(const VectorField& v, const Vector& x0, double tau_end, const IntegratorOptions& opts,
                const StepVisitor& visit) {
  run(v.value, x0, tau_end, opts, visit);
}

Trajectory integrate(const VectorField& v, const ChartSpec& chart, const Vector& x0, double tau_end,
                     const IntegratorOptions& opts, const std::vector<ScalarField>& integrals,
                     std::string label) {
  if (static_cast<std::size_t>(x0.size()) != chart.dim()) {
    throw std::invalid_argument("initial point dimension does not match the chart");
  }
  const int direction = tau_end < 0.0 ? -1 : 1;
  Trajectory traj(chart, std::move(label), direction);
  std::vector<std::string> names;
  for (const auto& f : integrals) names.push_back(f.name());
  traj.set_integrals(std::move(names));
  auto record = [&](const Vector& x) {
    Vector vals(static_cast<Eigen::Index>(integrals.size()));
    for (std::size_t i = 0; i < integrals.size(); ++i) vals[static_cast<Eigen::Index>(i)] = integrals[i].value(x);
    traj.push_integrals(std::move(vals));
  };
  std::function<Vector(const Vector&)> f = v.value;
  if (direction < 0) f = [g = v.value](const Vector& x) { Vector d = g(x); return Vector(-d); };
  const Vector dx0 = f(x0);
  traj.push(0.0, x0, dx0);
  record(x0);
  run(f, x0, std::abs(tau_end), opts,
      [&](double, const Vector&, const Vector&, double s1, const Vector& x1, const Vector& dx1) {
        traj.push(s1, x1, dx1);
        record(x1);
      });
  return traj;
}

Trajectory integrate(const CosymplecticStructure& s, const FieldSpec& field, const Vector& x0, double tau_end,
                     const IntegratorOptions& opts, const std::vector<ScalarField>& integrals,
                     const ToleranceConfig& tol) {
  return integrate(make_field(s, field, tol), s.chart, x0, tau_end, opts, integrals, field.label());
}

Vector flow(const VectorField& v, const Vector& x0, double tau_end, const IntegratorOptions& opts) {
  std::function<Vector(const Vector&)> f = v.value;
  if (tau_end < 0.0) f = [g = v.value](const Vector& x) { Vector d = g(x); return Vector(-d); };
  Vector end = x0;
  run(f, x0, std::abs(tau_end), opts,
      [&](double, const Vector&, const Vector&, double, const Vector& x1, const Vector&) { end = x1; });
  return end;
}

std::vector<double> drift_report(const Trajectory& traj) {
  const auto& vals = traj.integral_values();
  std::vector<double> drift(traj.integral_names().size(), 0.0);
  if (vals.empty()) return drift;
  for (const auto& row : vals) {
    for (std::size_t i = 0; i < drift.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      drift[i] = std::max(drift[i], std::abs(row[k] - vals.front()[k]));
    }
  }
  return drift;
}

std::vector<double> drift_report(const Trajectory& traj, const std::vector<ScalarField>& integrals) {
  std::vector<double> drift(integrals.size(), 0.0);
  if (traj.size() == 0) return drift;
  for (std::size_t i = 0; i < integrals.size(); ++i) {
    const double f0 = integrals[i].value(traj.front());
    for (const auto& x : traj.states()) drift[i] = std::max(drift[i], std::abs(integrals[i].value(x) - f0));
  }
  return drift;
}

std::vector<SectionEvent> section_crossings(const Trajectory& traj, const VectorField& v, const Section& sec) {
  std::vector<SectionEvent> events;
  const ChartSpec& chart = traj.chart();
  if (sec.coordinate >= chart.dim()) throw std::out_of_range("section coordinate out of range");
  if (traj.size() < 2) return events;
  const auto c = static_cast<Eigen::Index>(sec.coordinate);
  const bool periodic = chart.is_periodic(sec.coordinate);
  const auto& ts = traj.times();
  const auto& xs = traj.states();

  auto crosses = [&](double g0, double g1) {
    const bool up = g0 < 0.0 && g1 >= 0.0;
    const bool down = g0 > 0.0 && g1 <= 0.0;
    return sec.direction > 0 ? up : sec.direction < 0 ? down : (up || down);
  };

  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double y0 = xs[k][c], y1 = xs[k + 1][c];
    std::vector<double> levels;
    if (periodic) {
      const double lo = std::min(y0, y1), hi = std::max(y0, y1);
      const auto kmin = static_cast<long>(std::ceil((lo - sec.value) / kTwoPi));
      const auto kmax = static_cast<long>(std::floor((hi - sec.value) / kTwoPi));
      for (long j = kmin; j <= kmax; ++j) levels.push_back(sec.value + kTwoPi * static_cast<double>(j));
      if (y1 < y0) std::reverse(levels.begin(), levels.end());
    } else {
      levels.push_back(sec.value);
    }
    for (double level : levels) {
      const double g0 = y0 - level, g1 = y1 - level;
      if (!crosses(g0, g1)) continue;
      // bisection on the Hermite interpolant
      double a = ts[k], b = ts[k + 1];
      double ga = g0;
      for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, b); ++it) {
        const double m = 0.5 * (a + b);
        const double gm = traj.state_at(m)[c] - level;
        if ((ga < 0.0) == (gm < 0.0) && gm != 0.0) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      double s = 0.5 * (a + b);
      Vector x = traj.state_at(s);
      const double slope = traj.direction() * v(x)[c];
      if (slope != 0.0) {
        const double s_newton = s - (x[c] - level) / slope;
        if (s_newton >= ts[k] && s_newton <= ts[k + 1]) {
          s = s_newton;
          x = traj.state_at(s);
        }
      }
      SectionEvent ev;
      ev.tau = s;
      ev.state = x;
      ev.section_id = sec.id;
      ev.winding.assign(chart.dim(), 0);
      for (std::size_t i = 0; i < chart.dim(); ++i) {
        if (!chart.is_periodic(i)) continue;
        const auto ii = static_cast<Eigen::Index>(i);
        ev.winding[i] = static_cast<long>(std::floor(x[ii] / kTwoPi) - std::floor(xs[0][ii] / kTwoPi));
      }
      events.push_back(std::move(ev));
    }
  }
  return events;
}

void write_csv(std::ostream& out, const Trajectory& traj) {
  out << "tau";
  for (const auto& n : traj.chart().names()) out << ',' << n;
  for (const auto& n : traj.integral_names()) out << ',' << n;
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    put(traj.direction() * traj.times()[k]);
    const Vector x = traj.normalized_state(k);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      out << ',';
      put(x[i]);
    }
    if (k < traj.integral_values().size()) {
      const Vector& f = traj.integral_values()[k];
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        out << ',';
        put(f[i]);
      }
    }
    out << '\n';
  }
}

}  // namespace cosym
