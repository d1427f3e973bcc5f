#pragma once

// Adaptive Dormand-Prince 5(4) integration of the derived vector fields, with
// cubic Hermite dense output, integral drift records and section crossings.

#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosym/structure.hpp"

namespace cosym {

enum class FieldKind { Reeb, Hamiltonian, Evaluation };

// Which derived field to flow. `function` is ignored for the Reeb field.
struct FieldSpec {
  FieldKind kind = FieldKind::Reeb;
  ScalarField function;

  // "reeb", "ham:<name>" or "eval".
  std::string label() const;
};

VectorField make_field(const CosymplecticStructure& s, const FieldSpec& spec, const ToleranceConfig& tol = {});

// sum_k c_k V_k.
VectorField combine(const std::vector<VectorField>& fields, const Vector& coefficients);

struct IntegratorOptions {
  double tol = 1e-10;          // absolute and relative local error bound
  double initial_step = 0.0;   // 0 selects one automatically
  double max_step = 0.0;       // 0 means unbounded
  std::size_t max_steps = 5'000'000;
};

class StepUnderflow : public std::runtime_error {
 public:
  StepUnderflow(Vector state, double tau);
  const Vector& state() const { return state_; }
  double tau() const { return tau_; }

 private:
  Vector state_;
  double tau_;
};

// Accepted steps of one integration. Times are elapsed flow time, strictly
// increasing from 0; `direction` is -1 for a backward flow. States are kept
// unwrapped so windings stay exact; normalized_state() maps periodic
// coordinates into [0, 2*pi).
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(ChartSpec chart, std::string field_label, int direction)
      : chart_(std::move(chart)), label_(std::move(field_label)), direction_(direction) {}

  const ChartSpec& chart() const { return chart_; }
  const std::string& field_label() const { return label_; }
  int direction() const { return direction_; }

  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Vector>& states() const { return states_; }
  const std::vector<Vector>& derivatives() const { return derivs_; }
  Vector normalized_state(std::size_t i) const { return chart_.normalize(states_[i]); }
  double duration() const { return times_.empty() ? 0.0 : times_.back(); }
  const Vector& front() const { return states_.front(); }
  const Vector& back() const { return states_.back(); }

  // Hermite interpolant on the accepted step containing elapsed time s.
  Vector state_at(double s) const;
  Vector derivative_at(double s) const;
  // Index k of the step [times[k], times[k+1]] containing s.
  std::size_t segment(double s) const;

  const std::vector<std::string>& integral_names() const { return integral_names_; }
  // integral_values()[k][i] = f_i(states[k]).
  const std::vector<Vector>& integral_values() const { return integral_values_; }

  void push(double s, const Vector& x, const Vector& dx);
  void set_integrals(std::vector<std::string> names) { integral_names_ = std::move(names); }
  void push_integrals(Vector values) { integral_values_.push_back(std::move(values)); }

 private:
  ChartSpec chart_;
  std::string label_;
  int direction_ = 1;
  std::vector<double> times_;
  std::vector<Vector> states_;
  std::vector<Vector> derivs_;
  std::vector<std::string> integral_names_;
  std::vector<Vector> integral_values_;
};

// Integrates dx/dtau = V(x) from x0 for flow time tau_end (negative values
// integrate backwards). Integrals are evaluated at every accepted step.
Trajectory integrate(const VectorField& v, const ChartSpec& chart, const Vector& x0, double tau_end,
                     const IntegratorOptions& opts = {}, const std::vector<ScalarField>& integrals = {},
                     std::string label = "");
Trajectory integrate(const CosymplecticStructure& s, const FieldSpec& field, const Vector& x0, double tau_end,
                     const IntegratorOptions& opts = {}, const std::vector<ScalarField>& integrals = {},
                     const ToleranceConfig& tol = {});

// Endpoint of the flow, unwrapped, without storing the path.
Vector flow(const VectorField& v, const Vector& x0, double tau_end, const IntegratorOptions& opts = {});

// Calls visit(s0, x0, dx0, s1, x1, dx1) for every accepted step of a forward
// flow over [0, tau_end].
void flow_steps(const VectorField& v, const Vector& x0, double tau_end, const IntegratorOptions& opts,
                const std::function<void(double, const Vector&, const Vector&, double, const Vector&,
                                         const Vector&)>& visit);

// Cubic Hermite interpolant of one accepted step, evaluated at s in [s0, s1].
Vector hermite_point(double s0, const Vector& x0, const Vector& dx0, double s1, const Vector& x1,
                     const Vector& dx1, double s);

// max_k |f_i(x_k) - f_i(x_0)| for each recorded integral.
std::vector<double> drift_report(const Trajectory& traj);
// Same, evaluating the given functions on the stored states.
std::vector<double> drift_report(const Trajectory& traj, const std::vector<ScalarField>& integrals);

// Hyperplane x_coordinate = value. For a periodic coordinate every level
// value + 2*pi*k counts. direction: +1 upward, -1 downward, 0 either.
struct Section {
  std::size_t coordinate = 0;
  double value = 0.0;
  int direction = 0;
  std::string id;
};

struct SectionEvent {
  double tau = 0.0;           // elapsed flow time
  Vector state;               // unwrapped
  std::string section_id;
  std::vector<long> winding;  // full turns of each coordinate since x0 (0 if not periodic)
};

// Crossings strictly after the initial point, located by bisection on the
// dense output and one Newton polish with the field value.
std::vector<SectionEvent> section_crossings(const Trajectory& traj, const VectorField& v, const Section& section);

// Header: tau,<coordinate names>,<integral names>; one row per accepted step.
void write_csv(std::ostream& out, const Trajectory& traj);

}  // namespace cosym
