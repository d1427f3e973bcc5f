#pragma once

// Invariant tori of an integral system: period lattices of the commuting
// generators (X_{f_1}, ..., X_{f_r}, Z), action integrals of a primitive
// lambda, the matrix b = dI/df and the frequency systems.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cosym/flow.hpp"
#include "cosym/integrability.hpp"

namespace cosym {

// Angle coordinate phi = atan2(sin_expr, cos_expr) on a torus neighborhood.
struct AngleMap {
  std::string name;
  Expr cos_expr;
  Expr sin_expr;

  double value(const Vector& x) const;
};

class LatticeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ActionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FiberContinuationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AngleUnwrapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularFrequencyMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// X_{f_1}, ..., X_{f_r}, Z.
std::vector<VectorField> torus_generators(const IntegralSystem& sys);

// Rows of `basis` are lattice vectors T_mu: flowing sum_k T_mu,k V_k for unit
// time returns the base point.
struct PeriodLattice {
  Matrix basis;
  Vector base_point;
  double residual = 0.0;     // largest return residual over the rows
  Matrix windings;           // windings(mu, k): turns of angle k along cycle mu
  bool adapted = false;      // rows reordered so that windings is the identity
  std::string origin;        // "detected" or "supplied"
};

struct LatticeOptions {
  double horizon = 40.0;      // flow time searched along each direction
  double escape = 0.1;        // the orbit must leave this radius first
  double window = 0.05;       // returns closer than this become candidates
  std::size_t max_candidates = 6;
  IntegratorOptions integrator{1e-12};
  int newton_iterations = 30;
};

// Combined flow Phi^{sum_k T_k V_k}_1(x).
Vector lattice_flow(const std::vector<VectorField>& gens, const Vector& x, const Vector& T,
                    const IntegratorOptions& opts);

// Gauss-Newton on G(T) = Phi^{sum T_k V_k}_1(x0) - x0 starting from `guess`.
// Throws LatticeError if the return residual stays above lattice_return.
Vector polish_lattice_vector(const IntegralSystem& sys, const Vector& x0, const Vector& guess,
                             const LatticeOptions& opts = {});
// Polishes every row of `guess`.
PeriodLattice polish_lattice(const IntegralSystem& sys, const Vector& x0, const Matrix& guess,
                             const LatticeOptions& opts = {});

// Return search along a few combined directions, Newton polish of the
// candidates and reduction to a basis. Requires r + 1 = 2.
PeriodLattice detect_period_lattice(const IntegralSystem& sys, const Vector& x0, const LatticeOptions& opts = {});

// Integer turns of each angle map along each lattice row.
Matrix angle_windings(const IntegralSystem& sys, const PeriodLattice& lattice, const std::vector<AngleMap>& angles,
                      const LatticeOptions& opts = {});
// Changes basis so cycle mu winds once around angle mu and not around the
// others. Requires a unimodular winding matrix.
PeriodLattice adapt_to_angles(const IntegralSystem& sys, const PeriodLattice& lattice,
                              const std::vector<AngleMap>& angles, const LatticeOptions& opts = {});

struct ActionOptions {
  IntegratorOptions integrator{1e-12};
  bool check_path_independence = true;
  // Second base point Phi^{sum c_mu T_mu}_1(x0).
  std::vector<double> second_base{0.3, 0.45, 0.2, 0.35};
  std::size_t primitive_samples = 24;
};

struct ActionProfile {
  PeriodLattice lattice;
  Vector fiber;
  Vector actions;                // I_mu = (1/2 pi) \oint lambda
  Vector eta_periods;            // (1/2 pi) \oint eta
  Vector closure;                // return residual of each traced cycle
  double primitive_residual = 0.0;
  std::optional<Vector> second_base_point;
  std::optional<Vector> second_actions;
  double path_independence = 0.0;
};

// I_mu by 3-point Gauss-Legendre quadrature on each accepted step.
ActionProfile action_integrals(const IntegralSystem& sys, const PeriodLattice& lattice, const OneFormField& lambda,
                               const ActionOptions& opts = {});

// Minimal-norm Gauss-Newton projection onto the fiber f = c.
Vector project_to_fiber(const IntegralSystem& sys, const Vector& guess, const Vector& c);

struct FrequencyTable {
  Matrix b;                      // (r+1) x (r+1)
  double cond = 0.0;
  std::size_t redundancy_rank = 0;  // rank of the (r+1) x r block
  double eta_column_variance = 0.0; // across the base and neighboring fibers
  Matrix lattice_b;              // basis / 2 pi, independent route to b
  double lattice_mismatch = 0.0;
  double delta = 0.0;
  ActionProfile profile;         // at the base fiber
  Vector eval_coefficients;      // Y_H = sum c_k V_k at the base point
  double eval_fit_residual = 0.0;
};

struct FrequencyOptions {
  LatticeOptions lattice;
  ActionOptions actions;
  double delta_scale = 1e-4;     // dc = delta_scale * max(1, |c|)
  std::optional<Matrix> supplied_lattice;
};

// Lattice, actions and b at fiber c, b_{mu nu} by central differences of
// I_mu across c +- dc e_nu for nu < r, and the constant column from eta.
FrequencyTable b_matrix(const IntegralSystem& sys, const OneFormField& lambda, const std::vector<AngleMap>& angles,
                        const Vector& base_guess, const Vector& c, const FrequencyOptions& opts = {});

enum class FrequencyMode { Reeb, Evaluation, Hamiltonian };

// Solves b^T omega = rhs: e_{r+1} (Reeb), e_k (Hamiltonian, k is 1-based) or
// the coefficients of Y_H in the generator basis (evaluation).
Vector solve_frequencies(const FrequencyTable& table, FrequencyMode mode, std::size_t k = 0,
                         double cond_max = 1e8);

// Largest return residual of the generators d/d theta_mu = sum_nu b_{mu nu} V_nu
// after flowing for 2 pi.
Vector generator_period_residuals(const IntegralSystem& sys, const FrequencyTable& table,
                                  const IntegratorOptions& opts = IntegratorOptions{1e-12});

struct EmpiricalFrequencies {
  Vector slopes;
  Vector fit_residuals;       // max |phi - (a + omega tau)| per angle
  double max_residual = 0.0;
  bool linear = false;
  std::size_t samples = 0;
};

// Samples each angle along the flow every `dt`, unwraps and fits a line.
EmpiricalFrequencies empirical_frequencies(const VectorField& field, const ChartSpec& chart, const Vector& x0,
                                           const std::vector<AngleMap>& angles, double tau_end, double dt = 0.02,
                                           const IntegratorOptions& opts = IntegratorOptions{1e-11},
                                           double linear_fit = 1e-3);

// True when no p/q with q <= max_denominator lies within `tol` of `ratio`.
bool irrational_ratio(double ratio, int max_denominator = 100, double tol = 1e-5);

// min over crossings of `section` (tau <= tau_end) of the wrapped state
// distance to x0.
double min_return_distance(const VectorField& field, const ChartSpec& chart, const Vector& x0, const Section& section,
                           double tau_end, const IntegratorOptions& opts = IntegratorOptions{1e-10});

}  // namespace cosym
