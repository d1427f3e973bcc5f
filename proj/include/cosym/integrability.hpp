#pragma once

// Numerical checks of the integrability hypotheses for an integral system
// (H; f_1..f_m) with commuting prefix f_1..f_r on a cosymplectic manifold.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cosym/structure.hpp"

namespace cosym {

struct IntegralSystem {
  CosymplecticStructure structure;
  ScalarField hamiltonian;
  std::vector<ScalarField> integrals;
  std::size_t r = 0;
  // Accept m + r != 2n, for deliberately incomplete or overcomplete sets.
  bool allow_incomplete = false;
  // Candidate Casimirs of the induced bracket, as functions on the chart.
  std::vector<ScalarField> casimirs;
  ToleranceConfig tol;

  std::size_t m() const { return integrals.size(); }
  // Throws std::invalid_argument unless 0 <= r <= m and, without the
  // override, 2n = m + r.
  void check_shape() const;
  Vector values(const Vector& x) const;
  // m x dim matrix of the differentials df_i.
  Matrix differentials(const Vector& x) const;
};

// Result of one check over a batch of points. `witness` names the worst
// offender; `witness_point` is where it occurred.
struct CheckReport {
  std::string name;
  bool pass = true;
  double max_residual = 0.0;
  double threshold = 0.0;
  std::size_t points = 0;
  std::string witness;
  std::optional<Vector> witness_point;
  std::vector<std::pair<std::string, double>> metrics;
  std::string note;
};

// Uniform points in the structure's domain box.
std::vector<Vector> sample_points(const IntegralSystem& sys, std::size_t count, std::uint64_t seed);

// |Z(f_i) + {f_i, H}| < first_integral.
CheckReport check_first_integrals(const IntegralSystem& sys, const std::vector<Vector>& points);
// |{f_i, f_j}| < commuting for i < r, all j.
CheckReport check_commuting_prefix(const IntegralSystem& sys, const std::vector<Vector>& points);

struct IndependenceReport {
  CheckReport check;
  std::vector<Vector> regular;   // points where both ranks are maximal
  std::vector<Vector> excluded;  // rank drops, kept out of M_reg
  std::vector<std::size_t> df_rank;
  std::vector<std::size_t> field_rank;
};
// rank(df_1..df_m) = m and rank(Y_H, X_{f_1}..X_{f_r}) = r + 1.
IndependenceReport check_independence(const IntegralSystem& sys, const std::vector<Vector>& points);

// [Y_H, X_{f_i}] = 0 and [X_{f_i}, X_{f_j}] = 0 for i, j < r.
CheckReport check_symmetry_algebra(const IntegralSystem& sys, const std::vector<Vector>& points);
// <df_j, V> = 0 for V in {Y_H, X_{f_1}..X_{f_r}} and every j.
CheckReport check_fiber_tangency(const IntegralSystem& sys, const std::vector<Vector>& points);
// {G_k, f_i} = 0 for every declared Casimir.
CheckReport check_casimirs(const IntegralSystem& sys, const std::vector<Vector>& points);

struct InducedBracket {
  std::vector<std::vector<Vector>> fibers;  // points grouped by fiber value
  std::vector<std::vector<Matrix>> a;       // a_ij(x) for each point
  std::vector<std::size_t> corank;          // per point, in fiber order
  double max_fiber_deviation = 0.0;         // closure residual
  std::size_t ddim = 0;
  std::size_t dind = 0;
  bool closure_ok = false;
  bool corank_ok = false;
  bool parity_ok = false;
  bool completeness_ok = false;
  bool pass = false;
};

// Groups `points` by fiber (|f(x) - f(y)|_inf < fiber_equal) and tests that
// a_ij = {f_i, f_j} is constant on each fiber and has corank r.
InducedBracket bracket_closure_and_corank(const IntegralSystem& sys, const std::vector<Vector>& points);

// Regular base points plus same-fiber companions generated by flowing along
// Y_H and X_{f_i}, i < r, for random times.
std::vector<Vector> sample_fiber_points(const IntegralSystem& sys, std::size_t fibers, std::size_t per_fiber,
                                        std::uint64_t seed);

class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// For each pair (i, j), g = {f_i, f_j} must satisfy |Z(g) + {g, H}| < lemma,
// derivatives of g by differences. Throws PreconditionError when f_i or f_j
// is not a first integral at the sampled points. Empty `pairs` means all
// pairs i < j.
CheckReport check_bracket_of_integrals_lemma(const IntegralSystem& sys,
                                             std::vector<std::pair<std::size_t, std::size_t>> pairs,
                                             const std::vector<Vector>& points);

struct VerifyReport {
  std::vector<CheckReport> checks;
  InducedBracket induced;
  std::size_t regular_points = 0;
  std::size_t excluded_points = 0;
  bool pass = false;
};

struct VerifyOptions {
  std::size_t points = 64;
  std::uint64_t seed = 0;
  std::size_t fibers = 8;
  std::size_t per_fiber = 3;
};

// The full chain in a fixed order.
VerifyReport verify_chain(const IntegralSystem& sys, const VerifyOptions& opts = {});

}  // namespace cosym
