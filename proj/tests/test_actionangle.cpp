#include <catch_amalgamated.hpp>

#include <cmath>

#include "cosym/actionangle.hpp"
#include "support.hpp"

using namespace cosym;
using cosym::testing::pt;

namespace {

DomainBox box3() { return DomainBox{{{0, kTwoPi}, {-1.5, 1.5}, {-1.5, 1.5}}}; }

ScalarField fn(const ChartSpec& c, const std::string& src) { return ScalarField(c.parse(src), src); }

// Extended oscillator: canonical structure, H = f_1 = (q^2 + p^2)/2, t periodic.
IntegralSystem ext_oscillator() {
  IntegralSystem sys;
  sys.structure = make_canonical(canonical_chart(1, true), box3());
  sys.hamiltonian = fn(sys.structure.chart, "(q^2 + p^2)/2");
  sys.integrals = {sys.hamiltonian};
  sys.r = 1;
  return sys;
}

// Poincare-Cartan structure of the same oscillator, flowing Z' only.
IntegralSystem pc_oscillator() {
  IntegralSystem sys;
  const ChartSpec c = canonical_chart(1, true);
  sys.structure = make_poincare_cartan(c, c.parse("(q^2 + p^2)/2"), box3());
  sys.hamiltonian = fn(c, "0");
  sys.integrals = {fn(c, "(q^2 + p^2)/2")};
  sys.r = 1;
  return sys;
}

std::vector<AngleMap> oscillator_angles(const ChartSpec& c) {
  return {AngleMap{"phi", c.parse("p"), c.parse("q")}, AngleMap{"t", c.parse("cos(t)"), c.parse("sin(t)")}};
}

OneFormField pdq(const ChartSpec& c) { return OneFormField({c.parse("0"), c.parse("p"), c.parse("0")}); }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("angle maps use atan2") {
  const ChartSpec c = canonical_chart(1, true);
  const AngleMap a{"phi", c.parse("p"), c.parse("q")};
  CHECK(a.value(pt({0, 1, 0})) == Catch::Approx(M_PI / 2));
  CHECK(a.value(pt({0, 0, -1})) == Catch::Approx(M_PI));
}

TEST_CASE("lattice polish converges from a rough guess") {
  const auto sys = ext_oscillator();
  const Vector x0 = pt({0.3, 0.0, 1.0});
  const Vector T = polish_lattice_vector(sys, x0, pt({6.2, 0.01}));
  CHECK(T[0] == Catch::Approx(kTwoPi).margin(1e-9));
  CHECK(std::abs(T[1]) < 1e-9);
}

TEST_CASE("polish rejects a guess far from any period") {
  const auto sys = ext_oscillator();
  LatticeOptions opts;
  opts.newton_iterations = 2;
  CHECK_THROWS_AS(polish_lattice_vector(sys, pt({0.3, 0.0, 1.0}), pt({3.1, 0.0}), opts), LatticeError);
}

TEST_CASE("detected lattice of the extended oscillator") {
  const auto sys = ext_oscillator();
  const Vector x0 = pt({0.0, 0.0, 1.0});
  const PeriodLattice lat = detect_period_lattice(sys, x0);
  CHECK(lat.origin == "detected");
  CHECK(lat.residual < 1e-9);
  CHECK(std::abs(std::abs(lat.basis.determinant()) - kTwoPi * kTwoPi) < 1e-7);
  const PeriodLattice adapted = adapt_to_angles(sys, lat, oscillator_angles(sys.structure.chart));
  CHECK(adapted.adapted);
  CHECK(max_abs(adapted.basis - kTwoPi * Matrix::Identity(2, 2)) < 1e-8);
  CHECK(max_abs(adapted.windings - Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("lattice detection needs a return within the horizon") {
  // Z = d/dt on a non-periodic time axis never returns.
  IntegralSystem sys = ext_oscillator();
  sys.structure = make_canonical(canonical_chart(1, false), box3());
  sys.hamiltonian = fn(sys.structure.chart, "(q^2 + p^2)/2");
  sys.integrals = {sys.hamiltonian};
  LatticeOptions opts;
  opts.horizon = 15;
  CHECK_THROWS_AS(detect_period_lattice(sys, pt({0, 0, 1}), opts), LatticeError);
}

TEST_CASE("windings reject a non-unimodular angle set") {
  const auto sys = ext_oscillator();
  const ChartSpec& c = sys.structure.chart;
  PeriodLattice lat = polish_lattice(sys, pt({0, 0, 1}), kTwoPi * Matrix::Identity(2, 2));
  // phi counted twice per turn
  const std::vector<AngleMap> doubled{AngleMap{"2phi", c.parse("p^2 - q^2"), c.parse("2*p*q")},
                                      AngleMap{"t", c.parse("cos(t)"), c.parse("sin(t)")}};
  CHECK_THROWS_AS(adapt_to_angles(sys, lat, doubled), LatticeError);
}

TEST_CASE("oscillator actions equal the fiber value") {
  const auto sys = ext_oscillator();
  for (double c : {0.25, 0.5, 1.0}) {
    const Vector x = project_to_fiber(sys, pt({0.0, 0.1, 0.9}), pt({c}));
    CHECK(sys.values(x)[0] == Catch::Approx(c).epsilon(1e-13));
    const PeriodLattice lat = polish_lattice(sys, x, kTwoPi * Matrix::Identity(2, 2));
    const ActionProfile p = action_integrals(sys, lat, pdq(sys.structure.chart));
    CHECK(p.actions[0] == Catch::Approx(c).epsilon(1e-9));
    CHECK(std::abs(p.actions[1]) < 1e-12);
    CHECK(std::abs(p.eta_periods[0]) < 1e-12);
    CHECK(p.eta_periods[1] == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(p.primitive_residual < 1e-12);
    REQUIRE(p.second_actions.has_value());
    CHECK(p.path_independence < 1e-9);
  }
}

TEST_CASE("a form that is not a primitive is rejected") {
  const auto sys = ext_oscillator();
  const ChartSpec& c = sys.structure.chart;
  const PeriodLattice lat = polish_lattice(sys, pt({0, 0, 1}), kTwoPi * Matrix::Identity(2, 2));
  const OneFormField wrong({c.parse("0"), c.parse("0"), c.parse("q")});  // -d = -dq^dp
  CHECK_THROWS_AS(action_integrals(sys, lat, wrong), ActionError);
}

TEST_CASE("b matrix, lattice cross-check and frequencies of the extended oscillator") {
  const auto sys = ext_oscillator();
  const FrequencyTable t =
      b_matrix(sys, pdq(sys.structure.chart), oscillator_angles(sys.structure.chart), pt({0, 0, 1}), pt({0.5}));
  CHECK(max_abs(t.b - Matrix::Identity(2, 2)) < 1e-6);
  CHECK(t.lattice_mismatch < 1e-6);
  CHECK(t.cond == Catch::Approx(1.0).epsilon(1e-5));
  CHECK(t.redundancy_rank == 1);
  CHECK(t.eta_column_variance < 1e-20);
  CHECK(t.eval_fit_residual < 1e-12);
  const Vector reeb = solve_frequencies(t, FrequencyMode::Reeb);
  const Vector eval = solve_frequencies(t, FrequencyMode::Evaluation);
  const Vector ham = solve_frequencies(t, FrequencyMode::Hamiltonian, 1);
  CHECK(std::abs(reeb[0]) < 1e-6);
  CHECK(reeb[1] == Catch::Approx(1.0).epsilon(1e-6));
  CHECK(eval[0] == Catch::Approx(1.0).epsilon(1e-6));
  CHECK(eval[1] == Catch::Approx(1.0).epsilon(1e-6));
  CHECK(ham[0] == Catch::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(ham[1]) < 1e-6);
  CHECK_THROWS_AS(solve_frequencies(t, FrequencyMode::Hamiltonian, 2), std::invalid_argument);
  CHECK(generator_period_residuals(sys, t).maxCoeff() < 1e-6);
}

TEST_CASE("Poincare-Cartan oscillator frequencies") {
  const auto sys = pc_oscillator();
  const ChartSpec& c = sys.structure.chart;
  const FrequencyTable t = b_matrix(sys, *sys.structure.primitive, oscillator_angles(c), pt({0, 0, 1}), pt({0.5}));
  Matrix expected(2, 2);
  expected << 1, 0, -1, 1;
  CHECK(max_abs(t.b - expected) < 1e-6);
  CHECK(t.lattice_mismatch < 1e-6);
  CHECK(t.profile.actions[0] == Catch::Approx(0.5).epsilon(1e-9));
  CHECK(t.profile.actions[1] == Catch::Approx(-0.5).epsilon(1e-9));
  const Vector reeb = solve_frequencies(t, FrequencyMode::Reeb);
  CHECK(reeb[0] == Catch::Approx(1.0).epsilon(1e-6));
  CHECK(reeb[1] == Catch::Approx(1.0).epsilon(1e-6));
  const EmpiricalFrequencies emp =
      empirical_frequencies(reeb_vector_field(sys.structure), c, t.profile.lattice.base_point, oscillator_angles(c), 30);
  CHECK(emp.linear);
  CHECK(emp.slopes[0] == Catch::Approx(reeb[0]).epsilon(1e-6));
  CHECK(emp.slopes[1] == Catch::Approx(reeb[1]).epsilon(1e-6));
}

TEST_CASE("singular frequency matrix is reported") {
  FrequencyTable t;
  t.b = Matrix::Zero(2, 2);
  t.cond = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_frequencies(t, FrequencyMode::Reeb), SingularFrequencyMatrix);
}

TEST_CASE("fiber projection fails away from the image") {
  const auto sys = ext_oscillator();
  CHECK_THROWS_AS(project_to_fiber(sys, pt({0, 0.2, 0.3}), pt({-1.0})), FiberContinuationError);
}

TEST_CASE("coarse sampling triggers an unwrap error") {
  const auto sys = ext_oscillator();
  const ChartSpec& c = sys.structure.chart;
  CHECK_THROWS_AS(empirical_frequencies(reeb_vector_field(sys.structure), c, pt({0, 0, 1}), oscillator_angles(c), 10,
                                        2.0),
                  AngleUnwrapError);
}

TEST_CASE("empirical frequencies of the evaluation flow") {
  const auto sys = ext_oscillator();
  const ChartSpec& c = sys.structure.chart;
  const auto emp = empirical_frequencies(evaluation_vector_field(sys.structure, sys.hamiltonian), c, pt({0, 0, 1}),
                                         oscillator_angles(c), 40);
  CHECK(emp.linear);
  CHECK(emp.slopes[0] == Catch::Approx(1.0).epsilon(1e-8));
  CHECK(emp.slopes[1] == Catch::Approx(1.0).epsilon(1e-8));
  CHECK(emp.samples == 2001);
}

TEST_CASE("rational ratio detection") {
  CHECK_FALSE(irrational_ratio(1.0));
  CHECK_FALSE(irrational_ratio(3.0 / 7.0));
  CHECK(irrational_ratio(std::sqrt(2.0)));
  CHECK(irrational_ratio(M_PI));
}

TEST_CASE("minimum return distance of a periodic orbit") {
  const auto sys = ext_oscillator();
  const Section sec{0, 0.0, 1, "t0"};
  const double d = min_return_distance(evaluation_vector_field(sys.structure, sys.hamiltonian), sys.structure.chart,
                                       pt({0, 0, 1}), sec, 20);
  CHECK(d < 1e-8);
}

TEST_CASE("rescaled oscillator has action c / sqrt 2") {
  IntegralSystem sys = ext_oscillator();
  const ChartSpec& c = sys.structure.chart;
  sys.hamiltonian = fn(c, "(p^2 + 2*q^2)/2");
  sys.integrals = {sys.hamiltonian};
  const std::vector<AngleMap> angles = {AngleMap{"phi", c.parse("p"), c.parse("sqrt(2)*q")},
                                        AngleMap{"t", c.parse("cos(t)"), c.parse("sin(t)")}};
  const FrequencyTable t = b_matrix(sys, pdq(c), angles, pt({0, 0, 1}), pt({0.5}));
  CHECK(t.profile.actions[0] == Catch::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-9));
  CHECK(t.b(0, 0) == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(std::abs(t.b(0, 1)) < 1e-6);
  CHECK(t.b(1, 1) == Catch::Approx(1.0).epsilon(1e-6));
  const Vector ham = solve_frequencies(t, FrequencyMode::Hamiltonian, 1);
  CHECK(ham[0] == Catch::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("Poincare-Cartan actions match a trapezoid sum on explicit loops") {
  const auto sys = pc_oscillator();
  const FrequencyTable t =
      b_matrix(sys, *sys.structure.primitive, oscillator_angles(sys.structure.chart), pt({0, 0, 1}), pt({0.5}));
  // lambda = p dq - H dt on the circle (t0, sin s, cos s) and the segment (t0 + s, 0, 1)
  const int n = 1000000;
  const double h = kTwoPi / n;
  double circle = 0.0, segment = 0.0;
  for (int k = 0; k < n; ++k) {
    const double s = k * h;
    circle += std::cos(s) * std::cos(s) * h;  // p dq/ds
    segment += -0.5 * h;                      // -H dt/ds
  }
  CHECK(t.profile.actions[0] == Catch::Approx(circle / kTwoPi).epsilon(1e-9));
  CHECK(t.profile.actions[1] == Catch::Approx(segment / kTwoPi).epsilon(1e-9));
}

TEST_CASE("actions are stable under a halved integrator tolerance") {
  const auto sys = ext_oscillator();
  const PeriodLattice lat = polish_lattice(sys, pt({0, 0.2, 0.7}), kTwoPi * Matrix::Identity(2, 2));
  ActionOptions coarse, fine;
  coarse.integrator.tol = 1e-10;
  fine.integrator.tol = 5e-11;
  const Vector a = action_integrals(sys, lat, pdq(sys.structure.chart), coarse).actions;
  const Vector b = action_integrals(sys, lat, pdq(sys.structure.chart), fine).actions;
  CHECK(max_abs(a - b) < 1e-6);
}
