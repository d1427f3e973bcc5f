#include <catch_amalgamated.hpp>

#include "cosym/structure.hpp"
#include "support.hpp"

using namespace cosym;
using cosym::testing::pt;
using cosym::testing::random_polynomial;

namespace {

DomainBox box3() { return DomainBox{{{-1, 1}, {-1.5, 1.5}, {-1.5, 1.5}}}; }

CosymplecticStructure canonical() { return make_canonical(1, box3()); }

CosymplecticStructure poincare_cartan() {
  const ChartSpec c = canonical_chart(1);
  return make_poincare_cartan(c, c.parse("(q^2 + p^2)/2"), box3());
}

ScalarField fn(const CosymplecticStructure& s, const std::string& src) { return ScalarField(s.chart.parse(src), src); }

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("validate canonical and twisted structures") {
  const ValidationReport a = validate(canonical(), 50);
  CHECK(a.pass);
  CHECK(a.max_d_omega == 0.0);
  CHECK(validate(poincare_cartan(), 50).pass);
  CHECK(validate(make_canonical(1), 10).pass);
}

TEST_CASE("validate detects a non-closed eta") {
  CosymplecticStructure s = canonical();
  s.eta = OneFormField({s.chart.parse("q"), Expr(), Expr()});
  const ValidationReport r = validate(s, 50);
  CHECK_FALSE(r.pass);
  CHECK_FALSE(r.closed_eta);
  CHECK(r.max_d_eta == Catch::Approx(1.0));
}

TEST_CASE("validate detects degeneracy") {
  CosymplecticStructure s = canonical();
  s.omega = TwoFormField(3);
  const ValidationReport r = validate(s, 10);
  CHECK_FALSE(r.nondegenerate);
  CHECK_THROWS_AS(PointFrame(s, pt({0, 0, 0})), DegenerateStructure);
}

TEST_CASE("Reeb fields") {
  CHECK(reeb(canonical(), pt({0.3, 0.2, -0.1})) == pt({1, 0, 0}));
  const Vector z = reeb(poincare_cartan(), pt({0, 1, 0}));
  CHECK(max_abs(z - pt({1, 0, -1})) < 1e-14);
  PointSampler sampler(3);
  for (int k = 0; k < 20; ++k) {
    const Vector x = sampler.sample(box3());
    CHECK(std::abs(poincare_cartan().eta.value(x).dot(reeb(poincare_cartan(), x)) - 1.0) < 1e-12);
  }
}

TEST_CASE("Hamiltonian fields in canonical coordinates") {
  const auto s = canonical();
  CHECK(hamiltonian_field(s, fn(s, "q"), pt({0.2, 0.5, 0.5})) == pt({0, 0, -1}));
  CHECK(hamiltonian_field(s, fn(s, "t"), pt({0.2, 0.5, 0.5})).isZero());
  CHECK(max_abs(hamiltonian_field(s, fn(s, "(q^2 + p^2)/2"), pt({0, 1, 0})) - pt({0, 0, -1})) < 1e-15);
  CHECK(hamiltonian_field(s, fn(s, "p"), pt({0, 0, 0})) == pt({0, 1, 0}));
}

TEST_CASE("evaluation and gradient fields") {
  const auto s = canonical();
  CHECK(max_abs(evaluation_field(s, fn(s, "(q^2 + p^2)/2"), pt({0, 1, 0})) - pt({1, 0, -1})) < 1e-15);
  CHECK(evaluation_field(s, fn(s, "3"), pt({0.1, 0.2, 0.3})) == reeb(s, pt({0.1, 0.2, 0.3})));
  CHECK(gradient_field(s, fn(s, "t"), pt({0.4, 0.1, 0.1})) == pt({1, 0, 0}));
  CHECK(gradient_field(s, fn(s, "2.5"), pt({0.4, 0.1, 0.1})).isZero());
  CHECK(gradient_field(s, fn(s, "q"), pt({0.4, 0.1, 0.1})) == pt({0, 0, -1}));
}

TEST_CASE("Poisson brackets") {
  const auto s = canonical();
  const Vector x = pt({0.3, 0.7, -0.2});
  CHECK(poisson_bracket(s, fn(s, "q"), fn(s, "p"), x) == 1.0);
  CHECK(poisson_bracket(s, fn(s, "q*p^2"), fn(s, "q*p^2"), x) == 0.0);
  CHECK(poisson_bracket(s, fn(s, "t"), fn(s, "sin(q)*p + t"), x) == 0.0);
  // {f, g} = f_q g_p - f_p g_q
  const double expected = x[2] * x[2] * std::cos(x[2]);
  CHECK(poisson_bracket(s, fn(s, "q*p^2"), fn(s, "sin(p)"), x) == Catch::Approx(expected));
}

TEST_CASE("first-integral example residual") {
  const auto s = canonical();
  const Vector x = pt({0, 1, 1});
  PointFrame frame(s, x);
  const ScalarField q = fn(s, "q"), H = fn(s, "(q^2 + p^2)/2");
  CHECK(std::abs(frame.reeb_derivative(q.gradient(x)) + frame.bracket(q.gradient(x), H.gradient(x))) ==
        Catch::Approx(1.0));
}

TEST_CASE("Poincare-Cartan primitive") {
  const auto s = poincare_cartan();
  REQUIRE(s.primitive);
  PointSampler sampler(9);
  for (int k = 0; k < 50; ++k) {
    const Vector x = sampler.sample(s.box);
    const Matrix minus_dalpha = -exterior_derivative(*s.primitive, x);
    CHECK((minus_dalpha - s.omega.value(x)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("twist reproduces the Poincare-Cartan structure") {
  const auto c = canonical();
  const Expr H = c.chart.parse("(q^2 + p^2)/2");
  const auto t = twist(c, H);
  const auto pc = poincare_cartan();
  CHECK(validate(t, 20).pass);
  PointSampler sampler(4);
  for (int k = 0; k < 20; ++k) {
    const Vector x = sampler.sample(c.box);
    CHECK((t.omega.value(x) - pc.omega.value(x)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(t.eta.value(x) == pc.eta.value(x));
    CHECK((t.primitive->value(x) - pc.primitive->value(x)).cwiseAbs().maxCoeff() < 1e-15);
  }
  const auto same = twist(c, Expr());
  CHECK(same.omega.entries() == c.omega.entries());
}

TEST_CASE("twisted Reeb field is the evaluation field and brackets coincide") {
  const auto s = canonical();
  const Expr Hx = s.chart.parse("(q^2 + p^2)/2");
  const ScalarField H(Hx, "H");
  const auto t = twist(s, Hx);
  PointSampler sampler(21);
  std::mt19937_64 rng(21);
  for (int k = 0; k < 20; ++k) {
    const Vector x = sampler.sample(s.box);
    CHECK(max_abs(reeb(t, x) - evaluation_field(s, H, x)) < 1e-9);
  }
  for (int pair = 0; pair < 10; ++pair) {
    const ScalarField f(random_polynomial(s.chart, rng)), g(random_polynomial(s.chart, rng));
    for (int k = 0; k < 20; ++k) {
      const Vector x = sampler.sample(s.box);
      CHECK(std::abs(poisson_bracket(s, f, g, x) - poisson_bracket(t, f, g, x)) < 1e-8);
    }
  }
}

TEST_CASE("identities r1 through r4, Jacobi and Leibniz") {
  const ChartSpec c2 = canonical_chart(2);
  DomainBox box5{{{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}};
  const auto ext2 = make_poincare_cartan(c2, c2.parse("(p1^2 + p2^2)/2 + q1^2*q2/3 + t*q1"), box5);
  for (const auto& s : {canonical(), poincare_cartan(), ext2}) {
    std::mt19937_64 rng(17);
    PointSampler sampler(17);
    for (int k = 0; k < 15; ++k) {
      const ScalarField f(random_polynomial(s.chart, rng)), g(random_polynomial(s.chart, rng)),
          h(random_polynomial(s.chart, rng));
      const Vector x = sampler.sample(s.box);
      PointFrame frame(s, x);
      const Vector df = f.gradient(x);
      const Vector dg = g.gradient(x), dh = h.gradient(x);

      // (r1) i_{X_f} omega = i_{grad f} omega
      const Vector r1 = frame.omega().transpose() * (frame.hamiltonian(df) - frame.gradient(df));
      CHECK(max_abs(r1) < 1e-8);

      // (r3) X_{f,g} = -[X_f, X_g]
      const ScalarField fg = bracket_field(s, f, g);
      const Vector lhs = hamiltonian_field(s, fg, x);
      const Vector rhs = -lie_bracket(hamiltonian_vector_field(s, f), hamiltonian_vector_field(s, g), x);
      CHECK(max_abs(lhs - rhs) < 1e-5 * std::max(1.0, max_abs(lhs)));

      // (r4) [Z, X_f] = X_{Z(f)}
      const Vector r4 = lie_bracket(reeb_vector_field(s), hamiltonian_vector_field(s, f), x) -
                        hamiltonian_field(s, reeb_derivative_field(s, f), x);
      CHECK(max_abs(r4) < 1e-5);

      // Jacobi
      const ScalarField gh = bracket_field(s, g, h), hf = bracket_field(s, h, f);
      const double jac = poisson_bracket(s, f, gh, x) + poisson_bracket(s, g, hf, x) +
                         poisson_bracket(s, h, fg, x);
      CHECK(std::abs(jac) < 1e-7);

      // Leibniz {f, gh} = g{f,h} + h{f,g}
      const ScalarField prod(*g.expr() * *h.expr());
      const double lb = frame.bracket(df, prod.gradient(x)) -
                        (g.value(x) * frame.bracket(df, dh) + h.value(x) * frame.bracket(df, dg));
      CHECK(std::abs(lb) < 1e-8 * std::max(1.0, std::abs(frame.bracket(df, prod.gradient(x)))));
    }
  }
}

TEST_CASE("symbolic bracket agrees with the pointwise bracket") {
  const auto s = canonical();
  std::mt19937_64 rng(2);
  PointSampler sampler(2);
  for (int k = 0; k < 10; ++k) {
    const ScalarField f(random_polynomial(s.chart, rng)), g(random_polynomial(s.chart, rng));
    const ScalarField fg = bracket_field(s, f, g);
    REQUIRE(fg.expr());
    const Vector x = sampler.sample(s.box);
    CHECK(fg.value(x) == Catch::Approx(poisson_bracket(s, f, g, x)).margin(1e-12));
  }
}

TEST_CASE("Reeb field is unique up to the conditioning of A") {
  const auto s = poincare_cartan();
  PointSampler sampler(8);
  for (int k = 0; k < 20; ++k) {
    const Vector x = sampler.sample(s.box);
    PointFrame frame(s, x);
    Vector w(3);
    for (Eigen::Index i = 0; i < 3; ++i) w[i] = sampler.uniform(-1, 1);
    const Vector v = frame.reeb() + 1e-9 * w;
    Vector residual(4);
    residual.head(3) = frame.omega().transpose() * v;
    residual[3] = frame.eta().dot(v) - 1.0;
    CHECK((v - frame.reeb()).norm() <= frame.inverse_norm() * residual.norm() * (1 + 1e-6) + 1e-15);
  }
}

TEST_CASE("Poisson tensor reproduces the bracket") {
  const auto s = poincare_cartan();
  const Vector x = pt({0.2, 0.4, -0.3});
  PointFrame frame(s, x);
  const Matrix P = frame.poisson_tensor();
  const Vector df = pt({0.3, 1.0, 2.0}), dg = pt({-1.0, 0.5, 0.25});
  CHECK(df.dot(P * dg) == Catch::Approx(frame.bracket(df, dg)));
  CHECK((P + P.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}
