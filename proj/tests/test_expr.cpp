#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "cosym/expr.hpp"

using namespace cosym;
using Catch::Approx;

namespace {

const std::vector<std::string> tqp{"t", "q", "p"};
const std::vector<std::string> five{"t", "q1", "q2", "p1", "p2"};

double eval_at(const std::string& src, std::vector<double> x, const std::vector<std::string>& vars = tqp) {
  return parse(src, vars).eval(x);
}

// Random polynomial of total degree <= 4 in five variables, built as a string
// so it also exercises the parser.
std::string random_polynomial(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nterms(1, 6), deg(0, 4), var(0, 4);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::string s;
  const int n = nterms(rng);
  for (int k = 0; k < n; ++k) {
    if (k) s += " + ";
    s += "(" + std::to_string(coef(rng)) + ")";
    const int d = deg(rng);
    for (int j = 0; j < d; ++j) s += "*" + five[static_cast<std::size_t>(var(rng))];
  }
  return s;
}

}  // namespace

TEST_CASE("parse and evaluate arithmetic") {
  CHECK(eval_at("q^2 + p^2", {0, 1, 2}) == 5.0);
  CHECK(eval_at("2 - 3 - 4", {0, 0, 0}) == -5.0);
  CHECK(eval_at("8 / 4 / 2", {0, 0, 0}) == 1.0);
  CHECK(eval_at("-q^2", {0, 3, 0}) == -9.0);
  CHECK(eval_at("2^3^2", {0, 0, 0}) == 512.0);
  CHECK(eval_at("2^-1", {0, 0, 0}) == 0.5);
  CHECK(eval_at("pi", {0, 0, 0}) == Approx(M_PI));
  CHECK(eval_at("  sqrt( q )*exp(0)", {0, 4, 0}) == 2.0);
  CHECK(eval_at("1.5e1 + .5", {0, 0, 0}) == 15.5);
  CHECK(eval_at("log(exp(p))", {0, 0, 0.25}) == Approx(0.25));
}

TEST_CASE("gradient of sin at the origin") {
  const Jet1 j = parse("sin(q)", tqp).eval_jet1(std::vector<double>{0, 0, 0});
  CHECK(j.grad[1] == 1.0);
}

TEST_CASE("syntax errors report a byte offset") {
  try {
    parse("q +", tqp);
    FAIL("expected a syntax error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::Syntax);
    CHECK(e.offset() == 3);
  }
  CHECK_THROWS_AS(parse("", tqp), ParseError);
  CHECK_THROWS_AS(parse("q p", tqp), ParseError);
  CHECK_THROWS_AS(parse("(q", tqp), ParseError);
  CHECK_THROWS_AS(parse("q^p", tqp), ParseError);
  CHECK_THROWS_AS(parse("2 q", tqp), ParseError);
}

TEST_CASE("unknown identifiers are named") {
  try {
    parse("q + zeta", tqp);
    FAIL("expected an unknown identifier");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::UnknownIdentifier);
    CHECK(e.identifier() == "zeta");
  }
  try {
    parse("tan(q)", tqp);
    FAIL("expected an unknown identifier");
  } catch (const ParseError& e) {
    CHECK(e.identifier() == "tan");
  }
}

TEST_CASE("second-order jets") {
  const Jet2 a = eval_jet2(parse("q*p", tqp), std::vector<double>{0, 2, 3});
  CHECK(a.value == 6.0);
  CHECK(a.grad == std::vector<double>{0, 3, 2});
  CHECK(a.hess[1 * 3 + 2] == 1.0);
  CHECK(a.hess[2 * 3 + 1] == 1.0);

  const Jet2 b = eval_jet2(parse("q^2", tqp), std::vector<double>{0, 3, 0});
  CHECK(b.hess[1 * 3 + 1] == 2.0);

  const Jet2 c = eval_jet2(parse("exp(q)", tqp), std::vector<double>{0, 0, 0});
  CHECK(c.value == 1.0);
  CHECK(c.grad[1] == 1.0);
  CHECK(c.hess[1 * 3 + 1] == 1.0);
}

TEST_CASE("hessians are exactly symmetric") {
  const Expr e = parse("sin(q*p)*exp(t*q) + sqrt(p^2 + 1)/(q^2 + 2)", tqp);
  const Jet2 j = e.eval_jet2(std::vector<double>{0.3, -0.7, 1.1});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 3; ++k) CHECK(j.hess[i * 3 + k] == j.hess[k * 3 + i]);
  }
}

TEST_CASE("domain errors carry the offending subexpression") {
  try {
    parse("1 + log(q - 1)", tqp).eval(std::vector<double>{0, 0.5, 0});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.subexpression() == "log(q - 1)");
  }
  CHECK_THROWS_AS(parse("sqrt(q)", tqp).eval(std::vector<double>{0, -1, 0}), DomainError);
  CHECK_THROWS_AS(parse("p / q", tqp).eval(std::vector<double>{0, 0, 1}), DomainError);
  CHECK_THROWS_AS(parse("q^0.5", tqp).eval(std::vector<double>{0, -1, 0}), DomainError);
}

TEST_CASE("evaluation is bit-reproducible") {
  const Expr e = parse("sin(q)^3*cos(p) - exp(-q*p)/7", tqp);
  const std::vector<double> x{0.1, 0.2, 0.3};
  const double v = e.eval(x);
  for (int k = 0; k < 10; ++k) CHECK(e.eval(x) == v);
}

TEST_CASE("jets of random polynomials agree with central differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double h = 1e-5;
  for (int trial = 0; trial < 40; ++trial) {
    const Expr e = parse(random_polynomial(rng), five);
    std::vector<double> x(5);
    for (double& xi : x) xi = u(rng);
    const Jet2 j = e.eval_jet2(x);
    for (std::size_t i = 0; i < 5; ++i) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (e.eval(xp) - e.eval(xm)) / (2 * h);
      CHECK(std::abs(fd - j.grad[i]) <= 1e-6 * std::max(1.0, std::abs(j.grad[i])));
      const Jet1 gp = e.eval_jet1(xp), gm = e.eval_jet1(xm);
      for (std::size_t k = 0; k < 5; ++k) {
        const double hfd = (gp.grad[k] - gm.grad[k]) / (2 * h);
        CHECK(std::abs(hfd - j.hess[i * 5 + k]) <= 1e-4 * std::max(1.0, std::abs(j.hess[i * 5 + k])));
      }
    }
  }
}

TEST_CASE("parse, print, parse is the identity on a corpus") {
  const std::vector<std::string> corpus{
      "q",
      "1",
      "pi",
      "-q",
      "q + p",
      "q - p - t",
      "q - (p - t)",
      "q * p / t",
      "q / (p * t)",
      "q^2",
      "-q^2",
      "(-q)^2",
      "q^-2",
      "q^(1/2)",
      "2^3^2",
      "(2^3)^2",
      "sin(q)",
      "cos(q + p)",
      "exp(-t)",
      "log(q^2 + 1)",
      "sqrt(p^2 + q^2)",
      "(q^2 + p^2)/2",
      "q*p - p*q",
      "-(q + p)",
      "--q",
      "-(-q)",
      "q - -p",
      "q * -p",
      "q / -p",
      "(q + p)*(q - p)",
      "(q + p)/(q - p)^3",
      "sin(q)^2 + cos(q)^2",
      "exp(sin(cos(t)))",
      "2*pi*q",
      "1e-3*q + 2.5e2",
      "0.1 + 0.2",
      "q^2.5",
      "q^-0.5",
      "(q*p)^3",
      "-(q*p)^3",
      "t - q + p",
      "t - (q + p)",
      "t / q * p",
      "t / (q * p)",
      "(t + q) * p",
      "sqrt(sqrt(q^2 + 1))",
      "log(exp(q) + exp(p))",
      "-sin(-q)",
      "(q - 1)^2 + (p + 1)^2",
      "q^2^-1",
  };
  REQUIRE(corpus.size() == 50);
  for (const auto& src : corpus) {
    const Expr a = parse(src, tqp);
    const std::string printed = a.to_string();
    const Expr b = parse(printed, tqp);
    INFO(src << " -> " << printed);
    CHECK(a == b);
    CHECK(b.to_string() == printed);
  }
}

TEST_CASE("symbolic derivative matches the jet") {
  const Expr e = parse("sin(q*p) + q^3/(p^2 + 1) - sqrt(q^2 + 2)*exp(t)", tqp);
  const std::vector<double> x{0.4, -0.3, 0.8};
  const Jet1 j = e.eval_jet1(x);
  for (std::size_t i = 0; i < 3; ++i) CHECK(derivative(e, i).eval(x) == Approx(j.grad[i]).epsilon(1e-13));
}

TEST_CASE("reserved words cannot be coordinate names") {
  CHECK(is_reserved_word("pi"));
  CHECK(is_reserved_word("sin"));
  CHECK_FALSE(is_reserved_word("q"));
}
