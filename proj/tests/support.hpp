#pragma once

#include <random>
#include <string>

#include "cosym/chart.hpp"

namespace cosym::testing {

inline Vector pt(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

// Random polynomial of total degree <= max_degree in the chart coordinates.
inline Expr random_polynomial(const ChartSpec& chart, std::mt19937_64& rng, int max_degree = 3) {
  std::uniform_int_distribution<int> nterms(1, 4), deg(1, max_degree);
  std::uniform_int_distribution<std::size_t> var(0, chart.dim() - 1);
  std::uniform_int_distribution<int> coef(-3, 3);
  std::string s;
  const int n = nterms(rng);
  for (int k = 0; k < n; ++k) {
    int c = coef(rng);
    if (c == 0) c = 1;
    s += (k ? " + (" : "(") + std::to_string(c) + ")";
    const int d = deg(rng);
    for (int j = 0; j < d; ++j) s += "*" + chart.names()[var(rng)];
  }
  return chart.parse(s);
}

}  // namespace cosym::testing
