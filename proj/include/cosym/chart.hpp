#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cosym/expr.hpp"

namespace cosym {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// One global chart of an odd-dimensional manifold. Periodic coordinates live
// on a circle of length 2*pi.
class ChartSpec {
 public:
  ChartSpec() = default;
  ChartSpec(std::vector<std::string> names, std::vector<bool> periodic);

  std::size_t dim() const { return names_.size(); }
  // n in dim = 2n+1.
  std::size_t half_dim() const { return (names_.size() - 1) / 2; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<bool>& periodic() const { return periodic_; }
  bool is_periodic(std::size_t i) const { return periodic_[i]; }
  std::size_t index_of(std::string_view name) const;

  Expr parse(std::string_view src) const { return cosym::parse(src, names_); }

  // Periodic coordinates mapped into [0, 2*pi).
  Vector normalize(const Vector& x) const;
  // x - y with periodic components wrapped into (-pi, pi].
  Vector difference(const Vector& x, const Vector& y) const;
  double distance(const Vector& x, const Vector& y) const { return difference(x, y).norm(); }

  friend bool operator==(const ChartSpec&, const ChartSpec&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<bool> periodic_;
};

// Axis-aligned sampling region, one closed interval per coordinate.
struct DomainBox {
  std::vector<std::pair<double, double>> bounds;

  bool empty() const;
  bool contains(const Vector& x) const;
  friend bool operator==(const DomainBox&, const DomainBox&) = default;
};

// Portable uniform sampler: the same seed yields the same points on every
// platform, which the report determinism depends on.
class PointSampler {
 public:
  explicit PointSampler(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  Vector sample(const DomainBox& box) {
    Vector x(static_cast<Eigen::Index>(box.bounds.size()));
    for (std::size_t i = 0; i < box.bounds.size(); ++i) {
      x[static_cast<Eigen::Index>(i)] = uniform(box.bounds[i].first, box.bounds[i].second);
    }
    return x;
  }
  std::vector<Vector> sample(const DomainBox& box, std::size_t count) {
    std::vector<Vector> pts;
    pts.reserve(count);
    for (std::size_t k = 0; k < count; ++k) pts.push_back(sample(box));
    return pts;
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cosym
