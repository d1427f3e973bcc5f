#include "cosym/chart.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace cosym {

ChartSpec::ChartSpec(std::vector<std::string> names, std::vector<bool> periodic)
    : names_(std::move(names)), periodic_(std::move(periodic)) {
  if (names_.empty() || names_.size() % 2 == 0) {
    throw std::invalid_argument("chart dimension must be a positive odd integer, got " +
                                std::to_string(names_.size()));
  }
  if (periodic_.size() != names_.size()) {
    throw std::invalid_argument("chart periodic mask length does not match the coordinate names");
  }
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw std::invalid_argument("empty coordinate name");
    if (is_reserved_word(n)) throw std::invalid_argument("coordinate name '" + n + "' is reserved");
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate coordinate name '" + n + "'");
  }
}

std::size_t ChartSpec::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  throw std::out_of_range("unknown coordinate '" + std::string(name) + "'");
}

Vector ChartSpec::normalize(const Vector& x) const {
  Vector y = x;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!periodic_[i]) continue;
    double v = std::fmod(y[static_cast<Eigen::Index>(i)], kTwoPi);
    if (v < 0.0) v += kTwoPi;
    if (v >= kTwoPi) v = 0.0;
    y[static_cast<Eigen::Index>(i)] = v;
  }
  return y;
}

Vector ChartSpec::difference(const Vector& x, const Vector& y) const {
  Vector d = x - y;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!periodic_[i]) continue;
    const auto k = static_cast<Eigen::Index>(i);
    d[k] -= kTwoPi * std::round(d[k] / kTwoPi);
  }
  return d;
}

bool DomainBox::empty() const {
  if (bounds.empty()) return true;
  for (const auto& [lo, hi] : bounds) {
    if (!(hi > lo)) return true;
  }
  return false;
}

bool DomainBox::contains(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != bounds.size()) return false;
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    const double v = x[static_cast<Eigen::Index>(i)];
    if (v < bounds[i].first || v > bounds[i].second) return false;
  }
  return true;
}

}  // namespace cosym
