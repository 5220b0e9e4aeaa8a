#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hjbi {

using Vec = std::vector<double>;

// Node regime labels shared by the value field and trajectory records.
enum class Regime : unsigned char { continuous, max_impulse, min_impulse, terminal };

std::string regime_name(Regime r);
Regime regime_from_name(const std::string& name);

// Raised on malformed configuration, grids or problem data.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a point leaves the space box under the "error" boundary policy.
class DomainError : public std::runtime_error {
public:
  DomainError(const std::string& what, int coordinate, double value)
      : std::runtime_error(what), coordinate(coordinate), value(value) {}
  int coordinate;
  double value;
};

inline double sup_norm(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline double sup_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace hjbi
