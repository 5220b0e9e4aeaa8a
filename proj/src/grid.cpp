#include "hjbi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hjbi {

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::continuous: return "continuous";
    case Regime::max_impulse: return "max-impulse";
    case Regime::min_impulse: return "min-impulse";
    case Regime::terminal: return "terminal";
  }
  return "?";
}

Regime regime_from_name(const std::string& name) {
  if (name == "continuous") return Regime::continuous;
  if (name == "max-impulse") return Regime::max_impulse;
  if (name == "min-impulse") return Regime::min_impulse;
  if (name == "terminal") return Regime::terminal;
  throw ConfigError("unknown regime label: " + name);
}

std::string boundary_name(BoundaryPolicy p) {
  return p == BoundaryPolicy::error ? "error" : "clamp";
}

BoundaryPolicy boundary_from_name(const std::string& name) {
  if (name == "error") return BoundaryPolicy::error;
  if (name == "clamp") return BoundaryPolicy::clamp;
  throw ConfigError("unknown boundary policy: " + name + " (expected error or clamp)");
}

std::size_t TimeSpaceGrid::num_space_nodes() const {
  std::size_t n = 1;
  for (const auto& axis : space_axes) n *= axis.size();
  return n;
}

double TimeSpaceGrid::time_node(int i) const {
  if (i == num_time_nodes - 1) return t_end;
  return t_start + i * h;
}

void TimeSpaceGrid::decode(std::size_t flat, std::span<std::size_t> idx) const {
  for (int d = dim() - 1; d >= 0; --d) {
    const std::size_t n = space_axes[d].size();
    idx[d] = flat % n;
    flat /= n;
  }
}

std::size_t TimeSpaceGrid::encode(std::span<const std::size_t> idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim(); ++d) flat = flat * space_axes[d].size() + idx[d];
  return flat;
}

Vec TimeSpaceGrid::space_node(std::size_t flat) const {
  Vec point(dim());
  for (int d = dim() - 1; d >= 0; --d) {
    const std::size_t n = space_axes[d].size();
    point[d] = space_axes[d][flat % n];
    flat /= n;
  }
  return point;
}

bool TimeSpaceGrid::contains(std::span<const double> point) const {
  for (int d = 0; d < dim(); ++d) {
    if (point[d] < space_axes[d].front() || point[d] > space_axes[d].back()) return false;
  }
  return true;
}

TimeSpaceGrid build_grid(double t, double T, double h, const std::vector<AxisSpec>& space_box,
                         BoundaryPolicy boundary) {
  if (!(T > t)) throw ConfigError("horizon must satisfy T > t");
  if (!(h > 0.0)) throw ConfigError("time step h must be positive");

  const double ratio = (T - t) / h;
  const double k = std::round(ratio);
  if (k < 1.0 || std::abs(ratio - k) > 1e-12 * std::max(1.0, std::abs(ratio))) {
    const double suggestion = (T - t) / std::max(1.0, k);
    std::ostringstream msg;
    msg << "time step h=" << h << " does not divide the horizon T-t=" << (T - t)
        << "; nearest admissible h is " << suggestion;
    throw ConfigError(msg.str());
  }

  if (space_box.empty()) throw ConfigError("space box must have at least one axis");

  TimeSpaceGrid grid;
  grid.t_start = t;
  grid.t_end = T;
  grid.h = h;
  grid.num_time_nodes = static_cast<int>(k) + 1;
  grid.boundary = boundary;
  grid.space_axes.reserve(space_box.size());
  for (std::size_t d = 0; d < space_box.size(); ++d) {
    const auto& spec = space_box[d];
    if (spec.count < 2)
      throw ConfigError("space axis " + std::to_string(d) + " needs at least 2 nodes");
    if (!(spec.hi > spec.lo))
      throw ConfigError("space axis " + std::to_string(d) + " must satisfy hi > lo");
    Vec axis(spec.count);
    for (int j = 0; j < spec.count; ++j)
      axis[j] = spec.lo + j * (spec.hi - spec.lo) / (spec.count - 1);
    axis.back() = spec.hi;
    grid.space_axes.push_back(std::move(axis));
  }
  return grid;
}

double interpolate(std::span<const double> field_slice, const TimeSpaceGrid& grid,
                   std::span<const double> point) {
  const int n = grid.dim();

  // Per-dimension cell index and local weight.
  std::size_t cell[8];
  double weight[8];
  if (n > 8) throw ConfigError("interpolation supports at most 8 space dimensions");

  for (int d = 0; d < n; ++d) {
    const Vec& axis = grid.space_axes[d];
    double p = point[d];
    if (p < axis.front() || p > axis.back()) {
      if (grid.boundary == BoundaryPolicy::clamp) {
        p = std::clamp(p, axis.front(), axis.back());
      } else {
        std::ostringstream msg;
        msg << "point coordinate " << d << " = " << p << " outside grid range ["
            << axis.front() << ", " << axis.back() << "]";
        throw DomainError(msg.str(), d, point[d]);
      }
    }
    auto it = std::upper_bound(axis.begin(), axis.end(), p);
    std::size_t k = static_cast<std::size_t>(std::distance(axis.begin(), it));
    k = (k == 0) ? 0 : k - 1;
    if (k > axis.size() - 2) k = axis.size() - 2;
    cell[d] = k;
    weight[d] = (p - axis[k]) / (axis[k + 1] - axis[k]);
  }

  // Accumulate over the 2^n surrounding nodes.
  double value = 0.0;
  const unsigned corners = 1u << n;
  for (unsigned mask = 0; mask < corners; ++mask) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int d = 0; d < n; ++d) {
      const bool hi = (mask >> d) & 1u;
      w *= hi ? weight[d] : (1.0 - weight[d]);
      flat = flat * grid.space_axes[d].size() + cell[d] + (hi ? 1 : 0);
    }
    if (w != 0.0) value += w * field_slice[flat];
  }
  return value;
}

ValueField::ValueField(int time_nodes, std::size_t space_nodes)
    : num_time_nodes(time_nodes),
      num_space_nodes(space_nodes),
      values(static_cast<std::size_t>(time_nodes) * space_nodes, 0.0),
      theta_index(values.size(), -1),
      xi_index(values.size(), -1),
      eta_index(values.size(), -1),
      regime(values.size(), Regime::continuous) {}

}  // namespace hjbi
