#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hjbi/types.hpp"

namespace hjbi {

enum class BoundaryPolicy : unsigned char { error, clamp };

std::string boundary_name(BoundaryPolicy p);
BoundaryPolicy boundary_from_name(const std::string& name);

struct AxisSpec {
  double lo;
  double hi;
  int count;
};

// Uniform time nodes s_0..s_{I-1} with step h plus a rectangular tensor grid
// in space. Space nodes are addressed by a flattened row-major index with the
// last axis fastest.
struct TimeSpaceGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  double h = 0.0;
  int num_time_nodes = 0;
  std::vector<Vec> space_axes;
  BoundaryPolicy boundary = BoundaryPolicy::error;

  int dim() const { return static_cast<int>(space_axes.size()); }
  std::size_t num_space_nodes() const;
  double time_node(int i) const;
  Vec space_node(std::size_t flat) const;
  void decode(std::size_t flat, std::span<std::size_t> idx) const;
  std::size_t encode(std::span<const std::size_t> idx) const;
  bool contains(std::span<const double> point) const;
};

TimeSpaceGrid build_grid(double t, double T, double h, const std::vector<AxisSpec>& space_box,
                         BoundaryPolicy boundary);

// Multilinear interpolation of one time-slice at an arbitrary space point.
// Exact at grid nodes; under clamp the point is projected onto the bounding
// box componentwise before interpolation.
double interpolate(std::span<const double> field_slice, const TimeSpaceGrid& grid,
                   std::span<const double> point);

// Value array over the whole time-space grid plus per-node policy annotations.
struct ValueField {
  int num_time_nodes = 0;
  std::size_t num_space_nodes = 0;
  std::vector<double> values;
  std::vector<int> theta_index;  // -1 when absent
  std::vector<int> xi_index;
  std::vector<int> eta_index;
  std::vector<Regime> regime;

  ValueField() = default;
  ValueField(int time_nodes, std::size_t space_nodes);

  std::size_t flat(int i, std::size_t j) const { return static_cast<std::size_t>(i) * num_space_nodes + j; }
  double& at(int i, std::size_t j) { return values[flat(i, j)]; }
  double at(int i, std::size_t j) const { return values[flat(i, j)]; }
  std::span<const double> slice(int i) const {
    return {values.data() + flat(i, 0), num_space_nodes};
  }
  std::span<double> slice(int i) {
    return {values.data() + flat(i, 0), num_space_nodes};
  }
};

}  // namespace hjbi
