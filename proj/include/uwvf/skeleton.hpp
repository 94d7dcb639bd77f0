#pragma once

#include <span>
#include <vector>

#include "uwvf/types.hpp"

namespace uwvf
{

/// Worker count for the OpenMP kernels; 0 means the OpenMP default.
struct Execution
{
  int threads = 0;

  int resolved() const;
};

/// Coefficient vector for the impedance-flux unknown, blocked by element.
/// Block k holds 2 p_K entries ordered direction-major, polarization-minor.
struct SkeletonVector
{
  std::vector<int> offsets; // n_blocks + 1 entries
  Eigen::VectorXcd values;

  SkeletonVector() = default;
  explicit SkeletonVector(std::vector<int> offsets_);

  int n_blocks() const { return static_cast<int>(offsets.size()) - 1; }
  int size() const { return static_cast<int>(values.size()); }
  int block_size(int k) const { return offsets[k + 1] - offsets[k]; }

  auto block(int k) { return values.segment(offsets[k], block_size(k)); }
  auto block(int k) const { return values.segment(offsets[k], block_size(k)); }
};

std::vector<int> block_offsets(std::span<const int> block_sizes);

/// Pairwise sum in a fixed tree shape, independent of the worker count.
Complex tree_sum(std::span<const Complex> parts);
double tree_sum(std::span<const double> parts);

/// a^H b, reduced per block and then over blocks with tree_sum.
Complex dot(const SkeletonVector &a, const SkeletonVector &b, Execution exec = {});
double norm(const SkeletonVector &a, Execution exec = {});

} // namespace uwvf
