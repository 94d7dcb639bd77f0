#include "uwvf/skeleton.hpp"

#include <cmath>

#include <omp.h>

namespace uwvf
{

int Execution::resolved() const { return threads > 0 ? threads : omp_get_max_threads(); }

SkeletonVector::SkeletonVector(std::vector<int> offsets_)
  : offsets(std::move(offsets_)), values(Eigen::VectorXcd::Zero(offsets.back()))
{}

std::vector<int> block_offsets(std::span<const int> block_sizes)
{
  std::vector<int> offsets(block_sizes.size() + 1, 0);
  for (std::size_t k = 0; k < block_sizes.size(); ++k)
    offsets[k + 1] = offsets[k] + block_sizes[k];
  return offsets;
}

namespace
{
template <typename T>
T tree_sum_impl(std::span<const T> parts)
{
  if (parts.empty())
    return T{};
  if (parts.size() == 1)
    return parts[0];
  const std::size_t half = parts.size() / 2;
  return tree_sum_impl(parts.first(half)) + tree_sum_impl(parts.subspan(half));
}
} // namespace

Complex tree_sum(std::span<const Complex> parts) { return tree_sum_impl(parts); }
double tree_sum(std::span<const double> parts) { return tree_sum_impl(parts); }

Complex dot(const SkeletonVector &a, const SkeletonVector &b, Execution exec)
{
  const int n = a.n_blocks();
  std::vector<Complex> parts(n);
#pragma omp parallel for num_threads(exec.resolved()) schedule(static)
  for (int k = 0; k < n; ++k)
    parts[k] = a.block(k).dot(b.block(k));
  return tree_sum(std::span<const Complex>(parts));
}

double norm(const SkeletonVector &a, Execution exec)
{
  const int n = a.n_blocks();
  std::vector<double> parts(n);
#pragma omp parallel for num_threads(exec.resolved()) schedule(static)
  for (int k = 0; k < n; ++k)
    parts[k] = a.block(k).squaredNorm();
  return std::sqrt(tree_sum(std::span<const double>(parts)));
}

} // namespace uwvf
