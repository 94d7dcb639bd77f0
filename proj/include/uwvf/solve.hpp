#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uwvf/assembly.hpp"

namespace uwvf
{

enum class SolverMethod
{
  bicgstab,
  stationary
};

struct SolverConfig
{
  SolverMethod method = SolverMethod::bicgstab;
  double tolerance = 1e-5;
  int max_iterations = 10000;
  double condition_cap = 1e12;
  int p_min = 1;
  int p_max = 67;
  std::uint64_t seed = 0; // reserved; the initial guess is always zero
  int max_restarts = 3;
  Execution exec;

  void validate() const;
};

struct SolveReport
{
  std::string method;
  bool converged = false;
  int iterations = 0;
  int restarts = 0;
  /// Euclidean coefficient norm of D^-1 (b + C x - D x) for BiCGstab,
  /// D^-1-weighted norm of b + C x - D x for the stationary method; both
  /// relative to the same quantity at x = 0.
  double final_residual = 0.0;
  double residual_euclidean = 0.0;
  double residual_weighted = 0.0;
  std::vector<double> history;
  std::vector<double> condition; // per element
  double wall_time = 0.0;
};

struct SolveResult
{
  SkeletonVector chi;
  SolveReport report;
};

/// y = C x
void apply_C(const AssembledSystem &sys, const SkeletonVector &x, SkeletonVector &y, Execution exec = {});
/// y = D^-1 x
void apply_D_inverse(const AssembledSystem &sys, const SkeletonVector &x, SkeletonVector &y, Execution exec = {});
/// y = D x
void apply_D(const AssembledSystem &sys, const SkeletonVector &x, SkeletonVector &y, Execution exec = {});
/// y = x - D^-1 C x, block by block over the element and its face neighbors.
void apply_operator(const AssembledSystem &sys, const SkeletonVector &x, SkeletonVector &y, Execution exec = {});

namespace reference
{
void apply_operator(const AssembledSystem &sys, const SkeletonVector &x, SkeletonVector &y);
} // namespace reference

/// Fixed point chi <- D^-1 (C chi + b) from chi = 0.
SolveResult solve_stationary(const AssembledSystem &sys, const SolverConfig &config);

/// BiCGstab on (I - D^-1 C) chi = D^-1 b from chi = 0, restarting from the
/// current iterate on breakdown.
SolveResult solve_bicgstab(const AssembledSystem &sys, const SolverConfig &config);

SolveResult solve(const AssembledSystem &sys, const SolverConfig &config);

/// Relative residuals of x in both norms: {euclidean, weighted}.
std::pair<double, double> residuals(const AssembledSystem &sys, const SkeletonVector &x, Execution exec = {});

struct DirectionChoice
{
  std::vector<int> directions;
  std::vector<double> condition;
};

/// Per element, start at p_max and drop 4 directions at a time while
/// cond(D_K) exceeds the cap. Throws AssemblyError if p_min is still too
/// ill-conditioned.
DirectionChoice adapt_directions(const Mesh &mesh, const ProblemSpec &spec, const SolverConfig &config);

} // namespace uwvf
