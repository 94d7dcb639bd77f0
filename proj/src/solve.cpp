#include "uwvf/solve.hpp"

#include <chrono>
#include <cmath>

#include <fmt/format.h>

namespace uwvf
{

void SolverConfig::validate() const
{
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw ConfigError("solver tolerance must lie in (0, 1)");
  if (max_iterations < 0)
    throw ConfigError("max iterations must be nonnegative");
  if (p_min < 1)
    throw ConfigError("p_min must be at least 1");
  if (p_max < p_min)
    throw ConfigError("p_max must not be smaller than p_min");
  if (!(condition_cap > 1.0))
    throw ConfigError("condition cap must exceed 1");
}

void apply_C(const AssembledSystem &sys, const SkeletonVector &x, SkeletonVector &y, Execution exec)
{
  const int n = sys.n_blocks();
#pragma omp parallel for num_threads(exec.resolved()) schedule(dynamic)
  for (int k = 0; k < n; ++k)
  {
    auto out = y.block(k);
    out.setZero();
    for (const CouplingBlock &blk : sys.C[k])
      out.noalias() += blk.matrix * x.block(blk.col);
  }
}

void apply_D_inverse(const AssembledSystem &sys, const SkeletonVector &x, SkeletonVector &y, Execution exec)
{
  const int n = sys.n_blocks();
#pragma omp parallel for num_threads(exec.resolved()) schedule(dynamic)
  for (int k = 0; k < n; ++k)
    y.block(k) = sys.D_factor[k].solve(x.block(k));
}

void apply_D(const AssembledSystem &sys, const SkeletonVector &x, SkeletonVector &y, Execution exec)
{
  const int n = sys.n_blocks();
#pragma omp parallel for num_threads(exec.resolved()) schedule(dynamic)
  for (int k = 0; k < n; ++k)
    y.block(k).noalias() = sys.D[k] * x.block(k);
}

void apply_operator(const AssembledSystem &sys, const SkeletonVector &x, SkeletonVector &y, Execution exec)
{
  const int n = sys.n_blocks();
#pragma omp parallel for num_threads(exec.resolved()) schedule(dynamic)
  for (int k = 0; k < n; ++k)
  {
    Eigen::VectorXcd incoming = Eigen::VectorXcd::Zero(x.block_size(k));
    for (const CouplingBlock &blk : sys.C[k])
      incoming.noalias() += blk.matrix * x.block(blk.col);
    y.block(k) = x.block(k) - sys.D_factor[k].solve(incoming);
  }
}

namespace reference
{

void apply_operator(const AssembledSystem &sys, const SkeletonVector &x, SkeletonVector &y)
{
  SkeletonVector incoming(sys.offsets);
  for (const auto &row : sys.C)
    for (const CouplingBlock &blk : row)
      incoming.block(blk.row) += blk.matrix * x.block(blk.col);
  for (int k = 0; k < sys.n_blocks(); ++k)
    y.block(k) = x.block(k) - sys.D_factor[k].solve(incoming.block(k));
}

} // namespace reference

namespace
{

// r = b + C x - D x
void raw_residual(const AssembledSystem &sys, const SkeletonVector &x, SkeletonVector &r, Execution exec)
{
  const int n = sys.n_blocks();
#pragma omp parallel for num_threads(exec.resolved()) schedule(dynamic)
  for (int k = 0; k < n; ++k)
  {
    Eigen::VectorXcd acc = sys.b.block(k) - sys.D[k] * x.block(k);
    for (const CouplingBlock &blk : sys.C[k])
      acc.noalias() += blk.matrix * x.block(blk.col);
    r.block(k) = acc;
  }
}

double weighted_norm(const SkeletonVector &r, const SkeletonVector &Dinv_r, Execution exec)
{
  return std::sqrt(std::max(0.0, dot(r, Dinv_r, exec).real()));
}

std::vector<double> conditions(const AssembledSystem &sys)
{
  std::vector<double> c;
  for (const HermitianFactor &f : sys.D_factor)
    c.push_back(f.condition);
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

std::pair<double, double> residuals(const AssembledSystem &sys, const SkeletonVector &x, Execution exec)
{
  SkeletonVector r(sys.offsets), u(sys.offsets), f(sys.offsets);
  raw_residual(sys, x, r, exec);
  apply_D_inverse(sys, r, u, exec);
  apply_D_inverse(sys, sys.b, f, exec);
  const double f_norm = norm(f, exec);
  const double b_weighted = weighted_norm(sys.b, f, exec);
  const double euclid = f_norm > 0.0 ? norm(u, exec) / f_norm : norm(u, exec);
  const double weighted = b_weighted > 0.0 ? weighted_norm(r, u, exec) / b_weighted : weighted_norm(r, u, exec);
  return {euclid, weighted};
}

SolveResult solve_stationary(const AssembledSystem &sys, const SolverConfig &config)
{
  const auto t0 = std::chrono::steady_clock::now();
  const Execution exec = config.exec;
  SolveResult res{sys.zero_vector(), {}};
  SolveReport &rep = res.report;
  rep.method = "stationary";
  rep.condition = conditions(sys);

  SkeletonVector r = sys.b;
  SkeletonVector u(sys.offsets);
  apply_D_inverse(sys, r, u, exec);
  const double b_norm = weighted_norm(r, u, exec);

  for (int it = 0;; ++it)
  {
    const double rel = b_norm > 0.0 ? weighted_norm(r, u, exec) / b_norm : 0.0;
    rep.history.push_back(rel);
    rep.iterations = it;
    rep.final_residual = rel;
    if (rel <= config.tolerance)
    {
      rep.converged = true;
      break;
    }
    if (it >= config.max_iterations)
      break;
    res.chi.values += u.values;
    raw_residual(sys, res.chi, r, exec);
    apply_D_inverse(sys, r, u, exec);
  }

  std::tie(rep.residual_euclidean, rep.residual_weighted) = residuals(sys, res.chi, exec);
  rep.wall_time = seconds_since(t0);
  return res;
}

SolveResult solve_bicgstab(const AssembledSystem &sys, const SolverConfig &config)
{
  const auto t0 = std::chrono::steady_clock::now();
  const Execution exec = config.exec;
  SolveResult res{sys.zero_vector(), {}};
  SolveReport &rep = res.report;
  rep.method = "bicgstab";
  rep.condition = conditions(sys);

  SkeletonVector &x = res.chi;
  SkeletonVector f(sys.offsets), r(sys.offsets), r_hat(sys.offsets), p(sys.offsets), v(sys.offsets),
    s(sys.offsets), t(sys.offsets), Ax(sys.offsets);
  apply_D_inverse(sys, sys.b, f, exec);
  const double f_norm = norm(f, exec);

  auto finish = [&]() {
    std::tie(rep.residual_euclidean, rep.residual_weighted) = residuals(sys, x, exec);
    rep.wall_time = seconds_since(t0);
  };

  if (f_norm == 0.0)
  {
    rep.converged = true;
    rep.history.push_back(0.0);
    finish();
    return res;
  }

  auto restart = [&]() {
    apply_operator(sys, x, Ax, exec);
    r.values = f.values - Ax.values;
    r_hat.values = r.values;
    p.values.setZero();
    v.values.setZero();
  };

  restart();
  double rel = norm(r, exec) / f_norm;
  const double initial = rel;
  rep.history.push_back(rel);
  Complex rho_prev = 1.0, alpha = 1.0, omega = 1.0;
  constexpr double breakdown = 1e-300;

  int it = 0;
  while (rel > config.tolerance && it < config.max_iterations)
  {
    const Complex rho = dot(r_hat, r, exec);
    if (std::abs(rho) <= breakdown || std::abs(omega) <= breakdown)
    {
      if (rep.restarts == config.max_restarts)
        throw SolverError(fmt::format("BiCGstab breakdown after {} restarts at iteration {}", rep.restarts, it));
      ++rep.restarts;
      restart();
      rho_prev = alpha = omega = 1.0;
      continue;
    }
    const Complex beta = (rho / rho_prev) * (alpha / omega);
    p.values = r.values + beta * (p.values - omega * v.values);
    apply_operator(sys, p, v, exec);
    const Complex rv = dot(r_hat, v, exec);
    if (std::abs(rv) <= breakdown)
    {
      if (rep.restarts == config.max_restarts)
        throw SolverError(fmt::format("BiCGstab breakdown after {} restarts at iteration {}", rep.restarts, it));
      ++rep.restarts;
      restart();
      rho_prev = alpha = omega = 1.0;
      continue;
    }
    alpha = rho / rv;
    s.values = r.values - alpha * v.values;
    ++it;
    const double s_rel = norm(s, exec) / f_norm;
    if (s_rel <= config.tolerance)
    {
      x.values += alpha * p.values;
      rel = s_rel;
      rep.history.push_back(rel);
      break;
    }
    apply_operator(sys, s, t, exec);
    const double tt = norm(t, exec);
    omega = tt > 0.0 ? dot(t, s, exec) / (tt * tt) : Complex(0.0);
    x.values += alpha * p.values + omega * s.values;
    r.values = s.values - omega * t.values;
    rho_prev = rho;
    rel = norm(r, exec) / f_norm;
    rep.history.push_back(rel);
    if (!(rel <= 1e6 * initial))
      throw SolverError(fmt::format("BiCGstab diverged at iteration {} (residual {:.3e})", it, rel));
  }

  rep.iterations = it;
  rep.final_residual = rel;
  rep.converged = rel <= config.tolerance;
  finish();
  return res;
}

SolveResult solve(const AssembledSystem &sys, const SolverConfig &config)
{
  config.validate();
  return config.method == SolverMethod::bicgstab ? solve_bicgstab(sys, config) : solve_stationary(sys, config);
}

DirectionChoice adapt_directions(const Mesh &mesh, const ProblemSpec &spec, const SolverConfig &config)
{
  config.validate();
  for (int tag : mesh.boundary_tags())
    spec.boundary_spec(tag);
  const int n = mesh.n_elements();
  DirectionChoice choice{std::vector<int>(n), std::vector<double>(n)};
  std::vector<std::string> failures(n);

#pragma omp parallel for num_threads(config.exec.resolved()) schedule(dynamic)
  for (int k = 0; k < n; ++k)
  {
    const Complex eps = spec.materials.eps(mesh.region(k));
    int p = config.p_max;
    for (;;)
    {
      const LocalBasis basis(k, DirectionSet::cached(p), spec.kappa, eps);
      const HermitianFactor fac = HermitianFactor::compute(assemble_local_D(mesh, k, basis, spec));
      choice.directions[k] = p;
      choice.condition[k] = fac.condition;
      if (fac.min_eigenvalue > 0.0 && fac.condition <= config.condition_cap)
        break;
      if (p == config.p_min)
      {
        failures[k] = fmt::format("element {}: condition {:.3e} exceeds cap {:.3e} even at p_K = {}", k,
                                  fac.condition, config.condition_cap, p);
        break;
      }
      p = std::max(config.p_min, p - 4);
    }
  }

  std::string message;
  for (const std::string &f : failures)
    if (!f.empty())
      message += "\n  " + f;
  if (!message.empty())
    throw AssemblyError("direction adaptation failed:" + message);
  return choice;
}

} // namespace uwvf
