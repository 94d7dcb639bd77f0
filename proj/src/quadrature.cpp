#include "uwvf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace uwvf
{

namespace
{

// Legendre P_n(x) and its derivative by the three-term recurrence.
std::pair<double, double> legendre(int n, double x)
{
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k)
  {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

} // namespace

void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights)
{
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i)
  {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it)
    {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    const double dp = legendre(n, x).second;
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = 0.5 * (1.0 - x);
    nodes[n - 1 - i] = 0.5 * (1.0 + x);
    weights[i] = weights[n - 1 - i] = w;
  }
}

namespace
{

template <int N>
void symmetrize(SimplexRule<N> &rule, const std::vector<std::array<double, N>> &nodes,
                const std::vector<double> &weights)
{
  std::array<int, N> perm;
  for (int i = 0; i < N; ++i)
    perm[i] = i;
  std::vector<std::array<int, N>> perms;
  do
    perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  const double share = 1.0 / perms.size();
  for (std::size_t q = 0; q < nodes.size(); ++q)
    for (const auto &p : perms)
    {
      std::array<double, N> b;
      for (int i = 0; i < N; ++i)
        b[i] = nodes[q][p[i]];
      rule.nodes.push_back(b);
      rule.weights.push_back(weights[q] * share);
    }
}

TriangleRule build_triangle(int order)
{
  TriangleRule rule;
  rule.order = order;
  if (order == 1)
  {
    rule.nodes.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    rule.weights.push_back(0.5);
    return rule;
  }
  // x = u, y = (1-u) v, Jacobian (1-u): degree order+1 in u, order in v.
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre((order + 3) / 2, xu, wu);
  gauss_legendre((order + 2) / 2, xv, wv);
  std::vector<std::array<double, 3>> nodes;
  std::vector<double> weights;
  for (std::size_t i = 0; i < xu.size(); ++i)
    for (std::size_t j = 0; j < xv.size(); ++j)
    {
      const double x = xu[i];
      const double y = (1.0 - xu[i]) * xv[j];
      nodes.push_back({1.0 - x - y, x, y});
      weights.push_back(wu[i] * wv[j] * (1.0 - xu[i]));
    }
  symmetrize<3>(rule, nodes, weights);
  return rule;
}

TetrahedronRule build_tetrahedron(int order)
{
  TetrahedronRule rule;
  rule.order = order;
  if (order == 1)
  {
    rule.nodes.push_back({0.25, 0.25, 0.25, 0.25});
    rule.weights.push_back(1.0 / 6.0);
    return rule;
  }
  // x = u, y = (1-u) v, z = (1-u)(1-v) w, Jacobian (1-u)^2 (1-v).
  std::vector<double> xu, wu, xv, wv, xw, ww;
  gauss_legendre((order + 4) / 2, xu, wu);
  gauss_legendre((order + 3) / 2, xv, wv);
  gauss_legendre((order + 2) / 2, xw, ww);
  std::vector<std::array<double, 4>> nodes;
  std::vector<double> weights;
  for (std::size_t i = 0; i < xu.size(); ++i)
    for (std::size_t j = 0; j < xv.size(); ++j)
      for (std::size_t k = 0; k < xw.size(); ++k)
      {
        const double u = xu[i], v = xv[j], w = xw[k];
        const double x = u;
        const double y = (1.0 - u) * v;
        const double z = (1.0 - u) * (1.0 - v) * w;
        nodes.push_back({1.0 - x - y - z, x, y, z});
        weights.push_back(wu[i] * wv[j] * ww[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
      }
  symmetrize<4>(rule, nodes, weights);
  return rule;
}

void check_order(int order)
{
  if (order < 1 || order > max_quadrature_order)
    throw std::invalid_argument(fmt::format("unsupported quadrature order {} (1..{})", order, max_quadrature_order));
}

} // namespace

const TriangleRule &triangle_rule(int order)
{
  check_order(order);
  static const std::vector<TriangleRule> rules = [] {
    std::vector<TriangleRule> r;
    for (int o = 1; o <= max_quadrature_order; ++o)
      r.push_back(build_triangle(o));
    return r;
  }();
  return rules[order - 1];
}

const TetrahedronRule &tetrahedron_rule(int order)
{
  check_order(order);
  static const std::vector<TetrahedronRule> rules = [] {
    std::vector<TetrahedronRule> r;
    for (int o = 1; o <= max_quadrature_order; ++o)
      r.push_back(build_tetrahedron(o));
    return r;
  }();
  return rules[order - 1];
}

namespace
{
int raw_order(double kappa, Complex eps_r, double h, int safety)
{
  return static_cast<int>(std::ceil(kappa * std::abs(std::sqrt(eps_r)) * h)) + safety;
}
} // namespace

int face_quadrature_order(double kappa, Complex eps_r, double h, int safety)
{
  return std::clamp(raw_order(kappa, eps_r, h, safety), 1, max_quadrature_order);
}

bool face_quadrature_clamped(double kappa, Complex eps_r, double h, int safety)
{
  return raw_order(kappa, eps_r, h, safety) > max_quadrature_order;
}

MappedPoints map_rule(const TriangleRule &rule, const std::array<Vec3, 3> &c)
{
  const double area = 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
  MappedPoints m;
  m.points.reserve(rule.size());
  m.weights.reserve(rule.size());
  for (int q = 0; q < rule.size(); ++q)
  {
    const auto &b = rule.nodes[q];
    m.points.push_back(b[0] * c[0] + b[1] * c[1] + b[2] * c[2]);
    m.weights.push_back(2.0 * area * rule.weights[q]);
  }
  return m;
}

MappedPoints map_rule(const TetrahedronRule &rule, const std::array<Vec3, 4> &c)
{
  const double volume = std::abs((c[1] - c[0]).dot((c[2] - c[0]).cross(c[3] - c[0]))) / 6.0;
  MappedPoints m;
  m.points.reserve(rule.size());
  m.weights.reserve(rule.size());
  for (int q = 0; q < rule.size(); ++q)
  {
    const auto &b = rule.nodes[q];
    m.points.push_back(b[0] * c[0] + b[1] * c[1] + b[2] * c[2] + b[3] * c[3]);
    m.weights.push_back(6.0 * volume * rule.weights[q]);
  }
  return m;
}

} // namespace uwvf
