#pragma once

#include <array>
#include <vector>

#include "uwvf/types.hpp"

namespace uwvf
{

/// Quadrature on the reference simplex with N vertices. Nodes are barycentric
/// coordinates; weights sum to the reference measure (1/2 for the triangle,
/// 1/6 for the tetrahedron).
template <int N>
struct SimplexRule
{
  int order = 0;
  std::vector<std::array<double, N>> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(weights.size()); }
};

using TriangleRule = SimplexRule<3>;
using TetrahedronRule = SimplexRule<4>;

inline constexpr int max_quadrature_order = 20;

/// Rule exact for polynomials of total degree <= order, 1 <= order <= 20.
/// Order 1 is the centroid rule; higher orders are collapsed Gauss-Legendre
/// rules averaged over all vertex permutations, so every rule is symmetric and
/// has positive weights. Rules are built once and cached.
const TriangleRule &triangle_rule(int order);
const TetrahedronRule &tetrahedron_rule(int order);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights);

/// min(20, ceil(kappa |sqrt(eps_r)| h) + safety).
int face_quadrature_order(double kappa, Complex eps_r, double h, int safety = 6);

/// True when the order above was capped at 20.
bool face_quadrature_clamped(double kappa, Complex eps_r, double h, int safety = 6);

/// Maps a reference rule onto a physical triangle. Weights include the
/// Jacobian, so they sum to the triangle area.
struct MappedPoints
{
  std::vector<Vec3> points;
  std::vector<double> weights;
};

MappedPoints map_rule(const TriangleRule &rule, const std::array<Vec3, 3> &corners);
MappedPoints map_rule(const TetrahedronRule &rule, const std::array<Vec3, 4> &corners);

} // namespace uwvf
