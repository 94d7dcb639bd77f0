#pragma once

#include <array>

#include "uwvf/types.hpp"

namespace uwvf
{

/// Integral of exp(i w.x) over a physical triangle, for a complex wave vector w.
///
/// Ground truth for tests. Uses adaptive midpoint subdivision with a collapsed
/// 10x10 Gauss rule whose nodes come from an eigenvalue solve, so it shares no
/// code with the production quadrature. Each triangle is refined until the
/// parent and the sum of its four children agree to `rel_tol` times the
/// integral of |exp(i w.x)|; more than 12 levels throws std::runtime_error.
Complex oscillatory_face_integral(const CVec3 &wave_vector, const std::array<Vec3, 3> &corners,
                                  double rel_tol = 1e-13);

/// Integral of exp(i kc d.x) over a triangle.
Complex oscillatory_face_oracle(Complex kc, const Vec3 &d, const std::array<Vec3, 3> &corners,
                                double rel_tol = 1e-13);

} // namespace uwvf
