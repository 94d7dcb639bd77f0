#pragma once

#include <string>
#include <vector>

#include "uwvf/assembly.hpp"

namespace uwvf
{

/// Global plane wave E = amplitude p exp(i kappa sqrt(eps_r) d.x), an exact
/// solution of curl curl E - kappa^2 eps_r E = 0 for constant eps_r.
struct ExactSolution
{
  Vec3 direction = Vec3::UnitZ();
  Vec3 polarization = Vec3::UnitX();
  double kappa = 1.0;
  Complex eps_r{1.0, 0.0};
  Complex amplitude{1.0, 0.0};

  FieldValue evaluate(const Vec3 &x) const;

  /// Requires a unit direction, a unit polarization orthogonal to it, and the
  /// same permittivity in every region of the mesh.
  static ExactSolution plane_wave(const Vec3 &direction, const Vec3 &polarization, double kappa,
                                  const MaterialTable &materials, const Mesh &mesh);
};

/// g = (nu x curl E - i k lambda E_T) - Q (nu x curl E + i k lambda E_T).
TangentialField manufacture_boundary_data(const ExactSolution &exact, double Q, double lambda);

/// Index of the lowest-numbered element containing x (barycentric tolerance
/// 1e-12), or -1.
int locate_element(const Mesh &mesh, const Vec3 &x);
bool element_contains(const Mesh &mesh, int k, const Vec3 &x);

/// E_h(x) = sum_n chi_n xi_n(x) on element k. Throws std::invalid_argument
/// if x is outside the element.
CVec3 reconstruct_field(const SkeletonVector &chi, const std::vector<LocalBasis> &bases, const Mesh &mesh, int k,
                        const Vec3 &x);

struct ErrorNorms
{
  double volume_abs = 0.0;
  double volume_rel = 0.0;
  double trace_abs = 0.0; // (sum_K sum_F int (1/lambda) |F^+(E_h - E)|^2)^(1/2)
  double trace_rel = 0.0;
};

ErrorNorms error_norms(const Mesh &mesh, const std::vector<LocalBasis> &bases, const SkeletonVector &chi,
                       const ExactSolution &exact, const ProblemSpec &spec, Execution exec = {});

struct FieldSample
{
  Vec3 point = Vec3::Zero();
  CVec3 E = CVec3::Zero();
  int element = -1; // -1: outside the mesh
};

/// Grid origin + i/(nu-1) u + j/(nv-1) v for i < nu, j < nv.
struct SliceSpec
{
  std::string name = "slice";
  Vec3 origin = Vec3::Zero();
  Vec3 u = Vec3::UnitX();
  Vec3 v = Vec3::UnitY();
  int nu = 2;
  int nv = 2;
};

std::vector<FieldSample> sample_slice(const Mesh &mesh, const std::vector<LocalBasis> &bases,
                                      const SkeletonVector &chi, const SliceSpec &slice, Execution exec = {});

/// Columns x,y,z,ReEx,ImEx,ReEy,ImEy,ReEz,ImEz,element; element is -1 for
/// points outside the mesh.
std::string slice_csv(const std::vector<FieldSample> &samples);

} // namespace uwvf
