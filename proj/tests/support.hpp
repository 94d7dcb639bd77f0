#pragma once

// Shared fixtures for the unit tests and the acceptance driver: small meshes,
// problem setups, and an oracle evaluation of the UWVF blocks that avoids the
// production quadrature and trace code.

#include <random>

#include "uwvf/assembly.hpp"
#include "uwvf/postprocess.hpp"
#include "uwvf/solve.hpp"

namespace support
{

using namespace uwvf;

/// Reference tetrahedron; all faces carry tag 0.
Mesh one_tet_mesh();
/// Two tetrahedra sharing the face {1,2,3}; element 1 is in region 1.
Mesh two_tet_mesh();
/// Random well-shaped tetrahedron with longest edge close to `size`.
std::array<Vec3, 4> random_tet(std::mt19937_64 &rng, double size);
Mesh single_element(const std::array<Vec3, 4> &corners);

/// Problem with the same Q and lambda on every boundary tag of the mesh and,
/// when `exact` is given, manufactured data for it.
ProblemSpec uniform_problem(const Mesh &mesh, double kappa, const MaterialTable &materials, double Q,
                            const ExactSolution *exact = nullptr, double lambda = 1.0);

/// Trace amplitude a with F(x) = a exp(i kappa s d.x), written out by hand:
/// nu x (i kappa s d x p) +/- i kappa lambda (p - (p.nu) nu).
CVec3 trace_amplitude(const Vec3 &d, const Vec3 &p, Complex kappa_s, const Vec3 &nu, double kappa, double lambda,
                      int sign);

/// Oracle value of int (1/lambda) F_n . conj(F_m) over a triangle, where F_n
/// is a trace of a plane wave with wave number kn along dn.
Complex oracle_pair(const CVec3 &an, Complex kn, const Vec3 &dn, const CVec3 &am, Complex km, const Vec3 &dm,
                    double lambda, const std::array<Vec3, 3> &corners);

/// Boundary data g = c_T exp(i kappa_g k.x) for a fixed complex vector c.
struct PlaneData
{
  CVec3 c;
  Complex kg;
  Vec3 k;
  CVec3 operator()(const Vec3 &x, const Vec3 &nu) const;
};

/// D, C and b for `mesh` composed from oracle face integrals.
struct OracleSystem
{
  Eigen::MatrixXcd D, C;
  Eigen::VectorXcd b;
};
OracleSystem oracle_system(const Mesh &mesh, const std::vector<LocalBasis> &bases, const ProblemSpec &spec,
                           const PlaneData *data);

/// Largest singular value of D^-1/2 C D^-1/2.
double contraction_sigma(const AssembledSystem &sys);

/// Sum over the element's faces of int (1/lambda) F_sign(E) . conj(F_sign(xi)).
Complex element_trace_product(const Mesh &mesh, int k, const ProblemSpec &spec, const FieldEvaluator &E,
                              const FieldEvaluator &xi, TraceSign sign);

double relative_difference(const Eigen::VectorXcd &a, const Eigen::VectorXcd &b);

} // namespace support
