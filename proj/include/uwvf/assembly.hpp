#pragma once

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uwvf/mesh.hpp"
#include "uwvf/planewave.hpp"
#include "uwvf/quadrature.hpp"
#include "uwvf/skeleton.hpp"

namespace uwvf
{

/// Boundary data g(x, nu); must be tangential.
using TangentialField = std::function<CVec3(const Vec3 &x, const Vec3 &nu)>;

/// Impedance condition nu x curl E - i k lambda E_T = Q (nu x curl E + i k lambda E_T) + g.
struct BoundarySpec
{
  double Q = 0.0;
  double lambda = 1.0;
  TangentialField data; // empty: g = 0
};

struct ProblemSpec
{
  double kappa = 1.0;
  MaterialTable materials;
  std::map<int, BoundarySpec> boundary; // by tag
  double interior_lambda = 1.0;
  int quadrature_safety = 14;
  double condition_cap = 1e12;

  const BoundarySpec &boundary_spec(int tag) const;
  /// lambda on face f (interior value or the boundary tag's value).
  double face_lambda(const Mesh &mesh, int f) const;
};

/// Gauss points of a mesh face in canonical vertex order. Both incident
/// elements integrate over exactly these points.
MappedPoints face_points(const Mesh &mesh, int f, const ProblemSpec &spec, int *order = nullptr);

/// Rows (3 q + c) hold component c of the F^+ or F^- trace of every basis
/// function at point q, scaled by sqrt(w_q / lambda).
Eigen::MatrixXcd trace_matrix(const LocalBasis &basis, const Vec3 &nu, const MappedPoints &points, double kappa,
                              double lambda, TraceSign sign);

/// Eigen-decomposition of a Hermitian block with an eigenvalue floor of
/// 1e-14 of the largest eigenvalue.
struct HermitianFactor
{
  Eigen::MatrixXcd vectors;
  Eigen::VectorXd values;  // floored
  double min_eigenvalue = 0.0; // raw
  double condition = std::numeric_limits<double>::infinity();

  static HermitianFactor compute(const Eigen::MatrixXcd &block);

  Eigen::VectorXcd solve(const Eigen::Ref<const Eigen::VectorXcd> &rhs) const;
  Eigen::MatrixXcd inverse_sqrt() const;
  Eigen::MatrixXcd sqrt() const;
};

struct CouplingBlock
{
  int row = -1;  // tested element K
  int col = -1;  // element whose flux enters: the neighbor, or K on the boundary
  int face = -1; // global face index
  Eigen::MatrixXcd matrix;
};

/// D chi = C chi + b.
struct AssembledSystem
{
  std::vector<int> offsets;
  std::vector<Eigen::MatrixXcd> D;
  std::vector<HermitianFactor> D_factor;
  std::vector<std::vector<CouplingBlock>> C; // per row element, by local face
  SkeletonVector b;

  double kappa = 0.0;
  std::vector<std::string> warnings;

  int size() const { return offsets.back(); }
  int n_blocks() const { return static_cast<int>(D.size()); }
  int n_coupling_blocks() const;
  SkeletonVector zero_vector() const { return SkeletonVector(offsets); }

  Eigen::MatrixXcd dense_D() const;
  Eigen::MatrixXcd dense_C() const;
};

/// D_K[m, n] = sum over faces of int (1/lambda) F^+_n . conj(F^+_m).
Eigen::MatrixXcd assemble_local_D(const Mesh &mesh, int k, const LocalBasis &basis, const ProblemSpec &spec);

/// Block for interior face f tested on element `row`: maps the neighbor's
/// coefficients to -int (1/lambda) F^+_{K'} . conj(F^-_K).
Eigen::MatrixXcd assemble_coupling(const Mesh &mesh, int f, int row, const LocalBasis &row_basis,
                                   const LocalBasis &col_basis, const ProblemSpec &spec);

/// Q int (1/lambda) F^+_n . conj(F^-_m) on boundary face f.
Eigen::MatrixXcd assemble_boundary(const Mesh &mesh, int f, const LocalBasis &basis, const ProblemSpec &spec);

/// b_m = int (1/lambda) g . conj(F^-_m) on boundary face f. Throws
/// AssemblyError when g has a normal component.
Eigen::VectorXcd assemble_rhs(const Mesh &mesh, int f, const LocalBasis &basis, const ProblemSpec &spec);

/// Parallel over elements; each block is written by one worker. Throws
/// AssemblyError listing every element whose D_K is indefinite or exceeds
/// the condition cap.
AssembledSystem assemble_system(const Mesh &mesh, const std::vector<LocalBasis> &bases, const ProblemSpec &spec,
                                Execution exec = {});

/// Bases with the same Hammersley set of p directions on every element.
std::vector<LocalBasis> uniform_bases(const Mesh &mesh, const MaterialTable &materials, double kappa, int p);
std::vector<LocalBasis> make_bases(const Mesh &mesh, const MaterialTable &materials, double kappa,
                                   const std::vector<int> &directions_per_element);

std::size_t dof_count(std::span<const int> directions_per_element);

/// ASCII dump: one record per block, "<kind> <row> <col> <rows> <cols>"
/// followed by row-major "re im" pairs.
std::string dump_system(const AssembledSystem &system);

namespace reference
{
/// Single-threaded assembly kept as the reference for the parallel kernel.
AssembledSystem assemble_system(const Mesh &mesh, const std::vector<LocalBasis> &bases, const ProblemSpec &spec);
} // namespace reference

} // namespace uwvf
