#pragma once

#include <Eigen/Sparse>

#include "uwvf/assembly.hpp"

namespace uwvf
{

/// Flux weights of the Trefftz interior-penalty scheme. On interior faces
///   E^ = {{E}} + beta/(i k) [[curl E]],   H^ = {{curl E}} - i k alpha [[E]],
/// and on impedance faces, with R = (1-Q) nu x curl E - i k lambda (1+Q) E_T - g,
///   nu x E^ = nu x E + delta/(i k lambda) nu x R,   nu x H^ = nu x curl E - delta R.
struct TIPDGParams
{
  double alpha = 0.5;
  double beta = 0.5;
  double delta = 0.5;
  /// Refuse complex permittivity: the scheme is only equivalent to the UWVF
  /// for real eps_r.
  bool equivalence_check = false;

  /// Weights that reproduce the UWVF for interior impedance weight lambda:
  /// alpha = lambda/2, beta = 1/(2 lambda), delta = 1/2.
  static TIPDGParams uwvf_equivalent(double lambda);
};

struct TIPDGSystem
{
  std::vector<int> offsets;
  Eigen::SparseMatrix<Complex> matrix; // rows: test functions, cols: trial coefficients
  Eigen::VectorXcd rhs;
};

/// a(E, xi) = sum_K int_dK nu_K x E^ . conj(curl xi) + nu_K x H^ . conj(xi),
/// assembled from face integrals only (both E and xi are Trefftz functions).
TIPDGSystem assemble_tipdg(const Mesh &mesh, const std::vector<LocalBasis> &bases, const ProblemSpec &spec,
                           const TIPDGParams &params);

/// Interior-face part (jumps and averages) of a single face as a dense matrix
/// over the coefficients of its two elements, ordered (K+, K-).
Eigen::MatrixXcd tipdg_interior_face(const Mesh &mesh, int f, const std::vector<LocalBasis> &bases,
                                     const ProblemSpec &spec, const TIPDGParams &params);

/// Boundary-face part on the coefficients of the owning element.
Eigen::MatrixXcd tipdg_boundary_face(const Mesh &mesh, int f, const std::vector<LocalBasis> &bases,
                                     const ProblemSpec &spec, const TIPDGParams &params);

Eigen::VectorXcd solve_tipdg(const TIPDGSystem &system);

} // namespace uwvf
