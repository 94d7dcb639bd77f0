#include "uwvf/tipdg.hpp"

#include <Eigen/SparseLU>
#include <fmt/format.h>

namespace uwvf
{

TIPDGParams TIPDGParams::uwvf_equivalent(double lambda)
{
  return TIPDGParams{0.5 * lambda, 0.5 / lambda, 0.5, true};
}

namespace
{

// Per basis function, at every quadrature point: E and curl E, scaled by sqrt(w).
struct Samples
{
  Eigen::MatrixXcd E, curlE; // rows 3 q + c
};

Samples sample(const LocalBasis &basis, const MappedPoints &pts)
{
  const int nq = static_cast<int>(pts.points.size());
  Samples s{Eigen::MatrixXcd(3 * nq, basis.size()), Eigen::MatrixXcd(3 * nq, basis.size())};
  for (int n = 0; n < basis.size(); ++n)
    for (int q = 0; q < nq; ++q)
    {
      const FieldValue v = basis.evaluate(n, pts.points[q]);
      const double sw = std::sqrt(pts.weights[q]);
      s.E.block<3, 1>(3 * q, n) = v.E * sw;
      s.curlE.block<3, 1>(3 * q, n) = v.curlE * sw;
    }
  return s;
}

// Column-wise nu x v for stacked 3-vectors.
Eigen::MatrixXcd cross_rows(const Vec3 &nu, const Eigen::MatrixXcd &m)
{
  Eigen::MatrixXcd out(m.rows(), m.cols());
  for (Eigen::Index q = 0; q < m.rows() / 3; ++q)
    for (Eigen::Index n = 0; n < m.cols(); ++n)
      out.block<3, 1>(3 * q, n) = cross(nu, CVec3(m.block<3, 1>(3 * q, n)));
  return out;
}

Eigen::MatrixXcd tangential_rows(const Vec3 &nu, const Eigen::MatrixXcd &m)
{
  Eigen::MatrixXcd out(m.rows(), m.cols());
  for (Eigen::Index q = 0; q < m.rows() / 3; ++q)
    for (Eigen::Index n = 0; n < m.cols(); ++n)
      out.block<3, 1>(3 * q, n) = tangential(CVec3(m.block<3, 1>(3 * q, n)), nu);
  return out;
}

int local_face_of(const Mesh &mesh, int k, int f)
{
  for (int i = 0; i < 4; ++i)
    if (mesh.element_face(k, i) == f)
      return i;
  return -1;
}

void check_params(const Mesh &mesh, const ProblemSpec &spec, const TIPDGParams &params)
{
  if (!(params.alpha > 0.0))
    throw AssemblyError("TIPDG penalty alpha must be positive");
  if (params.equivalence_check)
    for (int r : mesh.region_ids())
      if (spec.materials.eps(r).imag() != 0.0)
        throw AssemblyError(fmt::format("UWVF/TIPDG equivalence does not hold for absorbing media (complex "
                                        "eps_r in region {})",
                                        r));
}

} // namespace

Eigen::MatrixXcd tipdg_interior_face(const Mesh &mesh, int f, const std::vector<LocalBasis> &bases,
                                     const ProblemSpec &spec, const TIPDGParams &params)
{
  const Face &face = mesh.face(f);
  if (face.is_boundary())
    throw AssemblyError(fmt::format("face {} is a boundary face", f));
  check_params(mesh, spec, params);
  const MappedPoints pts = face_points(mesh, f, spec);
  const double kappa = spec.kappa;

  std::array<int, 2> elem{}, size{};
  std::array<Vec3, 2> nu;
  std::array<Samples, 2> s;
  for (int side = 0; side < 2; ++side)
  {
    const FaceIncidence &inc = face.incidence[side];
    elem[side] = inc.element;
    nu[side] = mesh.geometry(inc.element).normal[inc.local_face];
    s[side] = sample(bases[inc.element], pts);
    size[side] = bases[inc.element].size();
  }

  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(size[0] + size[1], size[0] + size[1]);
  const Complex b_over_ik = params.beta / (I * kappa);
  const Complex ik_alpha = I * kappa * params.alpha;
  for (int t = 0; t < 2; ++t)
  {
    // Jumps of the test function from side t alone.
    const Eigen::MatrixXcd jump_curl_xi = cross_rows(nu[t], s[t].curlE);
    const Eigen::MatrixXcd jump_xi = cross_rows(nu[t], s[t].E);
    for (int e = 0; e < 2; ++e)
    {
      const Eigen::MatrixXcd E_hat = 0.5 * s[e].E + b_over_ik * cross_rows(nu[e], s[e].curlE);
      const Eigen::MatrixXcd H_hat = 0.5 * s[e].curlE - ik_alpha * cross_rows(nu[e], s[e].E);
      A.block(t * size[0], e * size[0], size[t], size[e]) =
        -(jump_curl_xi.adjoint() * E_hat + jump_xi.adjoint() * H_hat);
    }
  }
  return A;
}

Eigen::MatrixXcd tipdg_boundary_face(const Mesh &mesh, int f, const std::vector<LocalBasis> &bases,
                                     const ProblemSpec &spec, const TIPDGParams &params)
{
  const Face &face = mesh.face(f);
  if (!face.is_boundary())
    throw AssemblyError(fmt::format("face {} is an interior face", f));
  check_params(mesh, spec, params);
  const BoundarySpec &bc = spec.boundary_spec(face.boundary_tag);
  const FaceIncidence &inc = face.incidence[0];
  const Vec3 &nu = mesh.geometry(inc.element).normal[inc.local_face];
  const MappedPoints pts = face_points(mesh, f, spec);
  const Samples s = sample(bases[inc.element], pts);
  const double kl = spec.kappa * bc.lambda;

  const Eigen::MatrixXcd nu_x_curl = cross_rows(nu, s.curlE);
  const Eigen::MatrixXcd R = (1.0 - bc.Q) * nu_x_curl - (I * kl * (1.0 + bc.Q)) * tangential_rows(nu, s.E);
  const Eigen::MatrixXcd nu_x_E_hat = cross_rows(nu, s.E) + (params.delta / (I * kl)) * cross_rows(nu, R);
  const Eigen::MatrixXcd nu_x_H_hat = nu_x_curl - params.delta * R;
  return s.curlE.adjoint() * nu_x_E_hat + s.E.adjoint() * nu_x_H_hat;
}

TIPDGSystem assemble_tipdg(const Mesh &mesh, const std::vector<LocalBasis> &bases, const ProblemSpec &spec,
                           const TIPDGParams &params)
{
  check_params(mesh, spec, params);
  if (static_cast<int>(bases.size()) != mesh.n_elements())
    throw AssemblyError("one local basis per element is required");

  TIPDGSystem sys;
  std::vector<int> sizes;
  for (const LocalBasis &b : bases)
    sizes.push_back(b.size());
  sys.offsets = block_offsets(sizes);
  const int n = sys.offsets.back();
  sys.rhs = Eigen::VectorXcd::Zero(n);

  std::vector<Eigen::Triplet<Complex>> triplets;
  auto scatter = [&](const Eigen::MatrixXcd &block, int row0, int col0) {
    for (Eigen::Index c = 0; c < block.cols(); ++c)
      for (Eigen::Index r = 0; r < block.rows(); ++r)
        triplets.emplace_back(row0 + r, col0 + c, block(r, c));
  };

  for (int f = 0; f < mesh.n_faces(); ++f)
  {
    const Face &face = mesh.face(f);
    if (!face.is_boundary())
    {
      const Eigen::MatrixXcd A = tipdg_interior_face(mesh, f, bases, spec, params);
      const std::array<int, 2> e{face.incidence[0].element, face.incidence[1].element};
      const std::array<int, 2> sz{bases[e[0]].size(), bases[e[1]].size()};
      for (int t = 0; t < 2; ++t)
        for (int s = 0; s < 2; ++s)
          scatter(A.block(t * sz[0], s * sz[0], sz[t], sz[s]), sys.offsets[e[t]], sys.offsets[e[s]]);
      continue;
    }

    const int k = face.incidence[0].element;
    scatter(tipdg_boundary_face(mesh, f, bases, spec, params), sys.offsets[k], sys.offsets[k]);

    const BoundarySpec &bc = spec.boundary_spec(face.boundary_tag);
    if (!bc.data)
      continue;
    const Vec3 &nu = mesh.geometry(k).normal[local_face_of(mesh, k, f)];
    const MappedPoints pts = face_points(mesh, f, spec);
    const Samples s = sample(bases[k], pts);
    Eigen::VectorXcd g(3 * static_cast<Eigen::Index>(pts.points.size()));
    for (std::size_t q = 0; q < pts.points.size(); ++q)
      g.segment<3>(3 * q) = bc.data(pts.points[q], nu) * std::sqrt(pts.weights[q]);
    const Eigen::MatrixXcd nu_x_g = cross_rows(nu, g);
    const Complex c = params.delta / (I * spec.kappa * bc.lambda);
    sys.rhs.segment(sys.offsets[k], bases[k].size()) += c * (s.curlE.adjoint() * nu_x_g) - params.delta * (s.E.adjoint() * g);
  }

  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

Eigen::VectorXcd solve_tipdg(const TIPDGSystem &system)
{
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(system.matrix);
  if (lu.info() != Eigen::Success)
    throw SolverError("TIPDG factorization failed");
  Eigen::VectorXcd x = lu.solve(system.rhs);
  if (lu.info() != Eigen::Success)
    throw SolverError("TIPDG solve failed");
  return x;
}

} // namespace uwvf
