#include "uwvf/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace uwvf
{

const BoundarySpec &ProblemSpec::boundary_spec(int tag) const
{
  auto it = boundary.find(tag);
  if (it == boundary.end())
    throw AssemblyError(fmt::format("no boundary condition for tag {}", tag));
  return it->second;
}

double ProblemSpec::face_lambda(const Mesh &mesh, int f) const
{
  const Face &face = mesh.face(f);
  return face.is_boundary() ? boundary_spec(face.boundary_tag).lambda : interior_lambda;
}

namespace
{

int face_order(const Mesh &mesh, int f, const ProblemSpec &spec, bool *clamped = nullptr)
{
  const Face &face = mesh.face(f);
  const FaceIncidence &first = face.incidence[0];
  const double h = mesh.geometry(first.element).face_diameter[first.local_face];
  int order = 1;
  bool capped = false;
  for (int s = 0; s < face.incident_count; ++s)
  {
    const Complex eps = spec.materials.eps(mesh.region(face.incidence[s].element));
    order = std::max(order, face_quadrature_order(spec.kappa, eps, h, spec.quadrature_safety));
    capped = capped || face_quadrature_clamped(spec.kappa, eps, h, spec.quadrature_safety);
  }
  if (clamped)
    *clamped = capped;
  return order;
}

int local_index(const Mesh &mesh, int k, int f)
{
  for (int i = 0; i < 4; ++i)
    if (mesh.element_face(k, i) == f)
      return i;
  throw AssemblyError(fmt::format("face {} is not a face of element {}", f, k));
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd &m) { return 0.5 * (m + m.adjoint()); }

struct ElementBlocks
{
  Eigen::MatrixXcd D;
  std::vector<CouplingBlock> C;
  Eigen::VectorXcd b;
};

ElementBlocks assemble_element(const Mesh &mesh, int k, const std::vector<LocalBasis> &bases,
                               const ProblemSpec &spec)
{
  const LocalBasis &basis = bases[k];
  const int n = basis.size();
  ElementBlocks out;
  out.D = Eigen::MatrixXcd::Zero(n, n);
  out.b = Eigen::VectorXcd::Zero(n);

  for (int i = 0; i < 4; ++i)
  {
    const int f = mesh.element_face(k, i);
    const Face &face = mesh.face(f);
    const Vec3 &nu = mesh.geometry(k).normal[i];
    const double lambda = spec.face_lambda(mesh, f);
    const MappedPoints pts = face_points(mesh, f, spec);

    const Eigen::MatrixXcd plus = trace_matrix(basis, nu, pts, spec.kappa, lambda, TraceSign::plus);
    const Eigen::MatrixXcd minus = trace_matrix(basis, nu, pts, spec.kappa, lambda, TraceSign::minus);
    out.D += plus.adjoint() * plus;

    if (!face.is_boundary())
    {
      const int nb = mesh.neighbor(k, i);
      const int j = local_index(mesh, nb, f);
      const Vec3 &nu_nb = mesh.geometry(nb).normal[j];
      const Eigen::MatrixXcd plus_nb = trace_matrix(bases[nb], nu_nb, pts, spec.kappa, lambda, TraceSign::plus);
      out.C.push_back(CouplingBlock{k, nb, f, -(minus.adjoint() * plus_nb)});
      continue;
    }

    const BoundarySpec &bc = spec.boundary_spec(face.boundary_tag);
    if (bc.Q != 0.0)
      out.C.push_back(CouplingBlock{k, k, f, bc.Q * (minus.adjoint() * plus)});
    if (bc.data)
    {
      Eigen::VectorXcd g(3 * static_cast<Eigen::Index>(pts.points.size()));
      for (std::size_t q = 0; q < pts.points.size(); ++q)
      {
        const CVec3 value = bc.data(pts.points[q], nu);
        if (std::abs(to_complex(nu).dot(value)) > 1e-10 * std::max(1.0, value.norm()))
          throw AssemblyError(fmt::format("boundary data on face {} is not tangential", f));
        g.segment<3>(3 * q) = value * std::sqrt(pts.weights[q] / lambda);
      }
      out.b += minus.adjoint() * g;
    }
  }
  out.D = hermitian_part(out.D);
  return out;
}

void finalize(AssembledSystem &sys, const Mesh &mesh, const std::vector<LocalBasis> &bases, const ProblemSpec &spec,
              Execution exec)
{
  const int n = sys.n_blocks();
  sys.D_factor.resize(n);
#pragma omp parallel for num_threads(exec.resolved()) schedule(dynamic)
  for (int k = 0; k < n; ++k)
    sys.D_factor[k] = HermitianFactor::compute(sys.D[k]);

  for (int f = 0; f < mesh.n_faces(); ++f)
  {
    bool clamped = false;
    face_order(mesh, f, spec, &clamped);
    if (clamped)
      sys.warnings.push_back(fmt::format("quadrature order clamped at {} on face {}; integrals may be inaccurate",
                                         max_quadrature_order, f));
  }

  std::string failures;
  for (int k = 0; k < n; ++k)
  {
    const HermitianFactor &fac = sys.D_factor[k];
    if (!(fac.min_eigenvalue > 0.0) || !(fac.condition <= spec.condition_cap))
      failures += fmt::format("\n  element {} (p_K = {}): min eigenvalue {:.3e}, condition {:.3e}", k,
                              bases[k].direction_count(), fac.min_eigenvalue, fac.condition);
  }
  if (!failures.empty())
    throw AssemblyError("D_K is indefinite or exceeds the condition cap:" + failures);
}

void check_inputs(const Mesh &mesh, const std::vector<LocalBasis> &bases, const ProblemSpec &spec)
{
  if (static_cast<int>(bases.size()) != mesh.n_elements())
    throw AssemblyError("one local basis per element is required");
  if (!(spec.kappa > 0.0))
    throw AssemblyError("wavenumber must be positive");
  if (!(spec.interior_lambda > 0.0))
    throw AssemblyError("interior lambda must be positive");
  for (int tag : mesh.boundary_tags())
  {
    const BoundarySpec &bc = spec.boundary_spec(tag);
    if (!(bc.lambda > 0.0))
      throw AssemblyError(fmt::format("lambda on boundary tag {} must be positive", tag));
    if (std::abs(bc.Q) > 1.0)
      throw AssemblyError(fmt::format("|Q| > 1 on boundary tag {}", tag));
  }
}

std::vector<int> basis_sizes(const std::vector<LocalBasis> &bases)
{
  std::vector<int> sizes;
  sizes.reserve(bases.size());
  for (const LocalBasis &b : bases)
    sizes.push_back(b.size());
  return sizes;
}

} // namespace

MappedPoints face_points(const Mesh &mesh, int f, const ProblemSpec &spec, int *order)
{
  const int o = face_order(mesh, f, spec);
  if (order)
    *order = o;
  return map_rule(triangle_rule(o), mesh.face_corners(f));
}

Eigen::MatrixXcd trace_matrix(const LocalBasis &basis, const Vec3 &nu, const MappedPoints &points, double kappa,
                              double lambda, TraceSign sign)
{
  const int nq = static_cast<int>(points.points.size());
  Eigen::MatrixXcd A(3 * nq, basis.size());
  for (int n = 0; n < basis.size(); ++n)
    for (int q = 0; q < nq; ++q)
    {
      const CVec3 t = impedance_trace(basis.evaluate(n, points.points[q]), nu, kappa, lambda, sign);
      A.block<3, 1>(3 * q, n) = t * std::sqrt(points.weights[q] / lambda);
    }
  return A;
}

HermitianFactor HermitianFactor::compute(const Eigen::MatrixXcd &block)
{
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);
  HermitianFactor f;
  f.vectors = es.eigenvectors();
  f.values = es.eigenvalues();
  const double top = f.values.size() ? f.values.maxCoeff() : 0.0;
  f.min_eigenvalue = f.values.size() ? f.values.minCoeff() : 0.0;
  f.condition = f.min_eigenvalue > 0.0 ? top / f.min_eigenvalue : std::numeric_limits<double>::infinity();
  const double floor = 1e-14 * top;
  f.values = f.values.cwiseMax(floor);
  return f;
}

Eigen::VectorXcd HermitianFactor::solve(const Eigen::Ref<const Eigen::VectorXcd> &rhs) const
{
  Eigen::VectorXcd y = vectors.adjoint() * rhs;
  y.array() /= values.array();
  return vectors * y;
}

Eigen::MatrixXcd HermitianFactor::inverse_sqrt() const
{
  return vectors * values.cwiseSqrt().cwiseInverse().asDiagonal() * vectors.adjoint();
}

Eigen::MatrixXcd HermitianFactor::sqrt() const
{
  return vectors * values.cwiseSqrt().asDiagonal() * vectors.adjoint();
}

int AssembledSystem::n_coupling_blocks() const
{
  int n = 0;
  for (const auto &row : C)
    n += static_cast<int>(row.size());
  return n;
}

Eigen::MatrixXcd AssembledSystem::dense_D() const
{
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(size(), size());
  for (int k = 0; k < n_blocks(); ++k)
    M.block(offsets[k], offsets[k], D[k].rows(), D[k].cols()) = D[k];
  return M;
}

Eigen::MatrixXcd AssembledSystem::dense_C() const
{
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(size(), size());
  for (const auto &row : C)
    for (const CouplingBlock &blk : row)
      M.block(offsets[blk.row], offsets[blk.col], blk.matrix.rows(), blk.matrix.cols()) += blk.matrix;
  return M;
}

Eigen::MatrixXcd assemble_local_D(const Mesh &mesh, int k, const LocalBasis &basis, const ProblemSpec &spec)
{
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(basis.size(), basis.size());
  for (int i = 0; i < 4; ++i)
  {
    const int f = mesh.element_face(k, i);
    const double lambda = spec.face_lambda(mesh, f);
    const Eigen::MatrixXcd plus = trace_matrix(basis, mesh.geometry(k).normal[i], face_points(mesh, f, spec),
                                               spec.kappa, lambda, TraceSign::plus);
    D.noalias() += plus.adjoint() * plus;
  }
  return hermitian_part(D);
}

Eigen::MatrixXcd assemble_coupling(const Mesh &mesh, int f, int row, const LocalBasis &row_basis,
                                   const LocalBasis &col_basis, const ProblemSpec &spec)
{
  const Face &face = mesh.face(f);
  if (face.is_boundary())
    throw AssemblyError(fmt::format("face {} is a boundary face", f));
  const int i = local_index(mesh, row, f);
  const int col = mesh.neighbor(row, i);
  const int j = local_index(mesh, col, f);
  const double lambda = spec.face_lambda(mesh, f);
  const MappedPoints pts = face_points(mesh, f, spec);
  const Eigen::MatrixXcd minus =
    trace_matrix(row_basis, mesh.geometry(row).normal[i], pts, spec.kappa, lambda, TraceSign::minus);
  const Eigen::MatrixXcd plus =
    trace_matrix(col_basis, mesh.geometry(col).normal[j], pts, spec.kappa, lambda, TraceSign::plus);
  return -(minus.adjoint() * plus);
}

Eigen::MatrixXcd assemble_boundary(const Mesh &mesh, int f, const LocalBasis &basis, const ProblemSpec &spec)
{
  const Face &face = mesh.face(f);
  if (!face.is_boundary())
    throw AssemblyError(fmt::format("face {} is an interior face", f));
  const BoundarySpec &bc = spec.boundary_spec(face.boundary_tag);
  const int k = face.incidence[0].element;
  const Vec3 &nu = mesh.geometry(k).normal[face.incidence[0].local_face];
  const MappedPoints pts = face_points(mesh, f, spec);
  const Eigen::MatrixXcd plus = trace_matrix(basis, nu, pts, spec.kappa, bc.lambda, TraceSign::plus);
  const Eigen::MatrixXcd minus = trace_matrix(basis, nu, pts, spec.kappa, bc.lambda, TraceSign::minus);
  return bc.Q * (minus.adjoint() * plus);
}

Eigen::VectorXcd assemble_rhs(const Mesh &mesh, int f, const LocalBasis &basis, const ProblemSpec &spec)
{
  const Face &face = mesh.face(f);
  if (!face.is_boundary())
    throw AssemblyError(fmt::format("face {} is an interior face", f));
  const BoundarySpec &bc = spec.boundary_spec(face.boundary_tag);
  if (!bc.data)
    return Eigen::VectorXcd::Zero(basis.size());
  const int k = face.incidence[0].element;
  const Vec3 &nu = mesh.geometry(k).normal[face.incidence[0].local_face];
  const MappedPoints pts = face_points(mesh, f, spec);
  const Eigen::MatrixXcd minus = trace_matrix(basis, nu, pts, spec.kappa, bc.lambda, TraceSign::minus);
  Eigen::VectorXcd g(3 * static_cast<Eigen::Index>(pts.points.size()));
  for (std::size_t q = 0; q < pts.points.size(); ++q)
  {
    const CVec3 value = bc.data(pts.points[q], nu);
    if (std::abs(to_complex(nu).dot(value)) > 1e-10 * std::max(1.0, value.norm()))
      throw AssemblyError(fmt::format("boundary data on face {} is not tangential", f));
    g.segment<3>(3 * q) = value * std::sqrt(pts.weights[q] / bc.lambda);
  }
  return minus.adjoint() * g;
}

AssembledSystem assemble_system(const Mesh &mesh, const std::vector<LocalBasis> &bases, const ProblemSpec &spec,
                                Execution exec)
{
  check_inputs(mesh, bases, spec);
  const int n = mesh.n_elements();
  AssembledSystem sys;
  sys.kappa = spec.kappa;
  sys.offsets = block_offsets(basis_sizes(bases));
  sys.D.resize(n);
  sys.C.resize(n);
  sys.b = SkeletonVector(sys.offsets);

  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for num_threads(exec.resolved()) schedule(dynamic)
  for (int k = 0; k < n; ++k)
  {
    try
    {
      ElementBlocks blocks = assemble_element(mesh, k, bases, spec);
      sys.D[k] = std::move(blocks.D);
      sys.C[k] = std::move(blocks.C);
      sys.b.block(k) = blocks.b;
    }
    catch (...)
    {
      errors[k] = std::current_exception();
    }
  }
  for (const auto &e : errors)
    if (e)
      std::rethrow_exception(e);

  finalize(sys, mesh, bases, spec, exec);
  return sys;
}

namespace reference
{

// Face-by-face traversal: every face scatters its contributions into the
// rows of its incident elements.
AssembledSystem assemble_system(const Mesh &mesh, const std::vector<LocalBasis> &bases, const ProblemSpec &spec)
{
  check_inputs(mesh, bases, spec);
  const int n = mesh.n_elements();
  AssembledSystem sys;
  sys.kappa = spec.kappa;
  sys.offsets = block_offsets(basis_sizes(bases));
  sys.C.resize(n);
  sys.b = SkeletonVector(sys.offsets);
  // Per-face contributions are buffered and summed in local face order, so
  // the floating-point result matches the element-wise kernel.
  std::vector<std::array<Eigen::MatrixXcd, 4>> d_parts(n);
  std::vector<std::array<Eigen::VectorXcd, 4>> b_parts(n);
  std::vector<std::array<CouplingBlock, 4>> slots(n);
  std::vector<std::array<bool, 4>> used(n, {false, false, false, false});

  for (int f = 0; f < mesh.n_faces(); ++f)
  {
    const Face &face = mesh.face(f);
    const double lambda = spec.face_lambda(mesh, f);
    const MappedPoints pts = face_points(mesh, f, spec);
    std::array<Eigen::MatrixXcd, 2> plus, minus;
    for (int s = 0; s < face.incident_count; ++s)
    {
      const FaceIncidence &inc = face.incidence[s];
      const Vec3 &nu = mesh.geometry(inc.element).normal[inc.local_face];
      plus[s] = trace_matrix(bases[inc.element], nu, pts, spec.kappa, lambda, TraceSign::plus);
      minus[s] = trace_matrix(bases[inc.element], nu, pts, spec.kappa, lambda, TraceSign::minus);
      d_parts[inc.element][inc.local_face] = plus[s].adjoint() * plus[s];
    }
    if (face.incident_count == 2)
    {
      for (int s = 0; s < 2; ++s)
      {
        const FaceIncidence &me = face.incidence[s], &other = face.incidence[1 - s];
        slots[me.element][me.local_face] =
          CouplingBlock{me.element, other.element, f, -(minus[s].adjoint() * plus[1 - s])};
        used[me.element][me.local_face] = true;
      }
      continue;
    }
    const FaceIncidence &inc = face.incidence[0];
    const BoundarySpec &bc = spec.boundary_spec(face.boundary_tag);
    if (bc.Q != 0.0)
    {
      slots[inc.element][inc.local_face] =
        CouplingBlock{inc.element, inc.element, f, bc.Q * (minus[0].adjoint() * plus[0])};
      used[inc.element][inc.local_face] = true;
    }
    if (bc.data)
      b_parts[inc.element][inc.local_face] = assemble_rhs(mesh, f, bases[inc.element], spec);
  }

  for (int k = 0; k < n; ++k)
  {
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(bases[k].size(), bases[k].size());
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(bases[k].size());
    for (int i = 0; i < 4; ++i)
    {
      D += d_parts[k][i];
      if (b_parts[k][i].size() > 0)
        b += b_parts[k][i];
    }
    sys.D.push_back(hermitian_part(D));
    sys.b.block(k) = b;
    for (int i = 0; i < 4; ++i)
      if (used[k][i])
        sys.C[k].push_back(std::move(slots[k][i]));
  }
  finalize(sys, mesh, bases, spec, Execution{1});
  return sys;
}

} // namespace reference

std::vector<LocalBasis> make_bases(const Mesh &mesh, const MaterialTable &materials, double kappa,
                                   const std::vector<int> &directions_per_element)
{
  if (static_cast<int>(directions_per_element.size()) != mesh.n_elements())
    throw AssemblyError("one direction count per element is required");
  std::vector<LocalBasis> bases;
  bases.reserve(mesh.n_elements());
  for (int k = 0; k < mesh.n_elements(); ++k)
    bases.emplace_back(k, DirectionSet::cached(directions_per_element[k]), kappa, materials.eps(mesh.region(k)));
  return bases;
}

std::vector<LocalBasis> uniform_bases(const Mesh &mesh, const MaterialTable &materials, double kappa, int p)
{
  return make_bases(mesh, materials, kappa, std::vector<int>(mesh.n_elements(), p));
}

std::size_t dof_count(std::span<const int> directions_per_element)
{
  return std::accumulate(directions_per_element.begin(), directions_per_element.end(), std::size_t{0},
                         [](std::size_t acc, int p) { return acc + 2 * static_cast<std::size_t>(p); });
}

std::string dump_system(const AssembledSystem &sys)
{
  std::string out = fmt::format("uwvf-system 1\nsize {} blocks {}\n", sys.size(), sys.n_blocks());
  auto write_matrix = [&out](const Eigen::MatrixXcd &m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
    {
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        out += fmt::format("{}{:.17g} {:.17g}", c ? " " : "", m(r, c).real(), m(r, c).imag());
      out += '\n';
    }
  };
  for (int k = 0; k < sys.n_blocks(); ++k)
  {
    out += fmt::format("D {} {} {} {}\n", k, k, sys.D[k].rows(), sys.D[k].cols());
    write_matrix(sys.D[k]);
  }
  for (const auto &row : sys.C)
    for (const CouplingBlock &blk : row)
    {
      out += fmt::format("C {} {} {} {}\n", blk.row, blk.col, blk.matrix.rows(), blk.matrix.cols());
      write_matrix(blk.matrix);
    }
  for (int k = 0; k < sys.n_blocks(); ++k)
  {
    out += fmt::format("b {} 0 {} 1\n", k, sys.b.block_size(k));
    write_matrix(sys.b.block(k));
  }
  return out;
}

} // namespace uwvf
