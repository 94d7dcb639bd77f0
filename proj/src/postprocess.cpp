#include "uwvf/postprocess.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>
#include <fmt/format.h>

namespace uwvf
{

FieldValue ExactSolution::evaluate(const Vec3 &x) const
{
  FieldValue v = eval_plane_wave(direction, polarization, kappa, eps_r, Medium::forward, x);
  v.E *= amplitude;
  v.curlE *= amplitude;
  return v;
}

ExactSolution ExactSolution::plane_wave(const Vec3 &direction, const Vec3 &polarization, double kappa,
                                        const MaterialTable &materials, const Mesh &mesh)
{
  if (std::abs(direction.norm() - 1.0) > 1e-12 || std::abs(polarization.norm() - 1.0) > 1e-12)
    throw ConfigError("plane-wave direction and polarization must be unit vectors");
  if (std::abs(direction.dot(polarization)) > 1e-12)
    throw ConfigError("plane-wave polarization must be orthogonal to its direction");
  const std::vector<int> regions = mesh.region_ids();
  if (!materials.uniform_on(regions))
    throw ConfigError("a global plane wave needs the same permittivity in every region");
  return ExactSolution{direction, polarization, kappa, materials.eps(regions.front()), 1.0};
}

TangentialField manufacture_boundary_data(const ExactSolution &exact, double Q, double lambda)
{
  return [exact, Q, lambda](const Vec3 &x, const Vec3 &nu) {
    const FieldValue v = exact.evaluate(x);
    return CVec3(impedance_trace(v, nu, exact.kappa, lambda, TraceSign::minus) -
                 Q * impedance_trace(v, nu, exact.kappa, lambda, TraceSign::plus));
  };
}

namespace
{

Eigen::Vector4d barycentric(const Mesh &mesh, int k, const Vec3 &x)
{
  const Tet &t = mesh.tet(k);
  const Vec3 &a = mesh.vertex(t[0]);
  Eigen::Matrix3d J;
  J.col(0) = mesh.vertex(t[1]) - a;
  J.col(1) = mesh.vertex(t[2]) - a;
  J.col(2) = mesh.vertex(t[3]) - a;
  const Vec3 l = J.partialPivLu().solve(x - a);
  return {1.0 - l.sum(), l[0], l[1], l[2]};
}

} // namespace

bool element_contains(const Mesh &mesh, int k, const Vec3 &x)
{
  return barycentric(mesh, k, x).minCoeff() >= -1e-12;
}

int locate_element(const Mesh &mesh, const Vec3 &x)
{
  for (int k = 0; k < mesh.n_elements(); ++k)
  {
    const ElementGeometry &g = mesh.geometry(k);
    if ((x - g.centroid).norm() > g.diameter)
      continue;
    if (element_contains(mesh, k, x))
      return k;
  }
  return -1;
}

CVec3 reconstruct_field(const SkeletonVector &chi, const std::vector<LocalBasis> &bases, const Mesh &mesh, int k,
                        const Vec3 &x)
{
  if (!element_contains(mesh, k, x))
    throw std::invalid_argument(fmt::format("point ({}, {}, {}) is outside element {}", x[0], x[1], x[2], k));
  return bases[k].combine(chi.block(k), x);
}

ErrorNorms error_norms(const Mesh &mesh, const std::vector<LocalBasis> &bases, const SkeletonVector &chi,
                       const ExactSolution &exact, const ProblemSpec &spec, Execution exec)
{
  const int n = mesh.n_elements();
  std::vector<double> vol_err(n), vol_ref(n), tr_err(n), tr_ref(n);

#pragma omp parallel for num_threads(exec.resolved()) schedule(dynamic)
  for (int k = 0; k < n; ++k)
  {
    const LocalBasis &basis = bases[k];
    const auto coeffs = chi.block(k);
    const ElementGeometry &g = mesh.geometry(k);
    const Tet &t = mesh.tet(k);

    const int order = face_quadrature_order(spec.kappa, basis.eps_r(), g.diameter, spec.quadrature_safety);
    const MappedPoints vol = map_rule(tetrahedron_rule(order), {mesh.vertex(t[0]), mesh.vertex(t[1]),
                                                                mesh.vertex(t[2]), mesh.vertex(t[3])});
    double e2 = 0.0, r2 = 0.0;
    for (std::size_t q = 0; q < vol.points.size(); ++q)
    {
      const CVec3 E = exact.evaluate(vol.points[q]).E;
      e2 += vol.weights[q] * (basis.combine(coeffs, vol.points[q]) - E).squaredNorm();
      r2 += vol.weights[q] * E.squaredNorm();
    }
    vol_err[k] = e2;
    vol_ref[k] = r2;

    double te2 = 0.0, tr2 = 0.0;
    for (int i = 0; i < 4; ++i)
    {
      const int f = mesh.element_face(k, i);
      const double lambda = spec.face_lambda(mesh, f);
      const Vec3 &nu = g.normal[i];
      const MappedPoints pts = face_points(mesh, f, spec);
      for (std::size_t q = 0; q < pts.points.size(); ++q)
      {
        FieldValue h{CVec3::Zero(), CVec3::Zero()};
        for (int m = 0; m < basis.size(); ++m)
        {
          const FieldValue v = basis.evaluate(m, pts.points[q]);
          h.E += coeffs[m] * v.E;
          h.curlE += coeffs[m] * v.curlE;
        }
        const FieldValue e = exact.evaluate(pts.points[q]);
        const FieldValue diff{h.E - e.E, h.curlE - e.curlE};
        const double w = pts.weights[q] / lambda;
        te2 += w * impedance_trace(diff, nu, spec.kappa, lambda, TraceSign::plus).squaredNorm();
        tr2 += w * impedance_trace(e, nu, spec.kappa, lambda, TraceSign::plus).squaredNorm();
      }
    }
    tr_err[k] = te2;
    tr_ref[k] = tr2;
  }

  ErrorNorms out;
  out.volume_abs = std::sqrt(tree_sum(std::span<const double>(vol_err)));
  out.trace_abs = std::sqrt(tree_sum(std::span<const double>(tr_err)));
  const double vref = std::sqrt(tree_sum(std::span<const double>(vol_ref)));
  const double tref = std::sqrt(tree_sum(std::span<const double>(tr_ref)));
  out.volume_rel = vref > 0.0 ? out.volume_abs / vref : out.volume_abs;
  out.trace_rel = tref > 0.0 ? out.trace_abs / tref : out.trace_abs;
  return out;
}

std::vector<FieldSample> sample_slice(const Mesh &mesh, const std::vector<LocalBasis> &bases,
                                      const SkeletonVector &chi, const SliceSpec &slice, Execution exec)
{
  if (slice.nu < 1 || slice.nv < 1)
    throw std::invalid_argument("slice resolution must be positive");
  const int total = slice.nu * slice.nv;
  std::vector<FieldSample> samples(total);
#pragma omp parallel for num_threads(exec.resolved()) schedule(dynamic)
  for (int idx = 0; idx < total; ++idx)
  {
    const int i = idx % slice.nu, j = idx / slice.nu;
    const double s = slice.nu > 1 ? double(i) / (slice.nu - 1) : 0.0;
    const double t = slice.nv > 1 ? double(j) / (slice.nv - 1) : 0.0;
    FieldSample &out = samples[idx];
    out.point = slice.origin + s * slice.u + t * slice.v;
    out.element = locate_element(mesh, out.point);
    if (out.element >= 0)
      out.E = bases[out.element].combine(chi.block(out.element), out.point);
  }
  return samples;
}

std::string slice_csv(const std::vector<FieldSample> &samples)
{
  std::string out = "x,y,z,ReEx,ImEx,ReEy,ImEy,ReEz,ImEz,element\n";
  for (const FieldSample &s : samples)
  {
    out += fmt::format("{:.17g},{:.17g},{:.17g}", s.point.x(), s.point.y(), s.point.z());
    for (int c = 0; c < 3; ++c)
      out += fmt::format(",{:.17g},{:.17g}", s.E[c].real(), s.E[c].imag());
    out += fmt::format(",{}\n", s.element);
  }
  return out;
}

} // namespace uwvf
