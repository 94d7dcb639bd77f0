#include "support.hpp"

#include <Eigen/SVD>

#include "uwvf/oracle.hpp"

namespace support
{

namespace
{

CVec3 plain_cross(const CVec3 &a, const CVec3 &b)
{
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Outward unit normal of the face opposite local vertex i, from the raw corners.
Vec3 outward_normal(const Mesh &mesh, int k, int i)
{
  const Tet &t = mesh.tet(k);
  std::array<Vec3, 3> c;
  int n = 0;
  for (int j = 0; j < 4; ++j)
    if (j != i)
      c[n++] = mesh.vertex(t[j]);
  Vec3 normal = (c[1] - c[0]).cross(c[2] - c[0]).normalized();
  if (normal.dot(mesh.vertex(t[i]) - c[0]) > 0)
    normal = -normal;
  return normal;
}

std::array<Vec3, 3> corners_of(const Mesh &mesh, int f)
{
  const Triangle &v = mesh.face(f).vertices;
  return {mesh.vertex(v[0]), mesh.vertex(v[1]), mesh.vertex(v[2])};
}

} // namespace

Mesh one_tet_mesh()
{
  return Mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, {Tet{0, 1, 2, 3}}, {0}, {});
}

Mesh two_tet_mesh()
{
  return Mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(0.8, 0.9, 0.7)},
              {Tet{0, 1, 2, 3}, Tet{4, 1, 2, 3}}, {0, 1}, {});
}

std::array<Vec3, 4> random_tet(std::mt19937_64 &rng, double size)
{
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::array<Vec3, 4> regular{Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  const Vec3 shift(u(rng), u(rng), u(rng));
  std::array<Vec3, 4> c;
  for (int i = 0; i < 4; ++i)
    c[i] = (regular[i] + 0.3 * Vec3(u(rng), u(rng), u(rng))) * (size / std::sqrt(8.0)) + shift;
  return c;
}

Mesh single_element(const std::array<Vec3, 4> &corners)
{
  return Mesh({corners.begin(), corners.end()}, {Tet{0, 1, 2, 3}}, {0}, {});
}

ProblemSpec uniform_problem(const Mesh &mesh, double kappa, const MaterialTable &materials, double Q,
                            const ExactSolution *exact, double lambda)
{
  ProblemSpec spec;
  spec.kappa = kappa;
  spec.materials = materials;
  spec.interior_lambda = lambda;
  for (int tag : mesh.boundary_tags())
  {
    BoundarySpec b;
    b.Q = Q;
    b.lambda = lambda;
    if (exact)
      b.data = manufacture_boundary_data(*exact, Q, lambda);
    spec.boundary[tag] = b;
  }
  return spec;
}

CVec3 trace_amplitude(const Vec3 &d, const Vec3 &p, Complex kappa_s, const Vec3 &nu, double kappa, double lambda,
                      int sign)
{
  const CVec3 n = nu.cast<Complex>();
  const CVec3 curl = Complex(0, 1) * kappa_s * plain_cross(d.cast<Complex>(), p.cast<Complex>());
  const CVec3 pt = (p - p.dot(nu) * nu).cast<Complex>();
  return plain_cross(n, curl) + double(sign) * Complex(0, kappa * lambda) * pt;
}

Complex oracle_pair(const CVec3 &an, Complex kn, const Vec3 &dn, const CVec3 &am, Complex km, const Vec3 &dm,
                    double lambda, const std::array<Vec3, 3> &corners)
{
  Complex amplitude = 0;
  for (int c = 0; c < 3; ++c)
    amplitude += an[c] * std::conj(am[c]);
  const CVec3 w = kn * dn.cast<Complex>() - std::conj(km) * dm.cast<Complex>();
  return amplitude / lambda * oscillatory_face_integral(w, corners);
}

CVec3 PlaneData::operator()(const Vec3 &x, const Vec3 &nu) const
{
  const CVec3 n = nu.cast<Complex>();
  Complex cn = 0;
  for (int i = 0; i < 3; ++i)
    cn += c[i] * n[i];
  return (c - cn * n) * std::exp(Complex(0, 1) * kg * k.dot(x));
}

OracleSystem oracle_system(const Mesh &mesh, const std::vector<LocalBasis> &bases, const ProblemSpec &spec,
                           const PlaneData *data)
{
  std::vector<int> offsets{0};
  for (const LocalBasis &b : bases)
    offsets.push_back(offsets.back() + b.size());
  const int N = offsets.back();
  OracleSystem out{Eigen::MatrixXcd::Zero(N, N), Eigen::MatrixXcd::Zero(N, N), Eigen::VectorXcd::Zero(N)};
  const double kappa = spec.kappa;
  const auto ks = [&](int k) { return kappa * std::sqrt(std::conj(spec.materials.eps(mesh.region(k)))); };

  for (int k = 0; k < mesh.n_elements(); ++k)
    for (int i = 0; i < 4; ++i)
    {
      const int f = mesh.element_face(k, i);
      const Face &face = mesh.face(f);
      const Vec3 nu = outward_normal(mesh, k, i);
      const double lambda = face.is_boundary() ? spec.boundary_spec(face.boundary_tag).lambda : spec.interior_lambda;
      const auto corners = corners_of(mesh, f);
      const LocalBasis &bk = bases[k];
      const auto amp = [&](const LocalBasis &b, int n, Complex s, const Vec3 &normal, int sign) {
        return trace_amplitude(b.direction(n), b.polarization(n), s, normal, kappa, lambda, sign);
      };

      for (int m = 0; m < bk.size(); ++m)
        for (int n = 0; n < bk.size(); ++n)
          out.D(offsets[k] + m, offsets[k] + n) +=
              oracle_pair(amp(bk, n, ks(k), nu, +1), ks(k), bk.direction(n), amp(bk, m, ks(k), nu, +1), ks(k),
                          bk.direction(m), lambda, corners);

      if (!face.is_boundary())
      {
        const int nb = mesh.neighbor(k, i);
        int j = 0;
        while (mesh.element_face(nb, j) != f)
          ++j;
        const Vec3 nu_nb = outward_normal(mesh, nb, j);
        const LocalBasis &bn = bases[nb];
        for (int m = 0; m < bk.size(); ++m)
          for (int n = 0; n < bn.size(); ++n)
            out.C(offsets[k] + m, offsets[nb] + n) -=
                oracle_pair(amp(bn, n, ks(nb), nu_nb, +1), ks(nb), bn.direction(n), amp(bk, m, ks(k), nu, -1),
                            ks(k), bk.direction(m), lambda, corners);
        continue;
      }

      const BoundarySpec &bc = spec.boundary_spec(face.boundary_tag);
      for (int m = 0; m < bk.size(); ++m)
      {
        const CVec3 am = amp(bk, m, ks(k), nu, -1);
        for (int n = 0; n < bk.size(); ++n)
          out.C(offsets[k] + m, offsets[k] + n) +=
              bc.Q * oracle_pair(amp(bk, n, ks(k), nu, +1), ks(k), bk.direction(n), am, ks(k), bk.direction(m),
                                 lambda, corners);
        if (data)
        {
          const CVec3 n = nu.cast<Complex>();
          Complex cn = 0;
          for (int c = 0; c < 3; ++c)
            cn += data->c[c] * n[c];
          out.b(offsets[k] + m) +=
              oracle_pair(data->c - cn * n, data->kg, data->k, am, ks(k), bk.direction(m), lambda, corners);
        }
      }
    }
  return out;
}

double contraction_sigma(const AssembledSystem &sys)
{
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(sys.size(), sys.size());
  for (int k = 0; k < sys.n_blocks(); ++k)
  {
    const int n = static_cast<int>(sys.D[k].rows());
    W.block(sys.offsets[k], sys.offsets[k], n, n) = sys.D_factor[k].inverse_sqrt();
  }
  const Eigen::MatrixXcd M = W * sys.dense_C() * W;
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(M).singularValues()(0);
}

Complex element_trace_product(const Mesh &mesh, int k, const ProblemSpec &spec, const FieldEvaluator &E,
                              const FieldEvaluator &xi, TraceSign sign)
{
  Complex sum = 0;
  for (int i = 0; i < 4; ++i)
  {
    const int f = mesh.element_face(k, i);
    const Vec3 &nu = mesh.geometry(k).normal[i];
    const double lambda = spec.face_lambda(mesh, f);
    const MappedPoints pts = face_points(mesh, f, spec);
    for (std::size_t q = 0; q < pts.points.size(); ++q)
    {
      const CVec3 a = impedance_trace(E(pts.points[q]), nu, spec.kappa, lambda, sign);
      const CVec3 b = impedance_trace(xi(pts.points[q]), nu, spec.kappa, lambda, sign);
      sum += pts.weights[q] / lambda * b.dot(a);
    }
  }
  return sum;
}

double relative_difference(const Eigen::VectorXcd &a, const Eigen::VectorXcd &b)
{
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

} // namespace support
