#include "uwvf/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

namespace uwvf
{

namespace
{

constexpr int oracle_points = 10;
constexpr int max_levels = 12;

struct Rule1D
{
  std::vector<double> x, w; // on [0,1]
};

// Golub-Welsch: nodes are eigenvalues of the Legendre Jacobi matrix.
Rule1D golub_welsch(int n)
{
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k)
    J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule1D r;
  for (int i = 0; i < n; ++i)
  {
    const double v = es.eigenvectors()(0, i);
    r.x.push_back(0.5 * (es.eigenvalues()[i] + 1.0));
    r.w.push_back(v * v); // 2 v^2 on [-1,1], halved
  }
  return r;
}

const Rule1D &rule()
{
  static const Rule1D r = golub_welsch(oracle_points);
  return r;
}

struct Tri
{
  Vec3 a, b, c;
};

template <typename F>
Complex integrate_fixed(const Tri &t, const F &f)
{
  const Rule1D &r = rule();
  const double jac = (t.b - t.a).cross(t.c - t.a).norm();
  Complex sum = 0.0;
  for (int i = 0; i < oracle_points; ++i)
    for (int j = 0; j < oracle_points; ++j)
    {
      const double s = r.x[i];
      const double u = (1.0 - s) * r.x[j];
      const Vec3 x = t.a + s * (t.b - t.a) + u * (t.c - t.a);
      sum += r.w[i] * r.w[j] * (1.0 - s) * f(x);
    }
  return jac * sum;
}

template <typename F>
Complex adapt(const Tri &t, const F &f, Complex whole, double tol, int level)
{
  const Vec3 ab = 0.5 * (t.a + t.b), bc = 0.5 * (t.b + t.c), ca = 0.5 * (t.c + t.a);
  const Tri kids[4] = {{t.a, ab, ca}, {ab, t.b, bc}, {ca, bc, t.c}, {ab, bc, ca}};
  Complex parts[4];
  Complex sum = 0.0;
  for (int i = 0; i < 4; ++i)
  {
    parts[i] = integrate_fixed(kids[i], f);
    sum += parts[i];
  }
  if (std::abs(sum - whole) <= tol)
    return sum;
  if (level + 1 >= max_levels)
    throw std::runtime_error("oscillatory face oracle did not converge within 12 refinement levels");
  Complex refined = 0.0;
  for (int i = 0; i < 4; ++i)
    refined += adapt(kids[i], f, parts[i], 0.25 * tol, level + 1);
  return refined;
}

} // namespace

Complex oscillatory_face_integral(const CVec3 &w, const std::array<Vec3, 3> &corners, double rel_tol)
{
  const Tri t{corners[0], corners[1], corners[2]};
  if ((t.b - t.a).cross(t.c - t.a).norm() == 0.0)
    throw std::invalid_argument("degenerate triangle");
  auto f = [&](const Vec3 &x) { return std::exp(I * (w.transpose() * to_complex(x))(0)); };
  auto magnitude = [&](const Vec3 &x) { return Complex(std::abs(f(x)), 0.0); };
  const double scale = integrate_fixed(t, magnitude).real();
  return adapt(t, f, integrate_fixed(t, f), rel_tol * scale, 0);
}

Complex oscillatory_face_oracle(Complex kc, const Vec3 &d, const std::array<Vec3, 3> &corners, double rel_tol)
{
  return oscillatory_face_integral(kc * to_complex(d), corners, rel_tol);
}

} // namespace uwvf
