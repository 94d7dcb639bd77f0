#include "uwvf/planewave.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace uwvf
{

double van_der_corput(std::uint64_t j)
{
  double value = 0.0;
  double digit = 0.5;
  for (; j != 0; j >>= 1, digit *= 0.5)
    if (j & 1u)
      value += digit;
  return value;
}

std::vector<Vec3> hammersley_sphere(int n)
{
  std::vector<Vec3> points;
  points.reserve(n);
  for (int j = 0; j < n; ++j)
  {
    const double u = (j + 0.5) / n;
    const double v = van_der_corput(static_cast<std::uint64_t>(j));
    const double z = 1.0 - 2.0 * u;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * std::numbers::pi * v;
    points.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return points;
}

std::pair<Vec3, Vec3> polarization_pair(const Vec3 &d)
{
  int axis = 0;
  for (int a = 1; a < 3; ++a)
    if (std::abs(d[a]) < std::abs(d[axis]))
      axis = a;
  const Vec3 p1 = Vec3::Unit(axis).cross(d).normalized();
  const Vec3 p2 = d.cross(p1);
  return {p1, p2};
}

DirectionSet DirectionSet::hammersley(int p)
{
  DirectionSet set;
  set.directions = hammersley_sphere(p);
  set.polarizations.reserve(p);
  for (const Vec3 &d : set.directions)
  {
    auto [p1, p2] = polarization_pair(d);
    set.polarizations.push_back({p1, p2});
  }
  return set;
}

std::shared_ptr<const DirectionSet> DirectionSet::cached(int p)
{
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const DirectionSet>> cache;
  std::lock_guard lock(mutex);
  auto &entry = cache[p];
  if (!entry)
    entry = std::make_shared<const DirectionSet>(hammersley(p));
  return entry;
}

Complex medium_root(Complex eps_r, Medium medium)
{
  return std::sqrt(medium == Medium::adjoint ? std::conj(eps_r) : eps_r);
}

FieldValue eval_plane_wave(const Vec3 &d, const Vec3 &p, double kappa, Complex eps_r, Medium medium,
                           const Vec3 &x)
{
  const Complex ks = kappa * medium_root(eps_r, medium);
  const Complex phase = std::exp(I * ks * d.dot(x));
  return {to_complex(p) * phase, to_complex(d.cross(p)) * (I * ks * phase)};
}

CVec3 impedance_trace(const FieldValue &field, const Vec3 &nu, double kappa, double lambda, TraceSign sign)
{
  const double s = sign == TraceSign::plus ? 1.0 : -1.0;
  return cross(nu, field.curlE) + (s * I * kappa * lambda) * tangential(field.E, nu);
}

TraceFunction make_impedance_trace(FieldEvaluator field, const Vec3 &nu, double kappa, double lambda,
                                   TraceSign sign)
{
  return [field = std::move(field), nu, kappa, lambda, sign](const Vec3 &x) {
    return impedance_trace(field(x), nu, kappa, lambda, sign);
  };
}

LocalBasis::LocalBasis(int element, std::shared_ptr<const DirectionSet> directions, double kappa, Complex eps_r)
  : element_(element), directions_(std::move(directions)), kappa_(kappa), eps_r_(eps_r),
    root_(medium_root(eps_r, Medium::adjoint))
{}

FieldValue LocalBasis::evaluate(int n, const Vec3 &x) const
{
  const Vec3 &d = direction(n);
  const Vec3 &p = polarization(n);
  const Complex ks = kappa_ * root_;
  const Complex phase = std::exp(I * ks * d.dot(x));
  return {to_complex(p) * phase, to_complex(d.cross(p)) * (I * ks * phase)};
}

CVec3 LocalBasis::combine(const Eigen::Ref<const Eigen::VectorXcd> &coeffs, const Vec3 &x) const
{
  CVec3 E = CVec3::Zero();
  for (int n = 0; n < size(); ++n)
    E += coeffs[n] * evaluate(n, x).E;
  return E;
}

} // namespace uwvf
