#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "uwvf/types.hpp"

namespace uwvf
{

/// Base-2 radical inverse.
double van_der_corput(std::uint64_t j);

/// n low-discrepancy unit vectors: point j maps (u, v) = ((j + 1/2)/n, vdc(j))
/// to z = 1 - 2u, phi = 2 pi v.
std::vector<Vec3> hammersley_sphere(int n);

/// Orthonormal pair (p1, p2) perpendicular to d, with p1 = normalize(a x d) for
/// the coordinate axis a least aligned with d (ties go to x, then y) and
/// p2 = d x p1.
std::pair<Vec3, Vec3> polarization_pair(const Vec3 &d);

struct DirectionSet
{
  std::vector<Vec3> directions;
  std::vector<std::array<Vec3, 2>> polarizations;

  int count() const { return static_cast<int>(directions.size()); }

  static DirectionSet hammersley(int p);
  /// Shared, cached Hammersley set for p directions.
  static std::shared_ptr<const DirectionSet> cached(int p);
};

/// Which square root of the permittivity enters the phase. Test functions
/// solve the adjoint problem and use sqrt(conj(eps_r)); manufactured exact
/// solutions use sqrt(eps_r). Principal branch in both cases.
enum class Medium
{
  forward,
  adjoint
};

Complex medium_root(Complex eps_r, Medium medium);

struct FieldValue
{
  CVec3 E;
  CVec3 curlE;
};

/// E(x) = p exp(i kappa s d.x) and its curl i kappa s (d x p) exp(i kappa s d.x).
FieldValue eval_plane_wave(const Vec3 &d, const Vec3 &p, double kappa, Complex eps_r, Medium medium,
                           const Vec3 &x);

enum class TraceSign
{
  plus,
  minus
};

/// nu x curl E +/- i kappa lambda E_T at a point.
CVec3 impedance_trace(const FieldValue &field, const Vec3 &nu, double kappa, double lambda, TraceSign sign);

using FieldEvaluator = std::function<FieldValue(const Vec3 &)>;
using TraceFunction = std::function<CVec3(const Vec3 &)>;

TraceFunction make_impedance_trace(FieldEvaluator field, const Vec3 &nu, double kappa, double lambda,
                                   TraceSign sign);

/// Plane-wave Trefftz space on one element. Basis function n = 2 j + l is the
/// wave along direction j with polarization l; every member satisfies
/// curl curl xi - kappa^2 conj(eps_r) xi = 0.
class LocalBasis
{
public:
  LocalBasis() = default;
  LocalBasis(int element, std::shared_ptr<const DirectionSet> directions, double kappa, Complex eps_r);

  int element() const { return element_; }
  int size() const { return 2 * directions_->count(); }
  int direction_count() const { return directions_->count(); }
  double kappa() const { return kappa_; }
  Complex eps_r() const { return eps_r_; }
  const DirectionSet &directions() const { return *directions_; }

  const Vec3 &direction(int n) const { return directions_->directions[n / 2]; }
  const Vec3 &polarization(int n) const { return directions_->polarizations[n / 2][n % 2]; }

  FieldValue evaluate(int n, const Vec3 &x) const;

  /// Value of sum_n coeffs[n] xi_n at x.
  CVec3 combine(const Eigen::Ref<const Eigen::VectorXcd> &coeffs, const Vec3 &x) const;

private:
  int element_ = -1;
  std::shared_ptr<const DirectionSet> directions_;
  double kappa_ = 0.0;
  Complex eps_r_{1.0, 0.0};
  Complex root_{1.0, 0.0};
};

} // namespace uwvf
