#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace uwvf
{

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;

inline constexpr Complex I{0.0, 1.0};

inline CVec3 to_complex(const Vec3 &v) { return v.cast<Complex>(); }

// Eigen's cross() conjugates its result for complex scalars; these are the plain bilinear products.
inline CVec3 cross(const CVec3 &a, const CVec3 &b)
{
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline CVec3 cross(const Vec3 &a, const CVec3 &b) { return cross(to_complex(a), b); }

/// Tangential part v_T = nu x (v x nu) of a complex field with respect to a unit normal.
inline CVec3 tangential(const CVec3 &v, const Vec3 &nu) { return cross(nu, cross(v, to_complex(nu))); }

// Error categories. The CLI maps each one onto a distinct exit code.
struct ConfigError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct MeshError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct ParseError : MeshError
{
  ParseError(int line, const std::string &what)
    : MeshError("line " + std::to_string(line) + ": " + what), line(line)
  {}
  int line;
};

struct TopologyError : MeshError
{
  using MeshError::MeshError;
};

struct AssemblyError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

} // namespace uwvf
