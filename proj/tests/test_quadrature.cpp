#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "uwvf/oracle.hpp"
#include "uwvf/quadrature.hpp"

using namespace uwvf;

namespace
{

template <int N, class F>
double integrate(const SimplexRule<N> &rule, F f)
{
  double s = 0.0;
  for (int q = 0; q < rule.size(); ++q)
    s += rule.weights[q] * f(rule.nodes[q]);
  return s;
}

} // namespace

TEST_SUITE("quadrature")
{
  TEST_CASE("centroid rules")
  {
    const TriangleRule &t = triangle_rule(1);
    REQUIRE(t.size() == 1);
    CHECK(t.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
    for (double b : t.nodes[0])
      CHECK(b == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const TetrahedronRule &k = tetrahedron_rule(1);
    REQUIRE(k.size() == 1);
    CHECK(k.weights[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  }

  TEST_CASE("reference integrals")
  {
    for (int order = 1; order <= max_quadrature_order; ++order)
    {
      CHECK(integrate(triangle_rule(order), [](auto b) { return b[1]; }) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
      CHECK(integrate(tetrahedron_rule(order), [](auto b) { return b[1]; }) ==
            doctest::Approx(1.0 / 24.0).epsilon(1e-14));
    }
    for (int order = 5; order <= max_quadrature_order; ++order)
    {
      // 2! 3! / 7! = 1/420.
      const double v = integrate(triangle_rule(order), [](auto b) { return b[1] * b[1] * b[2] * b[2] * b[2]; });
      CHECK(std::abs(v - 1.0 / 420.0) < 1e-13);
    }
    for (int order = 3; order <= max_quadrature_order; ++order)
    {
      const double v = integrate(tetrahedron_rule(order), [](auto b) { return b[1] * b[2] * b[3]; });
      CHECK(std::abs(v - 1.0 / 720.0) < 1e-13);
    }
  }

  TEST_CASE("positive weights and permutation symmetry")
  {
    for (int order = 1; order <= max_quadrature_order; ++order)
    {
      const TriangleRule &t = triangle_rule(order);
      CHECK(*std::min_element(t.weights.begin(), t.weights.end()) > 0.0);
      // A non-symmetric monomial integrates identically under every relabeling.
      const double base = integrate(t, [](auto b) { return b[0] * b[1] * b[1]; });
      std::array<int, 3> perm{0, 1, 2};
      while (std::next_permutation(perm.begin(), perm.end()))
        CHECK(integrate(t, [&](auto b) { return b[perm[0]] * b[perm[1]] * b[perm[1]]; }) ==
              doctest::Approx(base).epsilon(1e-14));

      const TetrahedronRule &k = tetrahedron_rule(order);
      CHECK(*std::min_element(k.weights.begin(), k.weights.end()) > 0.0);
      const double kbase = integrate(k, [](auto b) { return b[0] * b[1] * b[1] * b[3]; });
      std::array<int, 4> p4{0, 1, 2, 3};
      while (std::next_permutation(p4.begin(), p4.end()))
        CHECK(integrate(k, [&](auto b) { return b[p4[0]] * b[p4[1]] * b[p4[1]] * b[p4[3]]; }) ==
              doctest::Approx(kbase).epsilon(1e-13));
    }
  }

  TEST_CASE("unsupported orders")
  {
    CHECK_THROWS_AS(triangle_rule(0), std::invalid_argument);
    CHECK_THROWS_AS(triangle_rule(21), std::invalid_argument);
    CHECK_THROWS_AS(tetrahedron_rule(-1), std::invalid_argument);
  }

  TEST_CASE("Gauss-Legendre")
  {
    std::vector<double> x, w;
    for (int n = 1; n <= 12; ++n)
    {
      gauss_legendre(n, x, w);
      REQUIRE(x.size() == std::size_t(n));
      for (int deg = 0; deg < 2 * n; ++deg)
      {
        double s = 0;
        for (int i = 0; i < n; ++i)
          s += w[i] * std::pow(x[i], deg);
        CHECK(s == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("face quadrature order")
  {
    CHECK(face_quadrature_order(0.5, 1.0, 1.0, 6) == 7);
    CHECK(face_quadrature_order(10.0, 1.0, 1.0, 6) == 16);
    CHECK(face_quadrature_order(30.0, 1.0, 1.0, 6) == 20);
    CHECK(face_quadrature_clamped(30.0, 1.0, 1.0, 6));
    CHECK_FALSE(face_quadrature_clamped(10.0, 1.0, 1.0, 6));
    CHECK(face_quadrature_order(1.0, 4.0, 1.0, 6) == 8);
    int last = 0;
    for (double kh = 0.0; kh < 40.0; kh += 0.37)
    {
      const int o = face_quadrature_order(kh, 1.0, 1.0, 6);
      CHECK(o >= last);
      last = o;
    }
  }

  TEST_CASE("mapped rules")
  {
    const std::array<Vec3, 3> tri{Vec3(1, 0, 0), Vec3(0, 2, 0), Vec3(0, 0, 3)};
    const MappedPoints m = map_rule(triangle_rule(4), tri);
    double area = 0;
    Vec3 first = Vec3::Zero();
    for (std::size_t q = 0; q < m.points.size(); ++q)
    {
      area += m.weights[q];
      first += m.weights[q] * m.points[q];
      CHECK(std::abs(m.points[q].x() + m.points[q].y() / 2 + m.points[q].z() / 3 - 1.0) < 1e-14);
    }
    const double exact = 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).norm();
    CHECK(area == doctest::Approx(exact).epsilon(1e-14));
    CHECK((first / area - (tri[0] + tri[1] + tri[2]) / 3).norm() < 1e-14);

    const std::array<Vec3, 4> tet{Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 3)};
    const MappedPoints v = map_rule(tetrahedron_rule(3), tet);
    double vol = 0;
    for (double w : v.weights)
      vol += w;
    CHECK(vol == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("oscillatory oracle")
  {
    const std::array<Vec3, 3> unit{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    CHECK(std::abs(oscillatory_face_oracle(0.0, Vec3(1, 0, 0), unit) - 0.5) < 1e-15);
    // Phase constant over the face when d is normal to it.
    const std::array<Vec3, 3> lifted{Vec3(0, 0, 0.4), Vec3(2, 0, 0.4), Vec3(0, 1, 0.4)};
    CHECK(std::abs(oscillatory_face_oracle(3.0, Vec3(0, 0, 1), lifted) - std::exp(I * 1.2)) < 1e-14);
    const Complex value = oscillatory_face_oracle(1.0, Vec3(1, 0, 0), unit);
    // Integration by parts: int_0^1 (1 - x) e^{ix} dx = [(1 - x) e^{ix}/i]_0^1 + (1/i) int_0^1 e^{ix} dx
    //                                             = -1/i + (e^i - 1)/i^2 = i + 1 - e^i.
    CHECK(std::abs(value - (I + 1.0 - std::exp(I))) < 1e-13);
  }

  TEST_CASE("production rules against the oracle")
  {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial)
    {
      std::array<Vec3, 3> c;
      for (Vec3 &x : c)
        x = Vec3(u(rng), u(rng), u(rng));
      const double h = std::max({(c[0] - c[1]).norm(), (c[1] - c[2]).norm(), (c[0] - c[2]).norm()});
      const double kappa = 3.0 / h;
      const Vec3 d = Vec3(u(rng), u(rng), u(rng)).normalized();
      const MappedPoints m = map_rule(triangle_rule(face_quadrature_order(kappa, 1.0, h, 14)), c);
      Complex q = 0;
      for (std::size_t i = 0; i < m.points.size(); ++i)
        q += m.weights[i] * std::exp(I * kappa * d.dot(m.points[i]));
      const double area = 0.5 * (c[1] - c[0]).cross(c[2] - c[0]).norm();
      CHECK(std::abs(q - oscillatory_face_oracle(kappa, d, c)) < 1e-12 * area);
    }
  }
}
