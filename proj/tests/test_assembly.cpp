#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>

#include "support.hpp"

using namespace uwvf;
using namespace support;

namespace
{

bool bitwise_equal(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b)
{
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(Complex) * a.size()) == 0;
}

double max_relative(const Eigen::MatrixXcd &a, const Eigen::MatrixXcd &b)
{
  const double scale = b.cwiseAbs().maxCoeff();
  return scale == 0.0 ? (a - b).cwiseAbs().maxCoeff() : (a - b).cwiseAbs().maxCoeff() / scale;
}

} // namespace

TEST_SUITE("assembly")
{
  TEST_CASE("D_K is Hermitian positive definite")
  {
    const Mesh mesh = generate_cube_mesh(1);
    MaterialTable materials;
    materials.set(0, Complex(2.0, 0.5));
    const ProblemSpec spec = uniform_problem(mesh, 4.0, materials, 0.0);
    const auto bases = uniform_bases(mesh, materials, 4.0, 9);
    for (int k = 0; k < mesh.n_elements(); ++k)
    {
      const Eigen::MatrixXcd D = assemble_local_D(mesh, k, bases[k], spec);
      CHECK((D - D.adjoint()).norm() <= 1e-12 * D.norm());
      for (int n = 0; n < D.rows(); ++n)
        CHECK(D(n, n).real() > 0.0);
      const HermitianFactor f = HermitianFactor::compute(D);
      CHECK(f.min_eigenvalue > 0.0);
      CHECK(std::isfinite(f.condition));
      const Eigen::VectorXcd r = Eigen::VectorXcd::LinSpaced(D.rows(), 1.0, 2.0);
      CHECK((D * f.solve(r) - r).norm() < 1e-10 * r.norm() * f.condition);
      CHECK((f.inverse_sqrt() * f.sqrt() - Eigen::MatrixXcd::Identity(D.rows(), D.cols())).norm() < 1e-8);
    }
  }

  TEST_CASE("single element block against the oracle")
  {
    const Mesh mesh = one_tet_mesh();
    const ProblemSpec spec = uniform_problem(mesh, 1.0, MaterialTable(1.0), 0.0);
    const auto bases = uniform_bases(mesh, spec.materials, 1.0, 1);
    const OracleSystem o = oracle_system(mesh, bases, spec, nullptr);
    const Eigen::MatrixXcd D = assemble_local_D(mesh, 0, bases[0], spec);
    REQUIRE(D.rows() == 2);
    CHECK(max_relative(D, o.D) < 1e-10);
  }

  TEST_CASE("coupling blocks at small wavenumber against the oracle")
  {
    const Mesh mesh = two_tet_mesh();
    const ProblemSpec spec = uniform_problem(mesh, 1e-3, MaterialTable(1.0), 0.0);
    const auto bases = uniform_bases(mesh, spec.materials, 1e-3, 3);
    const AssembledSystem sys = assemble_system(mesh, bases, spec);
    const OracleSystem o = oracle_system(mesh, bases, spec, nullptr);
    CHECK(sys.dense_C().allFinite());
    CHECK(max_relative(sys.dense_C(), o.C) < 1e-10);
    CHECK(max_relative(sys.dense_D(), o.D) < 1e-10);
  }

  TEST_CASE("system structure")
  {
    const Mesh mesh = two_tet_mesh();
    ProblemSpec spec = uniform_problem(mesh, 2.0, MaterialTable(1.0), 0.0);
    const auto bases = uniform_bases(mesh, spec.materials, 2.0, 4);
    const AssembledSystem absorbing = assemble_system(mesh, bases, spec);
    CHECK(absorbing.n_blocks() == 2);
    CHECK(absorbing.D[0].rows() == 8);
    CHECK(absorbing.D[1].rows() == 8);
    CHECK(absorbing.n_coupling_blocks() == 2);
    CHECK(absorbing.b.values.isZero(0.0));

    spec.boundary.at(0).Q = 0.5;
    const AssembledSystem reflecting = assemble_system(mesh, bases, spec);
    CHECK(reflecting.n_coupling_blocks() == 2 + mesh.n_boundary_faces());
  }

  TEST_CASE("coupling roles are not symmetric")
  {
    const Mesh mesh = two_tet_mesh();
    const ProblemSpec spec = uniform_problem(mesh, 2.0, MaterialTable(1.0), 0.0);
    const auto bases = uniform_bases(mesh, spec.materials, 2.0, 3);
    int shared = -1;
    for (int f = 0; f < mesh.n_faces(); ++f)
      if (!mesh.face(f).is_boundary())
        shared = f;
    const Eigen::MatrixXcd c01 = assemble_coupling(mesh, shared, 0, bases[0], bases[1], spec);
    const Eigen::MatrixXcd c10 = assemble_coupling(mesh, shared, 1, bases[1], bases[0], spec);
    CHECK((c01 - c10.adjoint()).norm() > 1e-3 * c01.norm());

    // |C_{K,K'}| is bounded by the F^- trace norm of K and the F^+ trace norm of K'.
    int i0 = 0, i1 = 0;
    while (mesh.element_face(0, i0) != shared)
      ++i0;
    while (mesh.element_face(1, i1) != shared)
      ++i1;
    const MappedPoints pts = face_points(mesh, shared, spec);
    const Eigen::MatrixXcd minus0 =
        trace_matrix(bases[0], mesh.geometry(0).normal[i0], pts, 2.0, 1.0, TraceSign::minus);
    const Eigen::MatrixXcd plus1 = trace_matrix(bases[1], mesh.geometry(1).normal[i1], pts, 2.0, 1.0, TraceSign::plus);
    for (int m = 0; m < c01.rows(); ++m)
      for (int n = 0; n < c01.cols(); ++n)
        CHECK(std::abs(c01(m, n)) <= minus0.col(m).norm() * plus1.col(n).norm() * (1.0 + 1e-12));
  }

  TEST_CASE("linearity in Q and g")
  {
    const Mesh mesh = one_tet_mesh();
    ProblemSpec spec = uniform_problem(mesh, 3.0, MaterialTable(1.0), 0.5);
    const auto bases = uniform_bases(mesh, spec.materials, 3.0, 4);
    const int f = mesh.element_face(0, 2);
    const Eigen::MatrixXcd half = assemble_boundary(mesh, f, bases[0], spec);
    spec.boundary.at(0).Q = 1.0;
    const Eigen::MatrixXcd full = assemble_boundary(mesh, f, bases[0], spec);
    CHECK((full - 2.0 * half).norm() <= 1e-14 * full.norm());
    spec.boundary.at(0).Q = 0.0;
    CHECK(assemble_boundary(mesh, f, bases[0], spec).isZero(0.0));

    CHECK(assemble_rhs(mesh, f, bases[0], spec).isZero(0.0));
    const PlaneData g{CVec3(1.0, Complex(0, 2), 0.5), 2.0, Vec3(0, 0.6, 0.8)};
    spec.boundary.at(0).data = g;
    const Eigen::VectorXcd b1 = assemble_rhs(mesh, f, bases[0], spec);
    const Complex c(0.7, -1.3);
    spec.boundary.at(0).data = [&](const Vec3 &x, const Vec3 &nu) { return CVec3(c * g(x, nu)); };
    const Eigen::VectorXcd bc = assemble_rhs(mesh, f, bases[0], spec);
    CHECK((bc - c * b1).norm() <= 1e-14 * bc.norm());
  }

  TEST_CASE("rhs from a basis trace against the oracle")
  {
    // g = F^- trace of basis function 0 with Q = 0.
    const Mesh mesh = one_tet_mesh();
    ProblemSpec spec = uniform_problem(mesh, 2.0, MaterialTable(1.0), 0.0);
    const auto bases = uniform_bases(mesh, spec.materials, 2.0, 3);
    const Vec3 d = bases[0].direction(0), p = bases[0].polarization(0);
    spec.boundary.at(0).data = [&](const Vec3 &x, const Vec3 &nu) {
      return impedance_trace(eval_plane_wave(d, p, 2.0, 1.0, Medium::forward, x), nu, 2.0, 1.0, TraceSign::minus);
    };
    for (int i = 0; i < 4; ++i)
    {
      const int f = mesh.element_face(0, i);
      const Vec3 nu = mesh.geometry(0).normal[i];
      const Eigen::VectorXcd b = assemble_rhs(mesh, f, bases[0], spec);
      const auto corners = mesh.face_corners(f);
      const CVec3 ag = trace_amplitude(d, p, 2.0, nu, 2.0, 1.0, -1);
      for (int m = 0; m < b.size(); ++m)
      {
        const CVec3 am = trace_amplitude(bases[0].direction(m), bases[0].polarization(m), 2.0, nu, 2.0, 1.0, -1);
        const Complex o = oracle_pair(ag, 2.0, d, am, 2.0, bases[0].direction(m), 1.0, corners);
        CHECK(std::abs(b[m] - o) <= 1e-10 * std::max(std::abs(o), b.cwiseAbs().maxCoeff()));
      }
    }
  }

  TEST_CASE("non-tangential data is rejected")
  {
    const Mesh mesh = one_tet_mesh();
    ProblemSpec spec = uniform_problem(mesh, 1.0, MaterialTable(1.0), 0.0);
    spec.boundary.at(0).data = [](const Vec3 &, const Vec3 &nu) { return to_complex(nu); };
    const auto bases = uniform_bases(mesh, spec.materials, 1.0, 2);
    CHECK_THROWS_AS(assemble_rhs(mesh, mesh.element_face(0, 0), bases[0], spec), AssemblyError);
    CHECK_THROWS_AS(assemble_system(mesh, bases, spec), AssemblyError);
  }

  TEST_CASE("invalid problems")
  {
    const Mesh mesh = one_tet_mesh();
    const auto bases = uniform_bases(mesh, MaterialTable(1.0), 1.0, 2);
    ProblemSpec spec = uniform_problem(mesh, 1.0, MaterialTable(1.0), 0.0);
    spec.boundary.clear();
    CHECK_THROWS_AS(assemble_system(mesh, bases, spec), AssemblyError);
    spec = uniform_problem(mesh, 1.0, MaterialTable(1.0), 0.0);
    spec.boundary.at(0).Q = 1.5;
    CHECK_THROWS_AS(assemble_system(mesh, bases, spec), AssemblyError);
    spec = uniform_problem(mesh, 1.0, MaterialTable(1.0), 0.0);
    spec.condition_cap = 2.0;
    CHECK_THROWS_AS(assemble_system(mesh, uniform_bases(mesh, spec.materials, 1.0, 9), spec), AssemblyError);
  }

  TEST_CASE("quadrature clamp warning")
  {
    const Mesh mesh = one_tet_mesh();
    const ProblemSpec spec = uniform_problem(mesh, 30.0, MaterialTable(1.0), 0.0);
    const AssembledSystem sys = assemble_system(mesh, uniform_bases(mesh, spec.materials, 30.0, 2), spec);
    REQUIRE_FALSE(sys.warnings.empty());
    CHECK(sys.warnings[0].find("clamped") != std::string::npos);
  }

  TEST_CASE("parallel assembly matches the serial reference bitwise")
  {
    const Mesh mesh = generate_cube_mesh(2);
    const Vec3 d = Vec3(1, 2, 3).normalized();
    const ExactSolution exact{d, polarization_pair(d).first, 4.0, 1.0, 1.0};
    const ProblemSpec spec = uniform_problem(mesh, 4.0, MaterialTable(1.0), 0.25, &exact);
    std::vector<int> p(mesh.n_elements());
    for (int k = 0; k < mesh.n_elements(); ++k)
      p[k] = 3 + k % 5;
    const auto bases = make_bases(mesh, spec.materials, 4.0, p);
    const AssembledSystem ref = reference::assemble_system(mesh, bases, spec);
    for (int threads : {1, 3, 8})
    {
      const AssembledSystem par = assemble_system(mesh, bases, spec, Execution{threads});
      REQUIRE(par.n_blocks() == ref.n_blocks());
      bool same = bitwise_equal(par.b.values, ref.b.values);
      for (int k = 0; k < ref.n_blocks(); ++k)
      {
        same = same && bitwise_equal(par.D[k], ref.D[k]) && par.C[k].size() == ref.C[k].size();
        for (std::size_t j = 0; same && j < ref.C[k].size(); ++j)
          same = par.C[k][j].col == ref.C[k][j].col && par.C[k][j].face == ref.C[k][j].face &&
                 bitwise_equal(par.C[k][j].matrix, ref.C[k][j].matrix);
      }
      CHECK(same);
    }
  }

  TEST_CASE("shuffled element order gives bitwise-equal blocks")
  {
    const Mesh mesh = generate_cube_mesh(1);
    std::vector<int> perm(mesh.n_elements());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937 rng(3);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Tet> tets;
    std::vector<int> regions;
    for (int k : perm)
    {
      tets.push_back(mesh.tet(k));
      regions.push_back(mesh.region(k));
    }
    std::vector<TaggedFace> tagged;
    for (const Face &f : mesh.faces())
      if (f.is_boundary())
        tagged.push_back({f.vertices, f.boundary_tag});
    const Mesh shuffled(mesh.vertices(), tets, regions, tagged);

    const ProblemSpec spec = uniform_problem(mesh, 3.0, MaterialTable(1.0), 0.5);
    const auto bases = uniform_bases(mesh, spec.materials, 3.0, 5);
    const auto sbases = uniform_bases(shuffled, spec.materials, 3.0, 5);
    const AssembledSystem a = assemble_system(mesh, bases, spec);
    const AssembledSystem b = assemble_system(shuffled, sbases, spec);
    for (int j = 0; j < mesh.n_elements(); ++j)
    {
      const int k = perm[j];
      CHECK(bitwise_equal(a.D[k], b.D[j]));
      REQUIRE(a.C[k].size() == b.C[j].size());
      for (std::size_t c = 0; c < a.C[k].size(); ++c)
      {
        CHECK(perm[b.C[j][c].col] == a.C[k][c].col);
        CHECK(bitwise_equal(a.C[k][c].matrix, b.C[j][c].matrix));
      }
    }
  }

  TEST_CASE("dof count")
  {
    const std::vector<int> p{29, 42, 67};
    CHECK(dof_count(p) == 2 * (29 + 42 + 67));
    CHECK(dof_count(std::vector<int>{}) == 0);
    const double mean = 10743064.0 / (2.0 * 127113.0);
    CHECK(mean == doctest::Approx(42.26).epsilon(1e-4));
    CHECK(mean >= 29.0);
    CHECK(mean <= 67.0);
  }

  TEST_CASE("system dump")
  {
    const Mesh mesh = two_tet_mesh();
    const ProblemSpec spec = uniform_problem(mesh, 2.0, MaterialTable(1.0), 0.5);
    const AssembledSystem sys = assemble_system(mesh, uniform_bases(mesh, spec.materials, 2.0, 1), spec);
    const std::string dump = dump_system(sys);
    CHECK(dump.rfind("uwvf-system 1", 0) == 0);
    CHECK(dump.find("\nD 0 0 2 2\n") != std::string::npos);
    CHECK(dump.find("\nC 0 1 2 2\n") != std::string::npos);
    CHECK(dump.find("\nb 1 0 2 1\n") != std::string::npos);
  }
}
