// Serial reference kernels against the OpenMP kernels at several worker counts.
//
//   bench_kernels [cube_n] [p] [repeats]

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <omp.h>

#include "uwvf/assembly.hpp"
#include "uwvf/postprocess.hpp"
#include "uwvf/solve.hpp"

using namespace uwvf;

namespace
{

template <class F>
double best_of(int repeats, F &&f)
{
  double best = 1e300;
  for (int r = 0; r < repeats; ++r)
  {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

bool same_bits(const Eigen::VectorXcd &a, const Eigen::VectorXcd &b)
{
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(Complex) * a.size()) == 0;
}

} // namespace

int main(int argc, char **argv)
{
  const int cube_n = argc > 1 ? std::atoi(argv[1]) : 3;
  const int p = argc > 2 ? std::atoi(argv[2]) : 17;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;

  const Mesh mesh = generate_cube_mesh(cube_n);
  const double kappa = 3.0 * cube_n;
  const Vec3 d = Vec3(1.0, 0.3, 0.5).normalized();
  const ExactSolution exact{d, polarization_pair(d).first, kappa, 1.0, 1.0};
  ProblemSpec spec;
  spec.kappa = kappa;
  for (int tag : mesh.boundary_tags())
    spec.boundary[tag] = BoundarySpec{0.2, 1.0, manufacture_boundary_data(exact, 0.2, 1.0)};
  const auto bases = uniform_bases(mesh, spec.materials, kappa, p);

  fmt::print("mesh: {} elements, p = {}, {} unknowns, {} hardware threads\n", mesh.n_elements(), p,
             dof_count(std::vector<int>(mesh.n_elements(), p)), omp_get_num_procs());

  AssembledSystem ref;
  const double t_ref = best_of(repeats, [&] { ref = reference::assemble_system(mesh, bases, spec); });
  fmt::print("{:<26} {:>8} {:>11} {:>8} {:>9}\n", "kernel", "threads", "seconds", "speedup", "bitwise");
  fmt::print("{:<26} {:>8} {:>11.4f} {:>8} {:>9}\n", "assembly (reference)", 1, t_ref, "1.00", "-");

  std::vector<int> counts{1, 2, 4};
  if (omp_get_num_procs() > 4)
    counts.push_back(omp_get_num_procs());
  for (int threads : counts)
  {
    AssembledSystem par;
    const double t = best_of(repeats, [&] { par = assemble_system(mesh, bases, spec, Execution{threads}); });
    bool same = same_bits(par.b.values, ref.b.values);
    for (int k = 0; k < ref.n_blocks() && same; ++k)
      same = par.D[k] == ref.D[k];
    fmt::print("{:<26} {:>8} {:>11.4f} {:>8.2f} {:>9}\n", "assembly (parallel)", threads, t, t_ref / t,
               same ? "yes" : "no");
  }

  const SkeletonVector x = ref.b;
  SkeletonVector y_ref = ref.zero_vector(), y = ref.zero_vector();
  const int applications = 20;
  const double a_ref = best_of(repeats, [&] {
    for (int i = 0; i < applications; ++i)
      reference::apply_operator(ref, x, y_ref);
  });
  fmt::print("{:<26} {:>8} {:>11.4f} {:>8} {:>9}\n", "operator x20 (reference)", 1, a_ref, "1.00", "-");
  for (int threads : counts)
  {
    const double t = best_of(repeats, [&] {
      for (int i = 0; i < applications; ++i)
        apply_operator(ref, x, y, Execution{threads});
    });
    fmt::print("{:<26} {:>8} {:>11.4f} {:>8.2f} {:>9}\n", "operator x20 (parallel)", threads, t, a_ref / t,
               same_bits(y.values, y_ref.values) ? "yes" : "no");
  }
  return 0;
}
