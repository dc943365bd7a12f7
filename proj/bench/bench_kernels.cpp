// Timing comparison of the OpenMP kernels against their serial reference
// implementations: space construction, operator assembly, the per-iterate
// nonlinear mass, and spmv.

#include <chrono>
#include <cstdio>
#include <random>

#include <omp.h>

#include "polywave/assembly.hpp"

using namespace polywave;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename Fn>
double time_ms(Fn&& fn, int reps = 3) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = clock_type::now();
        fn();
        const auto t1 = clock_type::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    const int n_seeds = argc > 1 ? std::atoi(argv[1]) : 1200;
    const int p = argc > 2 ? std::atoi(argv[2]) : 3;
    std::printf("threads: %d, voronoi cells: %d, degree: %d\n", omp_get_max_threads(), n_seeds, p);

    const Rect dom{0.0, 0.0, 1.0, 2.0 / 3.0 * std::sqrt(3.0)};
    PolyMesh mesh = generate_voronoi_mesh(dom, n_seeds, 3, 12);
    MaterialParams mat = MaterialParams::uniform(1.0, 1e-5, 1e-4, 1.0);
    StabilizationParams stab{10.0, p};

    std::printf("%-26s %12s %12s %8s\n", "kernel", "serial [ms]", "parallel [ms]", "speedup");
    auto report = [](const char* name, double ts, double tp) {
        std::printf("%-26s %12.2f %12.2f %8.2f\n", name, ts, tp, ts / tp);
    };

    DgSpace space = build_space(mesh, p);
    report("build_space",
           time_ms([&] { (void)build_space(mesh, p, Exec::serial); }),
           time_ms([&] { (void)build_space(mesh, p, Exec::parallel); }));

    report("assemble_operators",
           time_ms([&] { (void)assemble_operators(space, mat, stab, Exec::serial); }),
           time_ms([&] { (void)assemble_operators(space, mat, stab, Exec::parallel); }));

    GlobalOperators ops = assemble_operators(space, mat, stab);
    std::mt19937_64 rng(1);
    auto u01 = [&rng] { return (rng() >> 11) * 0x1.0p-53; };
    std::vector<double> psid(space.n_dofs), x(space.n_dofs), y(space.n_dofs);
    for (double& v : psid) v = 2.0 * u01() - 1.0;
    for (double& v : x) v = 2.0 * u01() - 1.0;

    report("assemble_nonlinear_mass",
           time_ms([&] { (void)assemble_nonlinear_mass(space, psid, mat, Exec::serial); }, 5),
           time_ms([&] { (void)assemble_nonlinear_mass(space, psid, mat, Exec::parallel); }, 5));

    report("spmv (ktilde) x100",
           time_ms([&] {
               for (int i = 0; i < 100; ++i) spmv(ops.ktilde, x, y, Exec::serial);
           }),
           time_ms([&] {
               for (int i = 0; i < 100; ++i) spmv(ops.ktilde, x, y, Exec::parallel);
           }));
    return 0;
}
