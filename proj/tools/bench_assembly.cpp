// Benchmark: serial reference vs OpenMP assembly and parameter sweeps.
// Verifies bit-identical results while timing.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nlrb/nonlocal.hpp"

namespace {

double now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now();
        f();
        best = std::min(best, now() - t0);
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--quick") quick = true;

    const std::vector<int> sizes = quick ? std::vector<int>{64} : std::vector<int>{128, 256, 512};
    const int reps = quick ? 1 : 3;

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (built without OpenMP)\n");
#endif
    std::printf("%-28s %10s %10s %8s %12s\n", "task", "serial_ms", "omp_ms", "speedup",
                "max_abs_diff");

    for (int n_el : sizes) {
        const nlrb::Mesh1D mesh = nlrb::build_mesh(0.0, 1.0, n_el);
        const nlrb::KernelSpec spec = nlrb::KernelSpec::fractional(0.5, 0.5);

        nlrb::SymMatrix a_serial = nlrb::assemble_nonlocal_serial(mesh, spec);
        nlrb::SymMatrix a_omp = nlrb::assemble_nonlocal(mesh, spec);
        const double diff = (a_serial.mat() - a_omp.mat()).cwiseAbs().maxCoeff();

        const double ts =
            best_of(reps, [&] { nlrb::assemble_nonlocal_serial(mesh, spec); }) * 1e3;
        const double tp = best_of(reps, [&] { nlrb::assemble_nonlocal(mesh, spec); }) * 1e3;
        std::printf("%-28s %10.2f %10.2f %8.2f %12.3e\n",
                    ("assembly n_el=" + std::to_string(n_el)).c_str(), ts, tp, ts / tp, diff);
        if (diff != 0.0) {
            std::printf("FAIL: OpenMP assembly is not bit-identical to the serial reference\n");
            return 1;
        }
    }

    // anchor sweep (many small assemblies), the offline-stage workload
    {
        const nlrb::Mesh1D mesh = nlrb::build_mesh(0.0, 1.0, quick ? 64 : 128);
        std::vector<double> deltas;
        for (int k = 8; k <= (quick ? 16 : 64); k += 2) deltas.push_back(k * mesh.h);
        auto sweep = [&](bool parallel) {
            for (double d : deltas) {
                const nlrb::KernelSpec spec = nlrb::KernelSpec::fractional(0.5, d);
                if (parallel)
                    nlrb::assemble_nonlocal(mesh, spec);
                else
                    nlrb::assemble_nonlocal_serial(mesh, spec);
            }
        };
        const double ts = best_of(reps, [&] { sweep(false); }) * 1e3;
        const double tp = best_of(reps, [&] { sweep(true); }) * 1e3;
        std::printf("%-28s %10.2f %10.2f %8.2f %12s\n", "anchor sweep", ts, tp, ts / tp, "-");
    }
    return 0;
}
