// Benchmark of the OpenMP element kernels against the serial reference:
// residual/tangent assembly of the 3D solver and the membrane projection of
// the limit solver, with a consistency check that both paths agree bitwise.

#include "shellvk/config.hpp"
#include "shellvk/harness.hpp"
#include "shellvk/parallel.hpp"
#include "shellvk/solver2d.hpp"
#include "shellvk/solver3d.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>

using namespace shellvk;

namespace {

double time_ms(const std::function<void()>& body, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) body();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shellvk kernel benchmark: serial reference vs OpenMP"};
    int n = 16, ns = 3, reps = 5, threads = 0;
    app.add_option("--n", n, "chart cells per direction");
    app.add_option("--ns", ns, "layers through the thickness");
    app.add_option("--reps", reps, "repetitions per measurement");
    app.add_option("--threads", threads, "OpenMP threads (0: default)");
    CLI11_PARSE(app, argc, argv);
    if (threads > 0) set_num_threads(threads);

    const Chart chart = Chart::plate(1, 1);
    ShellMesh mesh(chart, n, n, ns, 0.2);
    const MaterialModel mat(1.0, 1.0);
    const ScalingLaw sc = ScalingLaw::kappa_h4(1.0, 0.05);

    Solver3DOptions o_ser, o_par;
    o_ser.exec = Exec::Serial;
    o_par.exec = Exec::Parallel;
    Solver3D ser(mesh, mat, sc, o_ser);
    Solver3D par(mesh, mat, sc, o_par);

    const State3D state = ser.init_state({{"normal_bump", 0.5}, {"normal_bump", 0.3},
                                          {"inplane_bump", 0.4}, true});
    const Forcing none;

    const VecX r_ser = ser.assemble_residual(state, none);
    const VecX r_par = par.assemble_residual(state, none);
    const bool residual_identical = (r_ser - r_par).norm() == 0.0;

    const double t_res_ser = time_ms([&] { ser.assemble_residual(state, none); }, reps);
    const double t_res_par = time_ms([&] { par.assemble_residual(state, none); }, reps);

    StepReport3D rep;
    const double t_step_ser = time_ms([&] { ser.step(state, 1e-3, none, &rep); }, reps);
    const double t_step_par = time_ms([&] { par.step(state, 1e-3, none, &rep); }, reps);

    Solver2DOptions l_ser, l_par;
    l_ser.exec = Exec::Serial;
    l_par.exec = Exec::Parallel;
    Solver2D lim_ser(chart, n, n, mat, 1.0, l_ser);
    Solver2D lim_par(chart, n, n, mat, 1.0, l_par);
    const State2D s2 = lim_ser.init_limit({"normal_bump", 0.5}, {"normal_bump", 0.3});
    const VecX um_ser = lim_ser.project_membrane(s2.V);
    const VecX um_par = lim_par.project_membrane(s2.V);
    const bool membrane_identical = (um_ser - um_par).norm() == 0.0;

    const double t_mem_ser = time_ms([&] { lim_ser.project_membrane(s2.V); }, reps);
    const double t_mem_par = time_ms([&] { lim_par.project_membrane(s2.V); }, reps);

    std::printf("threads: %d, mesh %dx%dx%d (3D), %dx%d (2D)\n", max_threads(), n, n, ns, n, n);
    std::printf("%-28s %12s %12s %8s\n", "kernel", "serial[ms]", "openmp[ms]", "speedup");
    auto row = [](const char* name, double a, double b) {
        std::printf("%-28s %12.3f %12.3f %8.2fx\n", name, a, b, a / b);
    };
    row("residual assembly (3D)", t_res_ser, t_res_par);
    row("midpoint step (3D)", t_step_ser, t_step_par);
    row("membrane projection (2D)", t_mem_ser, t_mem_par);
    std::printf("bitwise agreement: residual %s, membrane %s\n",
                residual_identical ? "yes" : "NO", membrane_identical ? "yes" : "NO");
    return (residual_identical && membrane_identical) ? 0 : 1;
}
