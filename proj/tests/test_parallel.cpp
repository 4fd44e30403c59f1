#include "shellvk/parallel.hpp"
#include "shellvk/solver2d.hpp"
#include "shellvk/solver3d.hpp"

#include <doctest.h>

#include <memory>

using namespace shellvk;

// The OpenMP kernels compute per-element values in parallel and gather in
// element order, so they must agree with the serial reference bit for bit.

TEST_CASE("3D assembly and stepping: serial and parallel paths are bitwise equal") {
    const Chart chart = Chart::cylinder(1.0, 1.2, 1.0);
    auto mesh = std::make_shared<ShellMesh>(chart, 6, 6, 3, 0.2);
    Solver3DOptions oser, opar;
    oser.exec = Exec::Serial;
    opar.exec = Exec::Parallel;
    const MaterialModel mat(1.0, 1.0);
    const ScalingLaw sc = ScalingLaw::kappa_h4(1.0, 0.05);
    Solver3D ser(*mesh, mat, sc, oser);
    Solver3D par(*mesh, mat, sc, opar);

    const InitialData3D init{{"normal_bump", 0.5}, {"normal_bump", 0.3}, {"inplane_bump", 0.4},
                             true};
    const State3D ss = ser.init_state(init);
    const State3D sp = par.init_state(init);
    CHECK((ss.y - sp.y).norm() == 0.0);

    const Forcing none;
    const VecX rs = ser.assemble_residual(ss, none);
    const VecX rp = par.assemble_residual(sp, none);
    CHECK((rs - rp).norm() == 0.0);

    const Energy3D es = ser.energy(ss), ep = par.energy(sp);
    CHECK(es.kinetic == ep.kinetic);
    CHECK(es.elastic == ep.elastic);

    State3D as = ss, ap = sp;
    for (int k = 0; k < 3; ++k) {
        as = ser.step(as, 1e-3, none);
        ap = par.step(ap, 1e-3, none);
    }
    CHECK((as.y - ap.y).norm() == 0.0);
    CHECK((as.v - ap.v).norm() == 0.0);
}

TEST_CASE("2D forms: serial and parallel paths are bitwise equal") {
    const Chart chart = Chart::sphere_patch(2.0, 0.5);
    Solver2DOptions oser, opar;
    oser.exec = Exec::Serial;
    opar.exec = Exec::Parallel;
    const MaterialModel mat(1.0, 1.0);
    Solver2D ser(chart, 6, 6, mat, 1.0, oser);
    Solver2D par(chart, 6, 6, mat, 1.0, opar);

    const State2D ss = ser.init_limit_projected({"normal_bump", 0.4}, {"normal_bump", 0.2}, 1e-6);
    const State2D sp = par.init_limit_projected({"normal_bump", 0.4}, {"normal_bump", 0.2}, 1e-6);
    CHECK((ss.V - sp.V).norm() == 0.0);
    CHECK((ss.um - sp.um).norm() == 0.0);

    CHECK((ser.project_membrane(ss.V) - par.project_membrane(sp.V)).norm() == 0.0);
    CHECK((ser.coupling_force(ss.V, ss.um) - par.coupling_force(sp.V, sp.um)).norm() == 0.0);

    const Forcing none;
    State2D as = ss, ap = sp;
    for (int k = 0; k < 3; ++k) {
        as = ser.step_vk(as, 1e-3, none);
        ap = par.step_vk(ap, 1e-3, none);
    }
    CHECK((as.V - ap.V).norm() == 0.0);
    CHECK((as.Vt - ap.Vt).norm() == 0.0);
}

TEST_CASE("for_each_element gathers in element order under both policies") {
    std::vector<double> vals(100);
    auto kernel = [&](std::size_t e) { vals[e] = 1.0 / (1.0 + double(e)); };
    double sum_serial = 0, sum_parallel = 0;
    for_each_element(Exec::Serial, vals.size(), kernel,
                     [&](std::size_t e) { sum_serial += vals[e]; });
    for_each_element(Exec::Parallel, vals.size(), kernel,
                     [&](std::size_t e) { sum_parallel += vals[e]; });
    CHECK(sum_serial == sum_parallel);
}
