#include "shellvk/oracles.hpp"
#include "shellvk/solver2d.hpp"

#include <doctest.h>

#include <cmath>

using namespace shellvk;
using namespace shellvk::oracles;

namespace {

Solver2DOptions serial_opts() {
    Solver2DOptions o;
    o.exec = Exec::Serial;
    return o;
}

// Random V-DOF vector supported on interior nodes.
VecX random_vdofs(const Solver2D& s, Rng& rng, Real scale) {
    std::uniform_real_distribution<Real> u(-scale, scale);
    VecX v = VecX::Zero(s.n_vdofs());
    for (int j = 1; j < s.grid().n2(); ++j)
        for (int i = 1; i < s.grid().n1(); ++i) {
            const int node = s.grid().node_id(i, j);
            for (int c = 0; c < 3; ++c)
                for (int m = 0; m < 4; ++m) v[s.vdof(node, c, m)] = u(rng);
        }
    return v;
}

} // namespace

TEST_CASE("plate operators equal the independently coded classical assembly") {
    const MaterialModel mat(1.0, 1.0);
    Solver2D solver(Chart::plate(1, 1), 8, 8, mat, 1.0, serial_opts());
    const PlateOperators ops = classical_plate_operators(solver);

    CHECK(matrix_distance(solver.mass_matrix(), ops.mass) <= 1e-12);
    CHECK(matrix_distance(solver.bending_matrix(), ops.bending) <= 1e-12);
    CHECK(matrix_distance(solver.penalty_matrix(), ops.penalty) <= 1e-12);
    CHECK(matrix_distance(solver.membrane_gram(), ops.membrane_gram) <= 1e-12);

    // state-dependent operators at a nontrivial state
    Rng rng(3);
    const VecX v = random_vdofs(solver, rng, 0.1);
    const VecX rhs = solver.membrane_rhs(v);
    const VecX rhs_cl = classical_plate_membrane_rhs(solver, v);
    CHECK((rhs - rhs_cl).norm() <= 1e-12 * (1.0 + rhs.norm()));

    const VecX um = solver.project_membrane(v);
    const VecX c = solver.coupling_force(v, um);
    const VecX c_cl = classical_plate_coupling_force(solver, v, um);
    CHECK((c - c_cl).norm() <= 1e-12 * (1.0 + c.norm()));
}

TEST_CASE("membrane projection: zeros, stationarity, dense independent solve") {
    const MaterialModel mat(1.0, 1.0);
    Solver2D solver(Chart::plate(1, 1), 6, 6, mat, 1.0, serial_opts());

    // A = 0 -> B = 0
    CHECK(solver.project_membrane(VecX::Zero(solver.n_vdofs())).norm() == 0.0);

    // kappa = 0 -> B = 0
    Solver2D k0(Chart::plate(1, 1), 6, 6, mat, 0.0, serial_opts());
    Rng rng(7);
    const VecX v0 = random_vdofs(k0, rng, 0.2);
    CHECK(k0.project_membrane(v0).norm() == 0.0);

    // stationarity residual at the solution is tiny over the strain space
    const VecX v = random_vdofs(solver, rng, 0.2);
    const VecX um = solver.project_membrane(v);
    CHECK(solver.residual_B(um, v) <= 1e-12);

    // dense independent solve of the classical system: pin the rigid modes
    // (two translations, one rotation) via Lagrange multipliers
    const PlateOperators ops = classical_plate_operators(solver);
    const VecX rhs = classical_plate_membrane_rhs(solver, v);
    const int n = solver.n_mdofs();
    MatX kkt = MatX::Zero(n + 3, n + 3);
    kkt.topLeftCorner(n, n) = MatX(ops.membrane_gram);
    for (int j = 0; j <= solver.grid().n2(); ++j)
        for (int i = 0; i <= solver.grid().n1(); ++i) {
            const int node = solver.grid().node_id(i, j);
            const Vec2 xi = solver.grid().node_xi(i, j);
            kkt(n + 0, 2 * node) = kkt(2 * node, n + 0) = 1.0;
            kkt(n + 1, 2 * node + 1) = kkt(2 * node + 1, n + 1) = 1.0;
            kkt(n + 2, 2 * node) = kkt(2 * node, n + 2) = -(xi[1] - 0.5);
            kkt(n + 2, 2 * node + 1) = kkt(2 * node + 1, n + 2) = (xi[0] - 0.5);
        }
    VecX rhs_kkt = VecX::Zero(n + 3);
    rhs_kkt.head(n) = rhs;
    const VecX sol = kkt.fullPivLu().solve(rhs_kkt);
    const VecX um_dense = sol.head(n);

    // compare the strain fields (u_m itself is unique only up to the kernel)
    Real worst = 0;
    for (int cell = 0; cell < solver.grid().num_cells(); ++cell)
        for (int q = 0; q < solver.grid().qp_per_cell(); ++q) {
            const Vec2 xi = solver.grid().qp_frame(solver.grid().qp_index(cell, q)).xi;
            worst = std::max(worst, (solver.eval_B(um, xi) - solver.eval_B(um_dense, xi)).norm());
        }
    CHECK(worst <= 1e-9);
}

TEST_CASE("bending form: symmetry, positivity, zero on zero") {
    const MaterialModel mat(1.3, 0.8);
    Solver2D solver(Chart::sphere_patch(2.0, 0.5), 5, 5, mat, 1.0, serial_opts());
    Rng rng(11);
    const VecX a = random_vdofs(solver, rng, 0.3);
    const VecX b = random_vdofs(solver, rng, 0.3);
    CHECK(solver.bending_form(VecX::Zero(solver.n_vdofs()), b) == 0.0);
    const Real ab = solver.bending_form(a, b);
    const Real ba = solver.bending_form(b, a);
    CHECK(std::abs(ab - ba) <= 1e-12 * (1.0 + std::abs(ab)));
    CHECK(solver.bending_form(a, a) >= 0.0);
    CHECK(solver.bending_form(b, b) >= 0.0);
}

TEST_CASE("zero data stays zero; kappa=0 energy conserved; time reversal") {
    const MaterialModel mat(0.01, 0.01);
    Solver2DOptions opts = serial_opts();
    Solver2D solver(Chart::plate(1, 1), 6, 6, mat, 0.0, opts);
    const Forcing none;

    State2D z = solver.zero_state();
    for (int k = 0; k < 3; ++k) z = solver.step_vk(z, 1e-3, none);
    CHECK(z.V.norm() == 0.0);
    CHECK(z.Vt.norm() == 0.0);

    State2D s0 = solver.init_limit({"normal_bump", 0.05}, {"normal_bump", 0.03});
    const Real e0 = solver.energy(s0).kappa0_total();
    REQUIRE(e0 > 0);
    State2D s = s0;
    for (int k = 0; k < 200; ++k) {
        s = solver.step_vk(s, 1e-3, none);
        CHECK(std::abs(solver.energy(s).kappa0_total() - e0) <= 1e-8 * e0);
    }

    // integrate forward then backward: midpoint is time-symmetric
    State2D back = s;
    back.Vt = -back.Vt;
    for (int k = 0; k < 200; ++k) back = solver.step_vk(back, 1e-3, none);
    CHECK((back.V - s0.V).norm() <= 1e-9 * (1.0 + s0.V.norm()));
    CHECK((back.Vt + s0.Vt).norm() <= 1e-9 * (1.0 + s0.Vt.norm()));
}

TEST_CASE("membrane stationarity holds after every accepted step") {
    const MaterialModel mat(0.01, 0.01);
    Solver2D solver(Chart::plate(1, 1), 6, 6, mat, 1.0, serial_opts());
    const Forcing f(Chart::plate(1, 1), "normal_pulse", 0.01, 2 * M_PI, true);
    State2D s = solver.init_limit({"normal_bump", 0.05}, {"normal_bump", 0.03});
    for (int k = 0; k < 50; ++k) {
        StepReport2D rep;
        s = solver.step_vk(s, 1e-3, f, &rep);
        CHECK(rep.residual_B <= 1e-9);
        CHECK(solver.residual_B(s.um, s.V) <= 1e-9);
    }
}

TEST_CASE("kappa continuity: small kappa approaches the kappa = 0 flow") {
    const MaterialModel mat(0.01, 0.01);
    Solver2D s_eps(Chart::plate(1, 1), 6, 6, mat, 1e-6, serial_opts());
    Solver2D s_zero(Chart::plate(1, 1), 6, 6, mat, 0.0, serial_opts());
    const Forcing none;
    State2D a = s_eps.init_limit({"normal_bump", 0.05}, {"normal_bump", 0.03});
    State2D b = s_zero.init_limit({"normal_bump", 0.05}, {"normal_bump", 0.03});
    for (int k = 0; k < 100; ++k) {
        a = s_eps.step_vk(a, 1e-3, none);
        b = s_zero.step_vk(b, 1e-3, none);
    }
    CHECK((a.V - b.V).norm() <= 1e-4 * (1.0 + b.V.norm()));
    CHECK((a.Vt - b.Vt).norm() <= 1e-4 * (1.0 + b.Vt.norm()));
}

TEST_CASE("manufactured kappa=0 plate solution: order-2 convergence in grid spacing") {
    // V*(t,xi) = cos(omega t) v(xi) e3 with v the shipped bump profile;
    // f = [v'' in time + (1/12)(2 mu + lambda*) biharmonic(v)] cos(omega t).
    const MaterialModel mat(1.0, 1.0);
    const QuadraticForms forms(mat);
    const Real omega = 3.0;
    const Real D = (2.0 * mat.mu + forms.lambda_star()) / 12.0;

    auto b = [](Real r) { return 64.0 * r * r * r * (1 - r) * (1 - r) * (1 - r); };
    auto b2 = [](Real r) { return 384.0 * r * (1 - r) * (1 - 5 * r + 5 * r * r); };
    auto b4 = [](Real r) { return 384.0 * (-12.0 + 60.0 * r - 60.0 * r * r); };
    auto biharm = [&](const Vec2& xi) {
        return b4(xi[0]) * b(xi[1]) + 2 * b2(xi[0]) * b2(xi[1]) + b(xi[0]) * b4(xi[1]);
    };

    const Real T = 0.1, dt = 2.5e-4;
    std::vector<Real> errs;
    for (int n : {4, 8, 16}) {
        Solver2D solver(Chart::plate(1, 1), n, n, mat, 0.0, serial_opts());
        State2D s = solver.init_limit({"normal_bump", 1.0}, {"zero", 0});
        auto load_at = [&](Real t) {
            return solver.assemble_load([&](const Vec2& xi) {
                const Real space = -omega * omega * b(xi[0]) * b(xi[1]) + D * biharm(xi);
                return Vec3(0, 0, std::cos(omega * t) * space);
            });
        };
        const long nsteps = std::lround(T / dt);
        for (long k = 0; k < nsteps; ++k) s = solver.step_vk(s, dt, load_at);
        // L2 error against the manufactured solution at t = T
        Real err2 = 0;
        const SurfaceGrid& g = solver.grid();
        for (int cell = 0; cell < g.num_cells(); ++cell)
            for (int q = 0; q < g.qp_per_cell(); ++q) {
                const ChartFrame& fr = g.qp_frame(g.qp_index(cell, q));
                const Vec3 exact =
                    std::cos(omega * T) * b(fr.xi[0]) * b(fr.xi[1]) * Vec3(0, 0, 1);
                err2 += g.qp_weight(q) * fr.area_element *
                        (solver.eval_value(s.V, fr.xi) - exact).squaredNorm();
            }
        errs.push_back(std::sqrt(err2));
    }
    CHECK(std::log2(errs[0] / errs[1]) > 1.9);
    CHECK(std::log2(errs[1] / errs[2]) > 1.9);
}

TEST_CASE("init_limit: interpolation, exact plate isometries, boundary guard") {
    const MaterialModel mat(1.0, 1.0);
    Solver2D solver(Chart::plate(1, 1), 6, 6, mat, 1.0, serial_opts());

    State2D s = solver.init_limit({"normal_bump", 0.4}, {"normal_bump", 0.2});
    // nodal jets reproduce the profile
    for (int j = 0; j <= 6; j += 3)
        for (int i = 0; i <= 6; i += 2) {
            const Vec2 xi = solver.grid().node_xi(i, j);
            const ProfileJet jet = profile_jet(solver.chart(), {"normal_bump", 0.4}, xi);
            const VectorJet2 ev = solver.eval_jet(s.V, xi);
            CHECK((ev.v - jet.value).norm() <= 1e-13);
            CHECK((ev.d1 - jet.d1).norm() <= 1e-12);
            CHECK((ev.d2 - jet.d2).norm() <= 1e-12);
        }

    // out-of-plane plate fields are exact discrete isometries
    CHECK(solver.constraint_residual(s.V) == 0.0);

    CHECK_THROWS_AS(solver.init_limit({"offset_bump", 0.4}, {"zero", 0}), InputError);
}

TEST_CASE("penalized projection: constraint residual decreases with eps_proj") {
    const MaterialModel mat(1.0, 1.0);
    Solver2D solver(Chart::sphere_patch(2.0, 0.5), 6, 6, mat, 1.0, serial_opts());
    Real prev = -1;
    for (Real eps : {1e-2, 1e-4, 1e-6}) {
        State2D s = solver.init_limit_projected({"normal_bump", 0.3}, {"zero", 0}, eps);
        const Real res = solver.constraint_residual(s.V);
        if (prev >= 0) CHECK(res < prev);
        prev = res;
        CHECK(std::isfinite(res));
    }
    CHECK_THROWS_AS(solver.init_limit_projected({"normal_bump", 0.3}, {"zero", 0}, -1.0),
                    InputError);
}

TEST_CASE("skew field construction matches its defining properties") {
    Rng rng(5);
    const Chart chart = Chart::cylinder(1.0, 1.2, 1.0);
    std::uniform_real_distribution<Real> u01(0.05, 0.95);
    for (int k = 0; k < 50; ++k) {
        const Vec2 lo = chart.param_lo(), hi = chart.param_hi();
        const Vec2 xi(lo[0] + (hi[0] - lo[0]) * u01(rng), lo[1] + (hi[1] - lo[1]) * u01(rng));
        const ChartFrame f = chart.frame(xi);
        // derivative data of an exact infinitesimal rotation V = w x x
        const Vec3 w(u01(rng), u01(rng), u01(rng));
        const Vec3 d1 = w.cross(f.t1), d2 = w.cross(f.t2);
        const Mat3 A = skew_field(f, d1, d2);
        CHECK((A + A.transpose()).norm() <= 1e-12);
        CHECK((A * f.t1 - d1).norm() <= 1e-12);
        CHECK((A * f.t2 - d2).norm() <= 1e-12);
        // for a rotation field the completion recovers w x m as well
        CHECK((A * f.m - w.cross(f.m)).norm() <= 1e-12);
        CHECK(sym_tangential_gradient(f, d1, d2).norm() <= 1e-12);
    }
}
