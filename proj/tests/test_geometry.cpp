#include "shellvk/geometry.hpp"
#include "shellvk/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace shellvk;

namespace {
Vec2 random_xi(const Chart& c, oracles::Rng& rng) {
    std::uniform_real_distribution<Real> u(0.0, 1.0);
    const Vec2 lo = c.param_lo(), hi = c.param_hi();
    return Vec2(lo[0] + (hi[0] - lo[0]) * u(rng), lo[1] + (hi[1] - lo[1]) * u(rng));
}
} // namespace

TEST_CASE("chart normals at reference points") {
    const Chart plate = Chart::plate(1, 1);
    CHECK((normal(plate, Vec2(0.3, 0.7)) - Vec3(0, 0, 1)).norm() == 0.0);

    // theta = 0 line of the unit cylinder: outward normal is +e1
    const Chart cyl = Chart::cylinder(1.0, 1.2, 1.0);
    CHECK((normal(cyl, Vec2(0.0, 0.0)) - Vec3(1, 0, 0)).norm() < 1e-15);

    // pole of the graph chart: outward normal is +e3
    const Chart sph = Chart::sphere_patch(2.0, 0.5);
    CHECK((normal(sph, Vec2(0.0, 0.0)) - Vec3(0, 0, 1)).norm() < 1e-15);

    CHECK_THROWS_AS(normal(plate, Vec2(1.5, 0.5)), GeometryError);
}

TEST_CASE("unit normal and rank-2 Jacobian at random points") {
    oracles::Rng rng(7);
    for (const Chart& c :
         {Chart::plate(1.3, 0.8), Chart::cylinder(0.9, 1.1, 1.4), Chart::sphere_patch(2, 0.5)}) {
        for (int k = 0; k < 200; ++k) {
            const ChartFrame f = c.frame(random_xi(c, rng));
            CHECK(std::abs(f.n.norm() - 1.0) < 1e-12);
            CHECK(std::abs(f.n.dot(f.t1)) < 1e-12);
            CHECK(std::abs(f.n.dot(f.t2)) < 1e-12);
            CHECK(f.area_element > 1e-6);
        }
    }
}

TEST_CASE("second fundamental form: principal curvatures") {
    const SecondFundamentalForm plate = second_fundamental_form(Chart::plate(1, 1), Vec2(0.5, 0.5));
    CHECK(plate.Pi.norm() == 0.0);
    CHECK(plate.principal.norm() == 0.0);

    const Real R = 1.7;
    const SecondFundamentalForm cyl =
        second_fundamental_form(Chart::cylinder(R, 1.2, 1.0), Vec2(0.2, 0.4));
    CHECK(cyl.principal.minCoeff() == doctest::Approx(-1.0 / R).epsilon(1e-12));
    CHECK(std::abs(cyl.principal.maxCoeff()) < 1e-13);

    const SecondFundamentalForm sph =
        second_fundamental_form(Chart::sphere_patch(2.0, 0.5), Vec2(0.1, -0.2));
    const ChartFrame f = Chart::sphere_patch(2.0, 0.5).frame(Vec2(0.1, -0.2));
    const Mat2 tan = f.tangential(sph.Pi);
    CHECK((tan + 0.5 * Mat2::Identity()).norm() < 1e-12);
}

TEST_CASE("curvature tensor: tangency, symmetry, derivative consistency") {
    oracles::Rng rng(11);
    std::uniform_real_distribution<Real> uc(-1.0, 1.0);
    for (const Chart& c :
         {Chart::plate(1, 1), Chart::cylinder(1.0, 1.2, 1.0), Chart::sphere_patch(2, 0.5)}) {
        for (int k = 0; k < 1000; ++k) {
            const ChartFrame f = c.frame(random_xi(c, rng));
            const Vec3 tau = uc(rng) * f.that1 + uc(rng) * f.that2;
            const Vec3 tau2 = uc(rng) * f.that1 + uc(rng) * f.that2;
            CHECK(std::abs((f.Pi * tau).dot(f.n)) < 1e-10);
            CHECK(std::abs((f.Pi * tau).dot(tau2) - (f.Pi * tau2).dot(tau)) < 1e-10);
            CHECK((f.Pi * f.m).norm() <= 1e-15);
        }
    }

    // Pi equals the directional derivative of the director along tangents
    // (finite-difference check).
    for (const Chart& c : {Chart::cylinder(1.0, 1.2, 1.0), Chart::sphere_patch(2, 0.45)}) {
        for (int k = 0; k < 50; ++k) {
            Vec2 xi = random_xi(c, rng);
            const Vec2 lo = c.param_lo(), hi = c.param_hi();
            xi = lo + 0.1 * (hi - lo) + 0.8 * (xi - lo); // stay interior
            const Real d = 1e-6;
            const ChartFrame f = c.frame(xi);
            for (int dir = 0; dir < 2; ++dir) {
                Vec2 xp = xi, xm = xi;
                xp[dir] += d;
                xm[dir] -= d;
                const Vec3 fd = (c.director(xp) - c.director(xm)) / (2 * d);
                CHECK((fd - f.Pi * f.t(dir)).norm() < 1e-7);
            }
        }
    }
}

TEST_CASE("shifter values and algebra") {
    // plate: F = Id for any s
    const Shifter sp = shifter(Chart::plate(1, 1).curvature(Vec2(0.5, 0.5)), 0.3);
    CHECK((sp.F - Mat3::Identity()).norm() == 0.0);
    CHECK(sp.det == doctest::Approx(1.0).epsilon(1e-15));

    // cylinder R=1 outward at s=0.1: det = 0.9
    const Chart cyl = Chart::cylinder(1.0, 1.2, 1.0);
    const Shifter sc = shifter(cyl.curvature(Vec2(0.0, 0.5)), 0.1);
    CHECK(sc.det == doctest::Approx(0.9).epsilon(1e-12));

    // sphere R=1 outward at s=0.1: det = 0.81
    const Chart sph = Chart::sphere_patch(1.0, 0.25);
    const Shifter ss = shifter(sph.curvature(Vec2(0.05, -0.1)), 0.1);
    CHECK(ss.det == doctest::Approx(0.81).epsilon(1e-12));

    // F(0) = Id exactly; F Finv = Id; det F(s) = (1+s k1)(1+s k2)
    oracles::Rng rng(3);
    for (const Chart& c : {cyl, Chart::sphere_patch(2, 0.5)}) {
        for (int k = 0; k < 100; ++k) {
            const Vec2 xi = random_xi(c, rng);
            const Mat3 Pi = c.curvature(xi);
            CHECK((shifter(Pi, 0.0).F - Mat3::Identity()).norm() == 0.0);
            std::uniform_real_distribution<Real> us(-0.4, 0.4);
            const Real s = us(rng);
            const Shifter sh = shifter(Pi, s);
            CHECK((sh.F * sh.Finv - Mat3::Identity()).norm() < 1e-12);
            const SecondFundamentalForm sf = second_fundamental_form(c, xi);
            const Real det_formula = (1 + s * sf.principal[0]) * (1 + s * sf.principal[1]);
            CHECK(sh.det == doctest::Approx(det_formula).epsilon(1e-12));
        }
    }

    CHECK_THROWS_AS(shifter(cyl.curvature(Vec2(0.0, 0.5)), 1.5), GeometryError);
}

TEST_CASE("mesh construction, counts, and bound violations") {
    const ShellMesh mesh(Chart::plate(1, 1), 4, 4, 2, 0.1);
    CHECK(mesh.num_elements() == 4 * 4 * 2);
    CHECK(mesh.num_nodes() == 5 * 5 * 3);

    CHECK_THROWS_AS(ShellMesh(Chart::cylinder(1.0, 1.2, 1.0), 4, 4, 2, 2.5), GeometryError);

    // sphere R=2, h0=0.2: min det F = (1-0.05)^2 > 1/2
    const ShellMesh smesh(Chart::sphere_patch(2.0, 0.5), 4, 4, 2, 0.2);
    Real min_det = 2;
    for (int cq = 0; cq < 4 * 4 * smesh.n_chart_qp_per_cell(); ++cq)
        for (int sq = 0; sq < 2 * smesh.n_s_qp_per_layer(); ++sq)
            min_det = std::min(min_det, smesh.shifter_at(cq, sq).det);
    CHECK(min_det > 0.9025 - 1e-9);
    CHECK(min_det < 1.0);
}

TEST_CASE("quadrature area converges to the reference area at order >= 2") {
    for (const Chart& c :
         {Chart::plate(1.2, 0.9), Chart::cylinder(1.0, 1.2, 1.0), Chart::sphere_patch(2, 0.5)}) {
        const Real exact = c.reference_area();
        Real prev_err = -1;
        std::vector<Real> errs;
        for (int n : {4, 8, 16}) {
            const ShellMesh mesh(c, n, n, 1, 0.05);
            errs.push_back(std::abs(mesh.quadrature_area() - exact));
        }
        // plate and cylinder have constant area elements (exact quadrature);
        // the sphere patch must gain at least ~2 orders per refinement level
        if (c.kind() != ChartKind::SpherePatch) {
            CHECK(errs.back() < 1e-12);
        } else {
            const Real rate1 = std::log2(errs[0] / errs[1]);
            const Real rate2 = std::log2(errs[1] / errs[2]);
            CHECK(rate1 > 1.9);
            CHECK(rate2 > 1.9);
        }
        (void)prev_err;
    }
}

TEST_CASE("frame derivative fields differentiate the frame") {
    oracles::Rng rng(17);
    for (const Chart& c : {Chart::cylinder(1.0, 1.2, 1.0), Chart::sphere_patch(2, 0.45)}) {
        for (int k = 0; k < 30; ++k) {
            Vec2 xi = random_xi(c, rng);
            const Vec2 lo = c.param_lo(), hi = c.param_hi();
            xi = lo + 0.1 * (hi - lo) + 0.8 * (xi - lo);
            const ChartFrame f = c.frame(xi);
            const Real d = 1e-6;
            for (int dir = 0; dir < 2; ++dir) {
                Vec2 xp = xi, xm = xi;
                xp[dir] += d;
                xm[dir] -= d;
                const ChartFrame fp = c.frame(xp), fm = c.frame(xm);
                CHECK((f.that_deriv(0, dir) - (fp.that1 - fm.that1) / (2 * d)).norm() < 1e-6);
                CHECK((f.that_deriv(1, dir) - (fp.that2 - fm.that2) / (2 * d)).norm() < 1e-6);
                CHECK((f.g_deriv(0, dir) - (fp.g1 - fm.g1) / (2 * d)).norm() < 1e-6);
                CHECK((f.g_deriv(1, dir) - (fp.g2 - fm.g2) / (2 * d)).norm() < 1e-6);
            }
        }
    }
}

TEST_CASE("mesh dump produces parseable CSV") {
    const ShellMesh mesh(Chart::plate(1, 1), 2, 2, 1, 0.1);
    mesh.dump_csv("mesh_nodes_test.csv", "mesh_conn_test.csv");
    std::ifstream nf("mesh_nodes_test.csv");
    std::string header;
    std::getline(nf, header);
    CHECK(header == "id,xi1,xi2,s,x,y,z");
    int lines = 0;
    std::string line;
    while (std::getline(nf, line))
        if (!line.empty()) ++lines;
    CHECK(lines == mesh.num_nodes());
    std::remove("mesh_nodes_test.csv");
    std::remove("mesh_conn_test.csv");
}
