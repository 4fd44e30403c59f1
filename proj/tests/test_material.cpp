#include "shellvk/material.hpp"
#include "shellvk/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace shellvk;
using namespace shellvk::oracles;

TEST_CASE("energy density: zeros and a hand value") {
    const MaterialModel m(1.0, 1.0);
    CHECK(m.energy_density(Mat3::Identity()) == 0.0);

    Rng rng(5);
    for (int k = 0; k < 50; ++k) CHECK(m.energy_density(random_rotation(rng)) < 1e-12);

    // mu = lambda = 1, F = diag(1.1, 1, 1): E = diag(0.105, 0, 0),
    // W = |E|^2 + (tr E)^2 / 2 = 1.5 * 0.105^2
    const Mat3 F = Vec3(1.1, 1.0, 1.0).asDiagonal();
    CHECK(m.energy_density(F) == doctest::Approx(1.5 * 0.105 * 0.105).epsilon(1e-14));
    CHECK(m.energy_density(F) == doctest::Approx(0.0165375).epsilon(1e-12));
}

TEST_CASE("frame indifference on 1000 samples") {
    const MaterialModel m(1.3, 0.7);
    Rng rng(42);
    for (int k = 0; k < 1000; ++k) {
        const Mat3 R = random_rotation(rng);
        const Mat3 F = Mat3::Identity() + random_matrix(rng, 1.0);
        const Real w = m.energy_density(F);
        CHECK(std::abs(m.energy_density(R * F) - w) <= 1e-12 * (1.0 + std::abs(w)));
    }
}

TEST_CASE("stress: zeros, finite-difference check, DW(F) F^T symmetry") {
    const MaterialModel m(1.0, 1.0);
    CHECK(m.stress(Mat3::Identity()).norm() == 0.0);

    Rng rng(9);
    for (int k = 0; k < 20; ++k) CHECK(m.stress(random_rotation(rng)).norm() < 1e-12);

    for (int k = 0; k < 50; ++k) {
        const Mat3 F = Mat3::Identity() + random_matrix(rng, 0.8);
        const Mat3 exact = m.stress(F);
        const Mat3 fd = fd_stress(m, F);
        CHECK((exact - fd).norm() <= 1e-6 * (1.0 + exact.norm()));
    }

    for (int k = 0; k < 100; ++k) {
        const Mat3 F = random_matrix(rng, 2.0);
        const Mat3 S = m.stress(F) * F.transpose();
        CHECK((S - S.transpose()).norm() <= 1e-12 * (1.0 + S.norm()));
    }
}

TEST_CASE("stress tangent matches finite differences of the stress") {
    const MaterialModel m(0.8, 1.9);
    Rng rng(13);
    for (int k = 0; k < 30; ++k) {
        const Mat3 F = Mat3::Identity() + random_matrix(rng, 0.4);
        const Mat3 H = random_matrix(rng, 1.0);
        const Real d = 1e-6;
        const Mat3 fd = (m.stress(F + d * H) - m.stress(F - d * H)) / (2 * d);
        CHECK((m.stress_tangent(F, H) - fd).norm() <= 1e-6 * (1.0 + fd.norm()));
    }
}

TEST_CASE("q3: values and finite-difference Hessian oracle") {
    const MaterialModel m(1.0, 1.0);

    // skew arguments cost nothing
    Mat3 skew;
    skew << 0, 1, -0.3, -1, 0, 2, 0.3, -2, 0;
    CHECK(m.q3(skew) == 0.0);

    CHECK(m.q3(Mat3::Identity()) == doctest::Approx(15.0).epsilon(1e-14));

    // mu=1, lambda=0, F = e1 (x) e2: 2 |sym F|^2 = 1.0; the finite-difference
    // Hessian of W at the identity is the reference value.
    const MaterialModel m0(1.0, 0.0);
    Mat3 e12 = Mat3::Zero();
    e12(0, 1) = 1.0;
    const Real fd = fd_q3(m0, e12);
    CHECK(m0.q3(e12) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(m0.q3(e12) == doctest::Approx(fd).epsilon(1e-5));

    Rng rng(21);
    for (int k = 0; k < 40; ++k) {
        const Mat3 F = random_matrix(rng, 1.5);
        CHECK(m.q3(F) == doctest::Approx(fd_q3(m, F)).epsilon(1e-5));
        CHECK(m.q3(F) == doctest::Approx(ddot(m.l3_apply(F), F)).epsilon(1e-13));
    }
}

TEST_CASE("q2: closed form against brute-force relaxation") {
    Rng rng(31);
    const QuadraticForms f11(MaterialModel(1.0, 1.0));

    CHECK(f11.q2(Mat2::Zero()) == 0.0);
    Mat2 sk;
    sk << 0, 1, -1, 0;
    CHECK(f11.q2(sk) == 0.0);
    CHECK(f11.q2(Mat2::Identity()) == doctest::Approx(20.0 / 3.0).epsilon(1e-12));
    CHECK(brute_force_q2(MaterialModel(1.0, 1.0), Mat2::Identity()) ==
          doctest::Approx(20.0 / 3.0).epsilon(1e-10));

    for (const MaterialModel m : {MaterialModel(1, 1), MaterialModel(2.2, 0.3)}) {
        const QuadraticForms f(m);
        for (int k = 0; k < 50; ++k) {
            const Mat2 G = random_matrix2(rng, 2.0);
            const Real closed = f.q2(G);
            CHECK(std::abs(closed - brute_force_q2(m, G)) <= 1e-10 * (1.0 + std::abs(closed)));
        }
    }
}

TEST_CASE("q2 relaxation optimality: below every admissible extension") {
    Rng rng(101);
    const MaterialModel m(1.4, 0.9);
    const QuadraticForms f(m);
    std::uniform_real_distribution<Real> u(-2.0, 2.0);
    for (int k = 0; k < 200; ++k) {
        const Mat2 G = random_matrix2(rng, 1.5);
        const Real q2v = f.q2(G);
        for (int e = 0; e < 50; ++e) {
            Mat3 ext = Mat3::Zero();
            ext.topLeftCorner<2, 2>() = G;
            ext(0, 2) = u(rng);
            ext(2, 0) = u(rng);
            ext(1, 2) = u(rng);
            ext(2, 1) = u(rng);
            ext(2, 2) = u(rng);
            CHECK(q2v <= m.q3(ext) + 1e-10 * (1.0 + q2v));
        }
        // the returned minimizer achieves the minimum
        const Mat3 opt = f.minimizing_extension(Vec3::Zero(), G);
        Mat3 full = opt;
        full.topLeftCorner<2, 2>() = G;
        CHECK(m.q3(full) == doctest::Approx(q2v).epsilon(1e-10));
    }
}

TEST_CASE("l2: polarization identity and positive definiteness") {
    Rng rng(55);
    const QuadraticForms f(MaterialModel(1.0, 1.0));

    CHECK(f.l2_apply(Mat2::Zero()).norm() == 0.0);
    Mat2 sk;
    sk << 0, -2, 2, 0;
    CHECK(f.l2_apply(sk).norm() == 0.0);

    // mu = lambda = 1: L2(Id) = (10/3) Id, contracted with Id gives 20/3
    const Mat2 l2id = f.l2_apply(Mat2::Identity());
    CHECK((l2id - (10.0 / 3.0) * Mat2::Identity()).norm() < 1e-13);
    CHECK(ddot2(l2id, Mat2::Identity()) == doctest::Approx(20.0 / 3.0).epsilon(1e-13));

    for (int k = 0; k < 200; ++k) {
        const Mat2 a = random_matrix2(rng, 1.0), b = random_matrix2(rng, 1.0);
        const Real pol = 0.25 * (f.q2(a + b) - f.q2(a - b));
        CHECK(std::abs(ddot2(f.l2_apply(a), b) - pol) <= 1e-10 * (1.0 + std::abs(pol)));
        CHECK(ddot2(f.l2_apply(a), a) == doctest::Approx(f.q2(a)).epsilon(1e-12));
    }

    // eigenvalues of L2 on symmetric 2x2 (basis e11, e22, sqrt(2) e12)
    const Real ls = f.lambda_star();
    Mat3 op = Mat3::Zero();
    op(0, 0) = op(1, 1) = 2.0 + ls;
    op(0, 1) = op(1, 0) = ls;
    op(2, 2) = 2.0;
    Eigen::SelfAdjointEigenSolver<Mat3> es(op);
    CHECK(es.eigenvalues().minCoeff() > 0);
}

TEST_CASE("local coercivity: fitted constant is positive") {
    Rng rng(77);
    const MaterialModel m(1.0, 1.0);
    const Real c = coercivity_constant(m, rng, 1000);
    CHECK(c > 0);
    CHECK(std::isfinite(c));
}

TEST_CASE("DW near identity is the L3-induced linear map at order >= 1.9") {
    Rng rng(123);
    const MaterialModel m(1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        const Mat3 G = random_matrix(rng, 1.0);
        Real err1 = 0, err2 = 0;
        for (int pass = 0; pass < 2; ++pass) {
            const Real eps = pass == 0 ? 1e-2 : 1e-3;
            const Mat3 lin = eps * m.l3_apply(G);
            const Real err = (m.stress(Mat3::Identity() + eps * G) - lin).norm();
            (pass == 0 ? err1 : err2) = err;
        }
        const Real order = std::log10(err1 / err2);
        CHECK(order >= 1.9);
    }
}

TEST_CASE("distance to rotations and polar rotation") {
    Rng rng(99);
    for (int k = 0; k < 50; ++k) {
        const Mat3 R = random_rotation(rng);
        CHECK(distance_to_rotations(R) < 1e-12);
        CHECK((polar_rotation(R) - R).norm() < 1e-12);
        const Mat3 F = R * (Mat3::Identity() + 0.1 * sym(random_matrix(rng, 1.0)));
        const Mat3 P = polar_rotation(F);
        CHECK(std::abs(P.determinant() - 1.0) < 1e-12);
        CHECK((P.transpose() * P - Mat3::Identity()).norm() < 1e-12);
    }

    // reflections are far from SO(3)
    Mat3 refl = Mat3::Identity();
    refl(2, 2) = -1;
    CHECK(distance_to_rotations(refl) > 1.0);
}

TEST_CASE("material validation") {
    CHECK_THROWS_AS(MaterialModel(-1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(MaterialModel(1.0, -0.5), ConfigError);
}
