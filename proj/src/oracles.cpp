#include "shellvk/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace shellvk {
namespace oracles {

Mat3 random_matrix(Rng& rng, Real scale) {
    std::uniform_real_distribution<Real> u(-scale, scale);
    Mat3 f;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) f(i, j) = u(rng);
    return f;
}

Mat2 random_matrix2(Rng& rng, Real scale) {
    std::uniform_real_distribution<Real> u(-scale, scale);
    Mat2 f;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) f(i, j) = u(rng);
    return f;
}

Mat3 random_rotation(Rng& rng) {
    std::uniform_real_distribution<Real> u(-1.0, 1.0);
    Vec3 axis(u(rng), u(rng), u(rng));
    while (axis.norm() < 1e-3) axis = Vec3(u(rng), u(rng), u(rng));
    axis.normalize();
    const Real angle = M_PI * u(rng);
    return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

Mat3 fd_stress(const MaterialModel& m, const Mat3& F, Real step) {
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Mat3 fp = F, fm = F;
            fp(i, j) += step;
            fm(i, j) -= step;
            out(i, j) = (m.energy_density(fp) - m.energy_density(fm)) / (2 * step);
        }
    return out;
}

Real fd_q3(const MaterialModel& m, const Mat3& F, Real step) {
    const Mat3 id = Mat3::Identity();
    const Real wp = m.energy_density(id + step * F);
    const Real w0 = m.energy_density(id);
    const Real wm = m.energy_density(id - step * F);
    return (wp - 2 * w0 + wm) / (step * step);
}

namespace {

Real embedded_q3(const MaterialModel& m, const Mat2& G, const Vec3& z) {
    // Extension with prescribed tangential minor G and symmetric normal
    // components: (z0, z1) shears, z2 normal-normal.
    Mat3 f = Mat3::Zero();
    f.topLeftCorner<2, 2>() = G;
    f(0, 2) = f(2, 0) = z[0];
    f(1, 2) = f(2, 1) = z[1];
    f(2, 2) = z[2];
    return m.q3(f);
}

} // namespace

Real brute_force_q2(const MaterialModel& m, const Mat2& G) {
    const Real range = 2.0 * (1.0 + G.norm());
    const int npts = 13;
    Vec3 best = Vec3::Zero();
    Real best_val = embedded_q3(m, G, best);
    for (int a = 0; a < npts; ++a)
        for (int b = 0; b < npts; ++b)
            for (int c = 0; c < npts; ++c) {
                const Vec3 z(-range + 2 * range * a / (npts - 1),
                             -range + 2 * range * b / (npts - 1),
                             -range + 2 * range * c / (npts - 1));
                const Real v = embedded_q3(m, G, z);
                if (v < best_val) {
                    best_val = v;
                    best = z;
                }
            }

    // Newton polish with finite-difference derivatives of the reduced
    // objective; it is a positive-definite quadratic, so this reaches
    // roundoff in a few iterations.
    const Real fd = 1e-5 * (1.0 + G.norm());
    for (int it = 0; it < 12; ++it) {
        Vec3 grad;
        Mat3 hess;
        for (int i = 0; i < 3; ++i) {
            Vec3 zp = best, zm = best;
            zp[i] += fd;
            zm[i] -= fd;
            grad[i] = (embedded_q3(m, G, zp) - embedded_q3(m, G, zm)) / (2 * fd);
            for (int j = 0; j < 3; ++j) {
                Vec3 zpp = best, zpm = best, zmp = best, zmm = best;
                zpp[i] += fd;
                zpp[j] += fd;
                zpm[i] += fd;
                zpm[j] -= fd;
                zmp[i] -= fd;
                zmp[j] += fd;
                zmm[i] -= fd;
                zmm[j] -= fd;
                hess(i, j) = (embedded_q3(m, G, zpp) - embedded_q3(m, G, zpm) -
                              embedded_q3(m, G, zmp) + embedded_q3(m, G, zmm)) /
                             (4 * fd * fd);
            }
        }
        const Vec3 step = hess.ldlt().solve(grad);
        best -= step;
        if (step.norm() < 1e-14 * (1.0 + best.norm())) break;
    }
    return embedded_q3(m, G, best);
}

Real coercivity_constant(const MaterialModel& m, Rng& rng, int samples) {
    Real cmin = std::numeric_limits<Real>::infinity();
    int used = 0;
    while (used < samples) {
        const Mat3 R = random_rotation(rng);
        const Mat3 D = random_matrix(rng, 0.06);
        const Mat3 F = R * (Mat3::Identity() + sym(D));
        const Real d = distance_to_rotations(F);
        if (d < 1e-8 || d > 0.1 || F.determinant() <= 0) continue;
        ++used;
        cmin = std::min(cmin, m.energy_density(F) / (d * d));
    }
    return cmin;
}

// ---------------------------------------------------------------------------
// Classical flat-plate assembly: direct 2D formulas (deflection Hessians and
// plane gradients in Cartesian chart coordinates), no frames, no curvature
// machinery. Shares only the DOF layout and quadrature rule with Solver2D.

namespace {

struct H1D {
    Real v[4], d[4], dd[4];
};

H1D hermite1d(Real u, Real delta) {
    H1D h;
    const Real u2 = u * u, u3 = u2 * u;
    h.v[0] = 1 - 3 * u2 + 2 * u3;
    h.v[1] = delta * (u - 2 * u2 + u3);
    h.v[2] = 3 * u2 - 2 * u3;
    h.v[3] = delta * (u3 - u2);
    h.d[0] = (-6 * u + 6 * u2) / delta;
    h.d[1] = 1 - 4 * u + 3 * u2;
    h.d[2] = (6 * u - 6 * u2) / delta;
    h.d[3] = 3 * u2 - 2 * u;
    h.dd[0] = (-6 + 12 * u) / (delta * delta);
    h.dd[1] = (-4 + 6 * u) / delta;
    h.dd[2] = (6 - 12 * u) / (delta * delta);
    h.dd[3] = (6 * u - 2) / delta;
    return h;
}

struct SJet {
    Real v, d1, d2, d11, d12, d22;
};

SJet sjet(const H1D& hu, const H1D& hv, int corner, int mode) {
    const int iu = (corner & 1) ? 2 : 0;
    const int iv = (corner & 2) ? 2 : 0;
    const int mu = iu + ((mode == 1 || mode == 3) ? 1 : 0);
    const int mv = iv + ((mode == 2 || mode == 3) ? 1 : 0);
    SJet s;
    s.v = hu.v[mu] * hv.v[mv];
    s.d1 = hu.d[mu] * hv.v[mv];
    s.d2 = hu.v[mu] * hv.d[mv];
    s.d11 = hu.dd[mu] * hv.v[mv];
    s.d12 = hu.d[mu] * hv.d[mv];
    s.d22 = hu.v[mu] * hv.dd[mv];
    return s;
}

Real blin(Real u, Real v, int corner) {
    return ((corner & 1) ? u : 1 - u) * ((corner & 2) ? v : 1 - v);
}

Vec2 blin_grad(Real u, Real v, int corner, Real d1, Real d2) {
    const Real fu = (corner & 1) ? u : 1 - u;
    const Real fv = (corner & 2) ? v : 1 - v;
    const Real gu = (corner & 1) ? 1.0 : -1.0;
    const Real gv = (corner & 2) ? 1.0 : -1.0;
    return Vec2(gu * fv / d1, fu * gv / d2);
}

Mat2 l2_classical(const QuadraticForms& forms, const Mat2& s) {
    const Mat2 ss = sym2(s);
    return 2.0 * forms.model.mu * ss + forms.lambda_star() * ss.trace() * Mat2::Identity();
}

void local_indices(const Solver2D& solver, int ei, int ej, std::array<int, 48>& vidx,
                   std::array<int, 8>& midx) {
    const SurfaceGrid& grid = solver.grid();
    int l = 0, lm = 0;
    for (int corner = 0; corner < 4; ++corner) {
        const int i = ei + (corner & 1), j = ej + ((corner & 2) ? 1 : 0);
        const int node = grid.node_id(i, j);
        for (int c = 0; c < 3; ++c)
            for (int m = 0; m < 4; ++m) vidx[l++] = solver.vdof(node, c, m);
        midx[lm++] = 2 * node;
        midx[lm++] = 2 * node + 1;
    }
}

// Deflection gradient / Hessian and in-plane Jacobian of a V-DOF vector at a
// quadrature point, by direct summation of the flat-chart jets.
struct PlateField {
    Vec2 grad_w = Vec2::Zero();
    Mat2 hess_w = Mat2::Zero();
    Mat2 grad_ip = Mat2::Zero(); // J(a,b) = d_b u_a
};

PlateField plate_field(const Solver2D& solver, const VecX& vdofs, int ei, int ej, Real u,
                       Real v) {
    const SurfaceGrid& grid = solver.grid();
    const H1D hu = hermite1d(u, grid.dxi1()), hv = hermite1d(v, grid.dxi2());
    PlateField out;
    for (int corner = 0; corner < 4; ++corner) {
        const int i = ei + (corner & 1), j = ej + ((corner & 2) ? 1 : 0);
        const int node = grid.node_id(i, j);
        for (int mode = 0; mode < 4; ++mode) {
            const SJet s = sjet(hu, hv, corner, mode);
            const Real w = vdofs[solver.vdof(node, 2, mode)];
            out.grad_w += w * Vec2(s.d1, s.d2);
            out.hess_w(0, 0) += w * s.d11;
            out.hess_w(0, 1) += w * s.d12;
            out.hess_w(1, 0) += w * s.d12;
            out.hess_w(1, 1) += w * s.d22;
            for (int c = 0; c < 2; ++c) {
                const Real uc = vdofs[solver.vdof(node, c, mode)];
                out.grad_ip(c, 0) += uc * s.d1;
                out.grad_ip(c, 1) += uc * s.d2;
            }
        }
    }
    return out;
}

Mat2 membrane_strain_classical(const Solver2D& solver, const VecX& um, int ei, int ej, Real u,
                               Real v) {
    const SurfaceGrid& grid = solver.grid();
    Mat2 J = Mat2::Zero();
    for (int corner = 0; corner < 4; ++corner) {
        const int i = ei + (corner & 1), j = ej + ((corner & 2) ? 1 : 0);
        const int node = grid.node_id(i, j);
        const Vec2 g = blin_grad(u, v, corner, grid.dxi1(), grid.dxi2());
        for (int c = 0; c < 2; ++c) J.row(c) += um[2 * node + c] * g.transpose();
    }
    return sym2(J);
}

} // namespace

PlateOperators classical_plate_operators(const Solver2D& solver) {
    if (solver.chart().kind() != ChartKind::Plate)
        throw InputError("classical plate assembly needs a plate chart");
    const SurfaceGrid& grid = solver.grid();
    const int n1 = grid.n1(), n2 = grid.n2(), nqc = grid.qp_per_cell();
    const Real d1 = grid.dxi1(), d2 = grid.dxi2();
    const QuadraticForms& forms = solver.forms();

    std::vector<Triplet> tm, tk, tp, tkm;
    std::array<int, 48> vidx;
    std::array<int, 8> midx;
    for (int ej = 0; ej < n2; ++ej)
        for (int ei = 0; ei < n1; ++ei) {
            local_indices(solver, ei, ej, vidx, midx);
            MatX me = MatX::Zero(48, 48), ke = me, pe = me;
            MatX kme = MatX::Zero(8, 8);
            for (int q = 0; q < nqc; ++q) {
                const Vec2 loc = grid.qp_local(q);
                const Real w = grid.qp_weight(q); // flat chart: area element 1
                const H1D hu = hermite1d(loc[0], d1), hv = hermite1d(loc[1], d2);

                std::array<SJet, 16> jets;
                for (int corner = 0; corner < 4; ++corner)
                    for (int mode = 0; mode < 4; ++mode)
                        jets[corner * 4 + mode] = sjet(hu, hv, corner, mode);

                for (int a = 0; a < 48; ++a) {
                    const int ca = a / 12, compa = (a % 12) / 4, ma = a % 4;
                    const SJet& sa = jets[ca * 4 + ma];
                    for (int b = 0; b < 48; ++b) {
                        const int cb = b / 12, compb = (b % 12) / 4, mb = b % 4;
                        if (compa != compb) continue;
                        const SJet& sb = jets[cb * 4 + mb];
                        me(a, b) += w * sa.v * sb.v;
                        if (compa == 2) {
                            Mat2 ha, hb;
                            ha << sa.d11, sa.d12, sa.d12, sa.d22;
                            hb << sb.d11, sb.d12, sb.d12, sb.d22;
                            ke(a, b) += w / 12.0 * ddot2(l2_classical(forms, ha), hb);
                        } else {
                            Mat2 ea = Mat2::Zero(), eb = Mat2::Zero();
                            ea.row(compa) << sa.d1, sa.d2;
                            eb.row(compb) << sb.d1, sb.d2;
                            pe(a, b) += w * ddot2(sym2(ea), sym2(eb));
                        }
                    }
                    // in-plane penalty also couples the two components
                    if (compa < 2)
                        for (int b = 0; b < 48; ++b) {
                            const int cb = b / 12, compb = (b % 12) / 4, mb = b % 4;
                            if (compb > 1 || compb == compa) continue;
                            const SJet& sb = jets[cb * 4 + mb];
                            Mat2 ea = Mat2::Zero(), eb = Mat2::Zero();
                            ea.row(compa) << sa.d1, sa.d2;
                            eb.row(compb) << sb.d1, sb.d2;
                            pe(a, b) += w * ddot2(sym2(ea), sym2(eb));
                        }
                }

                for (int a = 0; a < 8; ++a) {
                    Mat2 ea = Mat2::Zero();
                    ea.row(a % 2) = blin_grad(loc[0], loc[1], a / 2, d1, d2).transpose();
                    const Mat2 l2ea = l2_classical(forms, ea);
                    for (int b = 0; b < 8; ++b) {
                        Mat2 eb = Mat2::Zero();
                        eb.row(b % 2) = blin_grad(loc[0], loc[1], b / 2, d1, d2).transpose();
                        kme(a, b) += w * ddot2(l2ea, sym2(eb));
                    }
                }
            }
            for (int a = 0; a < 48; ++a)
                for (int b = 0; b < 48; ++b) {
                    tm.emplace_back(vidx[a], vidx[b], me(a, b));
                    tk.emplace_back(vidx[a], vidx[b], ke(a, b));
                    tp.emplace_back(vidx[a], vidx[b], pe(a, b));
                }
            for (int a = 0; a < 8; ++a)
                for (int b = 0; b < 8; ++b) tkm.emplace_back(midx[a], midx[b], kme(a, b));
        }

    PlateOperators out;
    auto build = [](int n, std::vector<Triplet>& t) {
        SpMat s(n, n);
        s.setFromTriplets(t.begin(), t.end());
        return s;
    };
    out.mass = build(solver.n_vdofs(), tm);
    out.bending = build(solver.n_vdofs(), tk);
    out.penalty = build(solver.n_vdofs(), tp);
    out.membrane_gram = build(solver.n_mdofs(), tkm);
    return out;
}

VecX classical_plate_membrane_rhs(const Solver2D& solver, const VecX& vdofs) {
    const SurfaceGrid& grid = solver.grid();
    const QuadraticForms& forms = solver.forms();
    const Real sk2 = 0.5 * std::sqrt(solver.kappa());
    VecX rhs = VecX::Zero(solver.n_mdofs());
    std::array<int, 48> vidx;
    std::array<int, 8> midx;
    for (int ej = 0; ej < grid.n2(); ++ej)
        for (int ei = 0; ei < grid.n1(); ++ei) {
            local_indices(solver, ei, ej, vidx, midx);
            for (int q = 0; q < grid.qp_per_cell(); ++q) {
                const Vec2 loc = grid.qp_local(q);
                const Real w = grid.qp_weight(q);
                const PlateField pf = plate_field(solver, vdofs, ei, ej, loc[0], loc[1]);
                // (A^2)_tan = -grad w (x) grad w + J J
                const Mat2 a2 = -pf.grad_w * pf.grad_w.transpose() + pf.grad_ip * pf.grad_ip;
                const Mat2 target = l2_classical(forms, sk2 * a2);
                for (int a = 0; a < 8; ++a) {
                    Mat2 ea = Mat2::Zero();
                    ea.row(a % 2) =
                        blin_grad(loc[0], loc[1], a / 2, grid.dxi1(), grid.dxi2()).transpose();
                    rhs[midx[a]] += w * ddot2(target, sym2(ea));
                }
            }
        }
    return rhs;
}

VecX classical_plate_coupling_force(const Solver2D& solver, const VecX& vdofs,
                                    const VecX& um) {
    const SurfaceGrid& grid = solver.grid();
    const QuadraticForms& forms = solver.forms();
    const Real sk2 = 0.5 * std::sqrt(solver.kappa());
    VecX out = VecX::Zero(solver.n_vdofs());
    std::array<int, 48> vidx;
    std::array<int, 8> midx;
    for (int ej = 0; ej < grid.n2(); ++ej)
        for (int ei = 0; ei < grid.n1(); ++ei) {
            local_indices(solver, ei, ej, vidx, midx);
            const H1D dummy = hermite1d(0.5, grid.dxi1());
            (void)dummy;
            for (int q = 0; q < grid.qp_per_cell(); ++q) {
                const Vec2 loc = grid.qp_local(q);
                const Real w = grid.qp_weight(q);
                const PlateField pf = plate_field(solver, vdofs, ei, ej, loc[0], loc[1]);
                const Mat2 B = membrane_strain_classical(solver, um, ei, ej, loc[0], loc[1]);
                const Mat2 a2 = -pf.grad_w * pf.grad_w.transpose() + pf.grad_ip * pf.grad_ip;
                const Mat2 sigma = l2_classical(forms, B - sk2 * a2);

                const H1D hu = hermite1d(loc[0], grid.dxi1());
                const H1D hv = hermite1d(loc[1], grid.dxi2());
                for (int l = 0; l < 48; ++l) {
                    const int cl = l / 12, compl_ = (l % 12) / 4, ml = l % 4;
                    const SJet s = sjet(hu, hv, cl, ml);
                    Mat2 aat;
                    if (compl_ == 2) {
                        aat = -pf.grad_w * Vec2(s.d1, s.d2).transpose();
                    } else {
                        Mat2 jt = Mat2::Zero();
                        jt.row(compl_) << s.d1, s.d2;
                        aat = pf.grad_ip * jt;
                    }
                    out[vidx[l]] += w * ddot2(sigma, aat);
                }
            }
        }
    return out;
}

Real matrix_distance(const SpMat& a, const SpMat& b) {
    Real scale = 0;
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMat::InnerIterator it(a, k); it; ++it)
            scale = std::max(scale, std::abs(it.value()));
    SpMat d = a - b;
    Real worst = 0;
    for (int k = 0; k < d.outerSize(); ++k)
        for (SpMat::InnerIterator it(d, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst / std::max(scale, Real(1e-300));
}

} // namespace oracles
} // namespace shellvk
