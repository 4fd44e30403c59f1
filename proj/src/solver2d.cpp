#include "shellvk/solver2d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shellvk {

namespace {

// Cubic Hermite shapes on [0,1]; derivative DOFs carry physical derivatives,
// so the slope modes scale with the cell size.
struct Hermite1D {
    Real v[4], d[4], dd[4]; // per mode: left-val, left-slope, right-val, right-slope
};

Hermite1D hermite(Real u, Real delta) {
    Hermite1D h;
    const Real u2 = u * u, u3 = u2 * u;
    h.v[0] = 1 - 3 * u2 + 2 * u3;
    h.v[1] = delta * (u - 2 * u2 + u3);
    h.v[2] = 3 * u2 - 2 * u3;
    h.v[3] = delta * (u3 - u2);
    // physical first derivative: d/dxi = (1/delta) d/du
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

// Scalar jet of Hermite DOF (corner a in {0..3}, mode m in {0..3}).
struct ScalarJet {
    Real v, d1, d2, d11, d12, d22;
};

ScalarJet hermite_mode(const Hermite1D& hu, const Hermite1D& hv, int corner, int mode) {
    const int iu = (corner & 1) ? 2 : 0;   // right/left in xi1
    const int iv = (corner & 2) ? 2 : 0;   // top/bottom in xi2
    const int mu = iu + ((mode == 1 || mode == 3) ? 1 : 0);
    const int mv = iv + ((mode == 2 || mode == 3) ? 1 : 0);
    ScalarJet s;
    s.v = hu.v[mu] * hv.v[mv];
    s.d1 = hu.d[mu] * hv.v[mv];
    s.d2 = hu.v[mu] * hv.d[mv];
    s.d11 = hu.dd[mu] * hv.v[mv];
    s.d12 = hu.d[mu] * hv.d[mv];
    s.d22 = hu.v[mu] * hv.dd[mv];
    return s;
}

inline Real bilinear(Real u, Real v, int corner) {
    const Real fu = (corner & 1) ? u : 1 - u;
    const Real fv = (corner & 2) ? v : 1 - v;
    return fu * fv;
}

inline Vec2 bilinear_grad(Real u, Real v, int corner, Real d1, Real d2) {
    const Real fu = (corner & 1) ? u : 1 - u;
    const Real fv = (corner & 2) ? v : 1 - v;
    const Real gu = (corner & 1) ? 1.0 : -1.0;
    const Real gv = (corner & 2) ? 1.0 : -1.0;
    return Vec2(gu * fv / d1, fu * gv / d2);
}

} // namespace

Solver2D::Solver2D(const Chart& chart, int n1, int n2, const MaterialModel& material,
                   Real kappa, const Solver2DOptions& opts)
    : grid_(chart, n1, n2, opts.nq), material_(material), forms_(material), kappa_(kappa),
      opts_(opts) {
    if (kappa < 0) throw ConfigError("kappa must be nonnegative");
    build();
}

void Solver2D::local_vdofs(int ei, int ej, std::array<int, 48>& idx) const {
    int l = 0;
    for (int corner = 0; corner < 4; ++corner) {
        const int i = ei + (corner & 1), j = ej + ((corner & 2) ? 1 : 0);
        const int node = grid_.node_id(i, j);
        for (int c = 0; c < 3; ++c)
            for (int m = 0; m < 4; ++m) idx[l++] = vdof(node, c, m);
    }
}

void Solver2D::local_mdofs(int ei, int ej, std::array<int, 8>& idx) const {
    int l = 0;
    for (int corner = 0; corner < 4; ++corner) {
        const int i = ei + (corner & 1), j = ej + ((corner & 2) ? 1 : 0);
        const int node = grid_.node_id(i, j);
        idx[l++] = 2 * node;
        idx[l++] = 2 * node + 1;
    }
}

void Solver2D::build() {
    const int n1 = grid_.n1(), n2 = grid_.n2(), nqc = grid_.qp_per_cell();
    const Real d1 = grid_.dxi1(), d2 = grid_.dxi2();

    // Per-QP kinematic caches of every local basis function.
    qp_basis_.resize(std::size_t(grid_.num_cells()) * nqc);
    parallel_for(opts_.exec, std::size_t(grid_.num_cells()), [&](std::size_t cell) {
        const int ei = int(cell) % n1, ej = int(cell) / n1;
        for (int q = 0; q < nqc; ++q) {
            const ChartFrame& f = grid_.qp_frame(grid_.qp_index(int(cell), q));
            const Vec2 loc = grid_.qp_local(q);
            const Hermite1D hu = hermite(loc[0], d1), hv = hermite(loc[1], d2);
            QPBasis& qb = qp_basis_[cell * nqc + q];
            int l = 0;
            for (int corner = 0; corner < 4; ++corner)
                for (int c = 0; c < 3; ++c)
                    for (int m = 0; m < 4; ++m, ++l) {
                        const ScalarJet s = hermite_mode(hu, hv, corner, m);
                        VectorJet2 jet;
                        const Vec3 e = Vec3::Unit(c);
                        jet.v = s.v * e;
                        jet.d1 = s.d1 * e;
                        jet.d2 = s.d2 * e;
                        jet.d11 = s.d11 * e;
                        jet.d12 = s.d12 * e;
                        jet.d22 = s.d22 * e;
                        const BendData bd = bend_data(f, jet);
                        qb.val[l] = jet.v;
                        qb.A[l] = bd.A;
                        qb.bend[l] = bd.bend;
                        qb.symtan[l] = bd.symtan;
                    }
            l = 0;
            for (int corner = 0; corner < 4; ++corner)
                for (int c = 0; c < 2; ++c, ++l) {
                    const Real nv = bilinear(loc[0], loc[1], corner);
                    const Vec2 ng = bilinear_grad(loc[0], loc[1], corner, d1, d2);
                    // u = n(xi) that_c(xi): chart derivative hits both factors.
                    const Vec3 tc = f.that(c);
                    const Vec3 du1 = ng[0] * tc + nv * f.that_deriv(c, 0);
                    const Vec3 du2 = ng[1] * tc + nv * f.that_deriv(c, 1);
                    qb.mval[l] = nv * tc;
                    qb.mstrain[l] = sym_tangential_gradient(f, du1, du2);
                }
        }
    });

    // Free V-DOFs: interior nodes only (clamped plate conditions V = 0,
    // grad V = 0 pin every Hermite DOF of a boundary node).
    v_full2free_.assign(n_vdofs(), -1);
    v_free2full_.clear();
    for (int j = 0; j <= n2; ++j)
        for (int i = 0; i <= n1; ++i) {
            if (is_boundary_node(i, j)) continue;
            const int node = grid_.node_id(i, j);
            for (int c = 0; c < 3; ++c)
                for (int m = 0; m < 4; ++m) {
                    v_full2free_[vdof(node, c, m)] = int(v_free2full_.size());
                    v_free2full_.push_back(vdof(node, c, m));
                }
        }
    nv_free_ = int(v_free2full_.size());

    // Assemble the constant operators.
    std::vector<Triplet> tm, tk, tp, tkm, tmu;
    std::array<int, 48> vidx;
    std::array<int, 8> midx;
    for (int ej = 0; ej < n2; ++ej)
        for (int ei = 0; ei < n1; ++ei) {
            const int cell = grid_.cell_id(ei, ej);
            local_vdofs(ei, ej, vidx);
            local_mdofs(ei, ej, midx);
            MatX me = MatX::Zero(48, 48), ke = me, pe = me;
            MatX kme = MatX::Zero(8, 8), mue = kme;
            for (int q = 0; q < nqc; ++q) {
                const ChartFrame& f = grid_.qp_frame(grid_.qp_index(cell, q));
                const Real w = grid_.qp_weight(q) * f.area_element;
                const QPBasis& qb = qp_basis_[std::size_t(cell) * nqc + q];
                std::array<Mat2, 48> l2bend;
                for (int a = 0; a < 48; ++a) l2bend[a] = forms_.l2_apply(f.x, qb.bend[a]);
                for (int a = 0; a < 48; ++a)
                    for (int b = a; b < 48; ++b) {
                        const Real mv = w * qb.val[a].dot(qb.val[b]);
                        const Real kv = w / 12.0 * ddot2(l2bend[a], qb.bend[b]);
                        const Real pv = w * ddot2(qb.symtan[a], qb.symtan[b]);
                        me(a, b) += mv;
                        ke(a, b) += kv;
                        pe(a, b) += pv;
                        if (b > a) {
                            me(b, a) += mv;
                            ke(b, a) += kv;
                            pe(b, a) += pv;
                        }
                    }
                for (int a = 0; a < 8; ++a) {
                    const Mat2 l2s = forms_.l2_apply(f.x, qb.mstrain[a]);
                    for (int b = a; b < 8; ++b) {
                        const Real kv = w * ddot2(l2s, qb.mstrain[b]);
                        const Real mv = w * qb.mval[a].dot(qb.mval[b]);
                        kme(a, b) += kv;
                        mue(a, b) += mv;
                        if (b > a) {
                            kme(b, a) += kv;
                            mue(b, a) += mv;
                        }
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
                for (int b = 0; b < 8; ++b) {
                    tkm.emplace_back(midx[a], midx[b], kme(a, b));
                    tmu.emplace_back(midx[a], midx[b], mue(a, b));
                }
        }

    auto build_sp = [](int n, std::vector<Triplet>& t) {
        SpMat s(n, n);
        s.setFromTriplets(t.begin(), t.end());
        return s;
    };
    M_full_ = build_sp(n_vdofs(), tm);
    K_full_ = build_sp(n_vdofs(), tk);
    P_full_ = build_sp(n_vdofs(), tp);
    Km_ = build_sp(n_mdofs(), tkm);
    Mu_ = build_sp(n_mdofs(), tmu);

    auto restrict_free = [&](const SpMat& full) {
        std::vector<Triplet> t;
        for (int k = 0; k < full.outerSize(); ++k)
            for (SpMat::InnerIterator it(full, k); it; ++it) {
                const int i = v_full2free_[it.row()], j = v_full2free_[it.col()];
                if (i >= 0 && j >= 0) t.emplace_back(i, j, it.value());
            }
        SpMat s(nv_free_, nv_free_);
        s.setFromTriplets(t.begin(), t.end());
        return s;
    };
    M_free_ = restrict_free(M_full_);
    K_free_ = restrict_free(K_full_);
    P_free_ = restrict_free(P_full_);

    // Membrane solver: Km is singular on the tangential Killing fields; the
    // projection is solved with a mass-shifted factorization plus iterative
    // refinement, which leaves the strain B and the stationarity residual
    // unbiased (the right-hand sides are consistent).
    Real diag_scale = 0;
    for (int i = 0; i < Km_.rows(); ++i) diag_scale += Km_.coeff(i, i);
    diag_scale /= Km_.rows();
    mem_delta_ = 1e-10 * std::max(diag_scale, Real(1e-30));
    SpMat shifted = Km_ + SpMat(mem_delta_ * Mu_);
    mem_lu_.compute(shifted);
    if (mem_lu_.info() != Eigen::Success)
        throw SolverError("membrane projection system could not be factorized");

    // L2 norms of the membrane basis strains, for the normalized residual.
    mbasis_norm_.assign(n_mdofs(), 0.0);
    for (int ej = 0; ej < n2; ++ej)
        for (int ei = 0; ei < n1; ++ei) {
            const int cell = grid_.cell_id(ei, ej);
            local_mdofs(ei, ej, midx);
            for (int q = 0; q < nqc; ++q) {
                const ChartFrame& f = grid_.qp_frame(grid_.qp_index(cell, q));
                const Real w = grid_.qp_weight(q) * f.area_element;
                const QPBasis& qb = qp_basis_[std::size_t(cell) * nqc + q];
                for (int a = 0; a < 8; ++a)
                    mbasis_norm_[midx[a]] += w * ddot2(qb.mstrain[a], qb.mstrain[a]);
            }
        }
    for (Real& v : mbasis_norm_) v = std::sqrt(v);
}

State2D Solver2D::zero_state() const {
    State2D s;
    s.V = VecX::Zero(n_vdofs());
    s.Vt = VecX::Zero(n_vdofs());
    s.um = VecX::Zero(n_mdofs());
    s.kappa = kappa_;
    return s;
}

VecX Solver2D::interpolate(const ProfileSpec& p) const {
    VecX dofs = VecX::Zero(n_vdofs());
    for (int j = 0; j <= grid_.n2(); ++j)
        for (int i = 0; i <= grid_.n1(); ++i) {
            const ProfileJet jet = profile_jet(chart(), p, grid_.node_xi(i, j));
            const int node = grid_.node_id(i, j);
            for (int c = 0; c < 3; ++c) {
                dofs[vdof(node, c, 0)] = jet.value[c];
                dofs[vdof(node, c, 1)] = jet.d1[c];
                dofs[vdof(node, c, 2)] = jet.d2[c];
                dofs[vdof(node, c, 3)] = jet.d12[c];
            }
        }
    return dofs;
}

State2D Solver2D::init_limit(const ProfileSpec& w_bar, const ProfileSpec& w_hat) const {
    State2D s = zero_state();
    s.V = interpolate(w_bar);
    s.Vt = interpolate(w_hat);
    for (int j = 0; j <= grid_.n2(); ++j)
        for (int i = 0; i <= grid_.n1(); ++i)
            if (is_boundary_node(i, j)) {
                const int node = grid_.node_id(i, j);
                for (int c = 0; c < 3; ++c)
                    for (int m = 0; m < 4; ++m)
                        if (std::abs(s.V[vdof(node, c, m)]) > 1e-12 ||
                            std::abs(s.Vt[vdof(node, c, m)]) > 1e-12)
                            throw InputError("limit initial data violates the clamped boundary");
            }
    if (kappa_ > 0) s.um = project_membrane(s.V);
    return s;
}

State2D Solver2D::init_limit_projected(const ProfileSpec& raw, const ProfileSpec& w_hat,
                                       Real eps_proj) const {
    if (eps_proj <= 0) throw InputError("penalized projection needs eps_proj > 0");
    const VecX raw_dofs = interpolate(raw);
    VecX rhs_free(nv_free_);
    const VecX mr = M_full_ * raw_dofs;
    for (int i = 0; i < nv_free_; ++i) rhs_free[i] = mr[v_free2full_[i]];
    SpMat A = M_free_ + SpMat((1.0 / eps_proj) * P_free_);
    Eigen::SparseLU<SpMat> lu(A);
    if (lu.info() != Eigen::Success) throw SolverError("isometry projection factorization failed");
    const VecX vf = lu.solve(rhs_free);

    State2D s = zero_state();
    for (int i = 0; i < nv_free_; ++i) s.V[v_free2full_[i]] = vf[i];
    s.Vt = interpolate(w_hat);
    if (kappa_ > 0) s.um = project_membrane(s.V);
    return s;
}

VectorJet2 Solver2D::jet_at(const VecX& vdofs, int ei, int ej, Real u, Real v) const {
    const Hermite1D hu = hermite(u, grid_.dxi1()), hv = hermite(v, grid_.dxi2());
    VectorJet2 out;
    for (int corner = 0; corner < 4; ++corner) {
        const int i = ei + (corner & 1), j = ej + ((corner & 2) ? 1 : 0);
        const int node = grid_.node_id(i, j);
        for (int c = 0; c < 3; ++c)
            for (int m = 0; m < 4; ++m) {
                const Real d = vdofs[vdof(node, c, m)];
                if (d == 0) continue;
                const ScalarJet s = hermite_mode(hu, hv, corner, m);
                out.v[c] += d * s.v;
                out.d1[c] += d * s.d1;
                out.d2[c] += d * s.d2;
                out.d11[c] += d * s.d11;
                out.d12[c] += d * s.d12;
                out.d22[c] += d * s.d22;
            }
    }
    return out;
}

VectorJet2 Solver2D::eval_jet(const VecX& vdofs, const Vec2& xi) const {
    const Vec2 lo = chart().param_lo();
    Real u = (xi[0] - lo[0]) / grid_.dxi1();
    Real v = (xi[1] - lo[1]) / grid_.dxi2();
    int ei = std::clamp(int(std::floor(u)), 0, grid_.n1() - 1);
    int ej = std::clamp(int(std::floor(v)), 0, grid_.n2() - 1);
    return jet_at(vdofs, ei, ej, u - ei, v - ej);
}

Mat2 Solver2D::eval_B(const VecX& um, const Vec2& xi) const {
    const Vec2 lo = chart().param_lo();
    Real u = (xi[0] - lo[0]) / grid_.dxi1();
    Real v = (xi[1] - lo[1]) / grid_.dxi2();
    int ei = std::clamp(int(std::floor(u)), 0, grid_.n1() - 1);
    int ej = std::clamp(int(std::floor(v)), 0, grid_.n2() - 1);
    const Real uu = u - ei, vv = v - ej;
    const ChartFrame f = chart().frame(xi);
    Vec3 du1 = Vec3::Zero(), du2 = Vec3::Zero();
    for (int corner = 0; corner < 4; ++corner) {
        const int i = ei + (corner & 1), j = ej + ((corner & 2) ? 1 : 0);
        const int node = grid_.node_id(i, j);
        const Real nv = bilinear(uu, vv, corner);
        const Vec2 ng = bilinear_grad(uu, vv, corner, grid_.dxi1(), grid_.dxi2());
        for (int c = 0; c < 2; ++c) {
            const Real d = um[2 * node + c];
            if (d == 0) continue;
            du1 += d * (ng[0] * f.that(c) + nv * f.that_deriv(c, 0));
            du2 += d * (ng[1] * f.that(c) + nv * f.that_deriv(c, 1));
        }
    }
    return sym_tangential_gradient(f, du1, du2);
}

Vec3 Solver2D::eval_um_value(const VecX& um, const Vec2& xi) const {
    const Vec2 lo = chart().param_lo();
    Real u = (xi[0] - lo[0]) / grid_.dxi1();
    Real v = (xi[1] - lo[1]) / grid_.dxi2();
    int ei = std::clamp(int(std::floor(u)), 0, grid_.n1() - 1);
    int ej = std::clamp(int(std::floor(v)), 0, grid_.n2() - 1);
    const Real uu = u - ei, vv = v - ej;
    const ChartFrame f = chart().frame(xi);
    Vec3 out = Vec3::Zero();
    for (int corner = 0; corner < 4; ++corner) {
        const int i = ei + (corner & 1), j = ej + ((corner & 2) ? 1 : 0);
        const int node = grid_.node_id(i, j);
        for (int c = 0; c < 2; ++c)
            out += um[2 * node + c] * bilinear(uu, vv, corner) * f.that(c);
    }
    return out;
}

Real Solver2D::bending_form(const VecX& va, const VecX& vb) const {
    return va.dot(K_full_ * vb);
}

VecX Solver2D::membrane_rhs(const VecX& vdofs) const {
    const int nqc = grid_.qp_per_cell();
    const Real sk2 = 0.5 * std::sqrt(kappa_);
    std::vector<VecX> cell_rhs(grid_.num_cells());
    parallel_for(opts_.exec, std::size_t(grid_.num_cells()), [&](std::size_t cell) {
        const int ei = int(cell) % grid_.n1(), ej = int(cell) / grid_.n1();
        VecX re = VecX::Zero(8);
        for (int q = 0; q < nqc; ++q) {
            const ChartFrame& f = grid_.qp_frame(grid_.qp_index(int(cell), q));
            const Real w = grid_.qp_weight(q) * f.area_element;
            const Vec2 loc = grid_.qp_local(q);
            const VectorJet2 jet = jet_at(vdofs, ei, ej, loc[0], loc[1]);
            const BendData bd = bend_data(f, jet);
            const Mat2 target = forms_.l2_apply(f.x, sk2 * bd.A2_tan);
            const QPBasis& qb = qp_basis_[cell * nqc + q];
            for (int a = 0; a < 8; ++a) re[a] += w * ddot2(target, qb.mstrain[a]);
        }
        cell_rhs[cell] = re;
    });
    VecX rhs = VecX::Zero(n_mdofs());
    std::array<int, 8> midx;
    for (int cell = 0; cell < grid_.num_cells(); ++cell) {
        local_mdofs(cell % grid_.n1(), cell / grid_.n1(), midx);
        for (int a = 0; a < 8; ++a) rhs[midx[a]] += cell_rhs[cell][a];
    }
    return rhs;
}

VecX Solver2D::solve_membrane(const VecX& rhs) const {
    VecX u = VecX::Zero(n_mdofs());
    VecX r = rhs;
    const Real rhs_scale = std::max(rhs.norm(), Real(1e-300));
    for (int it = 0; it < 8; ++it) {
        u += mem_lu_.solve(r);
        r = rhs - Km_ * u;
        if (r.norm() <= 1e-13 * rhs_scale) return u;
    }
    if (r.norm() > 1e-10 * rhs_scale)
        throw SolverError("membrane projection refinement stalled: singular system");
    return u;
}

VecX Solver2D::project_membrane(const VecX& vdofs) const {
    if (kappa_ == 0) return VecX::Zero(n_mdofs());
    return solve_membrane(membrane_rhs(vdofs));
}

Real Solver2D::residual_B(const VecX& um, const VecX& vdofs) const {
    const VecX r = Km_ * um - membrane_rhs(vdofs);
    Real worst = 0;
    for (int i = 0; i < n_mdofs(); ++i)
        if (mbasis_norm_[i] > 1e-14) worst = std::max(worst, std::abs(r[i]) / mbasis_norm_[i]);
    return worst;
}

Real Solver2D::constraint_residual(const VecX& vdofs) const {
    return std::sqrt(std::max(Real(0), vdofs.dot(P_full_ * vdofs)));
}

VecX Solver2D::coupling_force(const VecX& vdofs, const VecX& um) const {
    const int nqc = grid_.qp_per_cell();
    const Real sk2 = 0.5 * std::sqrt(kappa_);
    std::vector<VecX> cell_f(grid_.num_cells());
    parallel_for(opts_.exec, std::size_t(grid_.num_cells()), [&](std::size_t cell) {
        const int ei = int(cell) % grid_.n1(), ej = int(cell) / grid_.n1();
        VecX fe = VecX::Zero(48);
        std::array<int, 8> midx;
        local_mdofs(ei, ej, midx);
        for (int q = 0; q < nqc; ++q) {
            const ChartFrame& f = grid_.qp_frame(grid_.qp_index(int(cell), q));
            const Real w = grid_.qp_weight(q) * f.area_element;
            const Vec2 loc = grid_.qp_local(q);
            const VectorJet2 jet = jet_at(vdofs, ei, ej, loc[0], loc[1]);
            const BendData bd = bend_data(f, jet);
            const QPBasis& qb = qp_basis_[cell * nqc + q];
            Mat2 B = Mat2::Zero();
            for (int a = 0; a < 8; ++a) B += um[midx[a]] * qb.mstrain[a];
            const Mat2 sigma = forms_.l2_apply(f.x, B - sk2 * bd.A2_tan);
            for (int l = 0; l < 48; ++l) {
                // (A Atilde)_tan : sigma
                Mat2 aat;
                for (int aa = 0; aa < 2; ++aa)
                    for (int bb = 0; bb < 2; ++bb)
                        aat(aa, bb) = f.that(aa).dot(bd.A * (qb.A[l] * f.that(bb)));
                fe[l] += w * ddot2(sigma, aat);
            }
        }
        cell_f[cell] = fe;
    });
    VecX out = VecX::Zero(n_vdofs());
    std::array<int, 48> vidx;
    for (int cell = 0; cell < grid_.num_cells(); ++cell) {
        local_vdofs(cell % grid_.n1(), cell / grid_.n1(), vidx);
        for (int l = 0; l < 48; ++l) out[vidx[l]] += cell_f[cell][l];
    }
    return out;
}

VecX Solver2D::load_vector(const Forcing& f, Real t) const {
    VecX out = VecX::Zero(n_vdofs());
    if (f.is_zero()) return out;
    const Real tf = f.time_factor(t);
    const int nqc = grid_.qp_per_cell();
    std::array<int, 48> vidx;
    for (int cell = 0; cell < grid_.num_cells(); ++cell) {
        const int ei = cell % grid_.n1(), ej = cell / grid_.n1();
        local_vdofs(ei, ej, vidx);
        for (int q = 0; q < nqc; ++q) {
            const ChartFrame& fr = grid_.qp_frame(grid_.qp_index(cell, q));
            const Real w = grid_.qp_weight(q) * fr.area_element;
            const Vec3 fv = tf * f.space_value(chart(), fr.xi);
            const QPBasis& qb = qp_basis_[std::size_t(cell) * nqc + q];
            for (int l = 0; l < 48; ++l) out[vidx[l]] += w * fv.dot(qb.val[l]);
        }
    }
    return out;
}

VecX Solver2D::assemble_load(const std::function<Vec3(const Vec2&)>& field) const {
    VecX out = VecX::Zero(n_vdofs());
    const int nqc = grid_.qp_per_cell();
    std::array<int, 48> vidx;
    for (int cell = 0; cell < grid_.num_cells(); ++cell) {
        local_vdofs(cell % grid_.n1(), cell / grid_.n1(), vidx);
        for (int q = 0; q < nqc; ++q) {
            const ChartFrame& fr = grid_.qp_frame(grid_.qp_index(cell, q));
            const Real w = grid_.qp_weight(q) * fr.area_element;
            const Vec3 fv = field(fr.xi);
            const QPBasis& qb = qp_basis_[std::size_t(cell) * nqc + q];
            for (int l = 0; l < 48; ++l) out[vidx[l]] += w * fv.dot(qb.val[l]);
        }
    }
    return out;
}

Energy2D Solver2D::energy(const State2D& s) const {
    Energy2D e;
    e.kinetic = 0.5 * s.Vt.dot(M_full_ * s.Vt);
    e.bending = 0.5 * s.V.dot(K_full_ * s.V);
    e.penalty = 0.5 / opts_.eps_iso * s.V.dot(P_full_ * s.V);
    if (kappa_ > 0) {
        const int nqc = grid_.qp_per_cell();
        const Real sk2 = 0.5 * std::sqrt(kappa_);
        std::vector<Real> cell_e(grid_.num_cells(), 0.0);
        parallel_for(opts_.exec, std::size_t(grid_.num_cells()), [&](std::size_t cell) {
            const int ei = int(cell) % grid_.n1(), ej = int(cell) / grid_.n1();
            std::array<int, 8> midx;
            local_mdofs(ei, ej, midx);
            for (int q = 0; q < nqc; ++q) {
                const ChartFrame& f = grid_.qp_frame(grid_.qp_index(int(cell), q));
                const Real w = grid_.qp_weight(q) * f.area_element;
                const Vec2 loc = grid_.qp_local(q);
                const VectorJet2 jet = jet_at(s.V, ei, ej, loc[0], loc[1]);
                const BendData bd = bend_data(f, jet);
                const QPBasis& qb = qp_basis_[cell * nqc + q];
                Mat2 B = Mat2::Zero();
                for (int a = 0; a < 8; ++a) B += s.um[midx[a]] * qb.mstrain[a];
                cell_e[cell] += w * 0.5 * forms_.q2(f.x, B - sk2 * bd.A2_tan);
            }
        });
        e.membrane = ordered_sum(cell_e);
    }
    return e;
}

State2D Solver2D::step_vk(const State2D& s, Real dt, const Forcing& f,
                          StepReport2D* report) const {
    return step_vk(
        s, dt, [&](Real t) { return load_vector(f, t); }, report);
}

State2D Solver2D::step_vk(const State2D& s, Real dt, const std::function<VecX(Real)>& load_at,
                          StepReport2D* report) const {
    if (dt <= 0) throw ConfigError("step needs dt > 0");
    const Real sk = std::sqrt(kappa_);

    // Linear part of the midpoint tangent; constant, factored once per dt.
    if (cached_dt_ != dt) {
        SpMat A = SpMat((2.0 / (dt * dt)) * M_free_) +
                  SpMat(0.5 * K_free_ + (0.5 / opts_.eps_iso) * P_free_);
        step_lu_.compute(A);
        if (step_lu_.info() != Eigen::Success)
            throw SolverError("midpoint tangent factorization failed");
        cached_dt_ = dt;
    }

    VecX vn_free(nv_free_), vtn_free(nv_free_);
    for (int i = 0; i < nv_free_; ++i) {
        vn_free[i] = s.V[v_free2full_[i]];
        vtn_free[i] = s.Vt[v_free2full_[i]];
    }
    const VecX mvt = M_free_ * vtn_free;
    const Real t_mid = s.t + dt / 2;
    const VecX load_full = load_at(t_mid);

    VecX vnew = s.V; // full DOF vector; boundary rows stay zero
    VecX um_mid = s.um;

    auto residual = [&](const VecX& vnew_full, VecX& um_mid_out) {
        const VecX vmid = 0.5 * (s.V + vnew_full);
        VecX g_full = K_full_ * vmid + (1.0 / opts_.eps_iso) * (P_full_ * vmid) - load_full;
        if (kappa_ > 0) {
            um_mid_out = project_membrane(vmid);
            g_full -= sk * coupling_force(vmid, um_mid_out);
        }
        VecX G(nv_free_);
        for (int i = 0; i < nv_free_; ++i) G[i] = g_full[v_free2full_[i]];
        VecX dv(nv_free_);
        for (int i = 0; i < nv_free_; ++i) dv[i] = vnew_full[v_free2full_[i]] - vn_free[i];
        G += (2.0 / (dt * dt)) * (M_free_ * dv) - (2.0 / dt) * mvt;
        return G;
    };

    VecX G = residual(vnew, um_mid);
    const Real g0 = G.norm();
    int it = 0;
    Real g_prev = std::numeric_limits<Real>::infinity();
    while (G.norm() > std::max(opts_.newton_tol_abs, opts_.newton_tol_rel * g0)) {
        // Accept stagnation at the attainable floor once the residual has
        // dropped far below its initial value.
        if (G.norm() >= 0.25 * g_prev && G.norm() <= 1e-9 * std::max(g0, Real(1.0))) break;
        if (++it > opts_.newton_max_iter) {
            std::ostringstream os;
            os << "limit-system Newton stalled, |G| = " << G.norm() << " at t = " << s.t;
            throw SolverError(os.str());
        }
        const VecX delta = step_lu_.solve(-G);
        for (int i = 0; i < nv_free_; ++i) vnew[v_free2full_[i]] += delta[i];
        g_prev = G.norm();
        G = residual(vnew, um_mid);
    }

    State2D out = s;
    out.V = vnew;
    out.t = s.t + dt;
    for (int i = 0; i < nv_free_; ++i) {
        const int d = v_free2full_[i];
        out.Vt[d] = 2.0 * (vnew[d] - s.V[d]) / dt - s.Vt[d];
    }
    out.um = (kappa_ > 0) ? project_membrane(out.V) : VecX::Zero(n_mdofs());

    StepReport2D rep;
    rep.newton_iters = it;
    rep.residual_B = (kappa_ > 0) ? residual_B(out.um, out.V) : 0.0;
    rep.constraint_residual = constraint_residual(out.V);
    rep.energy = energy(out);
    if (kappa_ > 0 && rep.residual_B > opts_.tol_B)
        throw SolverError("membrane stationarity residual exceeds tol_B after the step");
    if (report) *report = rep;
    return out;
}

} // namespace shellvk
