#include "shellvk/solver3d.hpp"

#include "shellvk/kinematics.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace shellvk {

namespace {
/// Internal control-flow marker for det(grad) <= 0 during assembly; the
/// stepper reacts with dt halving, everything else converts it to a
/// SolverError.
struct DegenerateGradient {};
} // namespace

Solver3D::Solver3D(const ShellMesh& mesh, const MaterialModel& material,
                   const ScalingLaw& scaling, const Solver3DOptions& opts)
    : mesh_(&mesh), material_(material), scaling_(scaling), opts_(opts) {
    if (scaling_.h > mesh.h0())
        throw ConfigError("thickness h exceeds the reference thickness h0");
    build_caches();
}

void Solver3D::build_caches() {
    const ShellMesh& m = *mesh_;
    const Real h = scaling_.h, h0 = m.h0();

    rest_.resize(num_dofs());
    clamped_.assign(m.num_nodes(), false);
    for (int k = 0; k <= m.ns(); ++k)
        for (int j = 0; j <= m.n2(); ++j)
            for (int i = 0; i <= m.n1(); ++i) {
                const int n = m.node_id(i, j, k);
                const ChartFrame& f = m.node_frame(i, j);
                rest_.segment<3>(3 * n) = f.x + (m.node_s(k) * h / h0) * f.m;
                if (opts_.clamp_lateral && m.is_lateral_boundary(i, j)) clamped_[n] = true;
            }

    full2free_.assign(num_dofs(), -1);
    free2full_.clear();
    for (int n = 0; n < m.num_nodes(); ++n)
        if (!clamped_[n])
            for (int c = 0; c < 3; ++c) {
                full2free_[3 * n + c] = int(free2full_.size());
                free2full_.push_back(3 * n + c);
            }
    n_free_ = int(free2full_.size());

    const int nq = m.nq();
    qp_per_element_ = nq * nq * nq;
    qp_.resize(std::size_t(m.num_elements()) * qp_per_element_);

    parallel_for(opts_.exec, std::size_t(m.num_elements()), [&](std::size_t es) {
        const int e = int(es);
        const auto [ei, ej, ek] = m.element_cell(e);
        const auto& nodes = m.element_nodes(e);
        std::array<Vec3, 8> re;
        for (int a = 0; a < 8; ++a) re[a] = rest_.segment<3>(3 * nodes[a]);
        for (int cq = 0; cq < nq * nq; ++cq)
            for (int sq = 0; sq < nq; ++sq) {
                const int q = cq * nq + sq;
                ElemQP& g = qp_[es * qp_per_element_ + q];
                const auto& dN = m.shape_gradients(cq, sq);
                Mat3 J = Mat3::Zero();
                for (int a = 0; a < 8; ++a) J += re[a] * dN[a].transpose();
                g.ginv = J.inverse();
                for (int a = 0; a < 8; ++a) g.b[a] = g.ginv.transpose() * dN[a];

                const ChartFrame& f = m.chart_frame(m.chart_qp_index(ei, ej, cq));
                const Real s = m.s_qp(m.s_qp_index(ek, sq));
                const Shifter sh = shifter(f.Pi, s * h / h0);
                g.weight = m.chart_qp_weight(cq) * m.s_qp_weight(sq) * f.area_element * sh.det;
            }
    });

    // Consistent mass matrix on the free DOFs, det F(s h/h0)-weighted.
    std::vector<Triplet> trips;
    const int nq2 = nq * nq;
    for (int e = 0; e < m.num_elements(); ++e) {
        const auto& nodes = m.element_nodes(e);
        for (int cq = 0; cq < nq2; ++cq)
            for (int sq = 0; sq < nq; ++sq) {
                const ElemQP& g = qp_[std::size_t(e) * qp_per_element_ + cq * nq + sq];
                const auto& N = m.shape_values(cq, sq);
                for (int a = 0; a < 8; ++a)
                    for (int b = 0; b < 8; ++b) {
                        const Real mab = g.weight * N[a] * N[b];
                        for (int c = 0; c < 3; ++c) {
                            const int ia = full2free_[3 * nodes[a] + c];
                            const int ib = full2free_[3 * nodes[b] + c];
                            if (ia >= 0 && ib >= 0) trips.emplace_back(ia, ib, mab);
                        }
                    }
            }
    }
    mass_free_.resize(n_free_, n_free_);
    mass_free_.setFromTriplets(trips.begin(), trips.end());
}

State3D Solver3D::rest_state() const {
    State3D s;
    s.y = rest_;
    s.v = VecX::Zero(num_dofs());
    s.t = 0;
    s.scaling = scaling_;
    return s;
}

State3D Solver3D::init_state(const InitialData3D& data) const {
    const ShellMesh& m = *mesh_;
    const Real h = scaling_.h, h0 = m.h0(), eps = scaling_.eps();
    const Real se = std::sqrt(scaling_.e_h), kh = scaling_.sqrt_kappa_h();
    const Real lam_bar = material_.lambda / (material_.lambda + 2.0 * material_.mu);
    State3D s = rest_state();
    const Real scale =
        std::abs(data.bending.amp) + std::abs(data.velocity.amp) + std::abs(data.membrane.amp) + 1.0;

    for (int j = 0; j <= m.n2(); ++j)
        for (int i = 0; i <= m.n1(); ++i) {
            const ChartFrame& f = m.node_frame(i, j);
            const ProfileJet jet = profile_jet(m.chart(), data.bending, f.xi);
            const Vec3 vel = profile_value(m.chart(), data.velocity, f.xi);
            const Mat3 A = skew_field(f, jet.d1, jet.d2);
            const Vec3 Am = A * f.m;

            Vec3 umem = Vec3::Zero();
            Real c0 = 0, c1 = 0;
            if (!data.membrane.is_zero() || data.with_relaxation) {
                const ProfileJet mjet = profile_jet(m.chart(), data.membrane, f.xi);
                umem = mjet.value;
                if (data.with_relaxation) {
                    const Mat2 Bmem = sym_tangential_gradient(f, mjet.d1, mjet.d2);
                    VectorJet2 vj;
                    vj.v = jet.value;
                    vj.d1 = jet.d1;
                    vj.d2 = jet.d2;
                    vj.d11 = jet.d11;
                    vj.d12 = jet.d12;
                    vj.d22 = jet.d22;
                    const BendData bd = bend_data(f, vj);
                    // includes the normal-normal quadratic of the rotation
                    c0 = -lam_bar * (Bmem - 0.5 * kh * bd.A2_tan).trace() -
                         0.5 * kh * Am.squaredNorm();
                    c1 = -lam_bar * bd.bend.trace();
                }
            }

            if (m.is_lateral_boundary(i, j) &&
                (jet.value.norm() + Am.norm() + vel.norm() + umem.norm() + std::abs(c0) +
                 std::abs(c1)) > 1e-12 * scale)
                throw InputError("initial-data fields do not vanish on the lateral boundary");

            for (int k = 0; k <= m.ns(); ++k) {
                const int n = m.node_id(i, j, k);
                const Real sk = m.node_s(k);
                const Real sigma = sk * h / h0;
                s.y.segment<3>(3 * n) += eps * (jet.value + sigma * Am) + se * umem +
                                         (h * se / h0) *
                                             (c0 * sk + c1 * sk * sk / (2.0 * h0)) * f.m;
                s.v.segment<3>(3 * n) = eps * vel;
            }
        }
    if (data.prepared && (!data.bending.is_zero() || !data.membrane.is_zero()))
        s = equilibrate_thickness_modes(s);
    return s;
}

State3D Solver3D::equilibrate_thickness_modes(const State3D& state) const {
    const ShellMesh& m = *mesh_;
    const int nlay = m.ns() + 1;
    const int nmodes = nlay - 2;
    if (nmodes <= 0) return state;

    // Exact integration weights of the piecewise-linear column: average and
    // first moment functionals.
    VecX wa = VecX::Zero(nlay), wb = VecX::Zero(nlay);
    for (int k = 0; k < m.ns(); ++k) {
        const Real s0 = m.node_s(k), s1 = m.node_s(k + 1), ds = s1 - s0;
        wa[k] += ds / 2;
        wa[k + 1] += ds / 2;
        // int s phi_k over the layer, hat functions on [s0, s1]
        const Real i1 = 0.5 * (s1 * s1 - s0 * s0);
        const Real i2 = (s1 * s1 * s1 - s0 * s0 * s0) / 3.0 - 0.5 * s0 * (s1 * s1 - s0 * s0);
        wb[k] += i1 - i2 / ds;
        wb[k + 1] += i2 / ds;
    }
    MatX C(2, nlay);
    C.row(0) = wa.transpose();
    C.row(1) = wb.transpose();
    // Orthonormal basis of the nullspace of C.
    Eigen::JacobiSVD<MatX> svd(C, Eigen::ComputeFullV);
    const MatX N = svd.matrixV().rightCols(nmodes);

    // Sparse lift Z from column-mode coordinates to free DOFs.
    std::vector<std::array<int, 2>> columns; // interior (i, j)
    for (int j = 1; j < m.n2(); ++j)
        for (int i = 1; i < m.n1(); ++i) columns.push_back({i, j});
    const int nq = int(columns.size()) * 3 * nmodes;
    std::vector<Triplet> zt;
    for (std::size_t ci = 0; ci < columns.size(); ++ci)
        for (int c = 0; c < 3; ++c)
            for (int mo = 0; mo < nmodes; ++mo) {
                const int col = int(ci) * 3 * nmodes + c * nmodes + mo;
                for (int k = 0; k < nlay; ++k) {
                    const int dof = 3 * m.node_id(columns[ci][0], columns[ci][1], k) + c;
                    zt.emplace_back(full2free_[dof], col, N(k, mo));
                }
            }
    SpMat Z(n_free_, nq);
    Z.setFromTriplets(zt.begin(), zt.end());

    State3D out = state;
    VecX q = VecX::Zero(nq);
    Real scale = 0;
    for (int it = 0; it < 30; ++it) {
        VecX r_full;
        try {
            r_full = internal_force(out.y);
        } catch (const DegenerateGradient&) {
            throw SolverError("degenerate gradient while preparing initial data");
        }
        VecX r_free(n_free_);
        for (int i = 0; i < n_free_; ++i) r_free[i] = r_full[free2full_[i]];
        const VecX g = Z.transpose() * r_free;
        if (it == 0) scale = std::max(g.norm(), Real(1e-30));
        if (g.norm() <= std::max(Real(1e-14) * scale, Real(1e-16))) break;
        const SpMat K = tangent_matrix(out.y);
        const SpMat Kr = SpMat(Z.transpose() * K * Z);
        Eigen::SimplicialLDLT<SpMat> ldlt(Kr);
        if (ldlt.info() != Eigen::Success)
            throw SolverError("thickness-mode equilibration factorization failed");
        const VecX dq = ldlt.solve(-g);
        q += dq;
        const VecX dy = Z * dq;
        for (int i = 0; i < n_free_; ++i) out.y[free2full_[i]] += dy[i];
        if (dq.norm() <= 1e-15 * (1.0 + q.norm())) break;
    }
    return out;
}

Mat3 Solver3D::hgradient(const State3D& state, int element, int cq, int sq) const {
    const auto& nodes = mesh_->element_nodes(element);
    const ElemQP& g = qp_[std::size_t(element) * qp_per_element_ + cq * mesh_->nq() + sq];
    Mat3 F = Mat3::Zero();
    for (int a = 0; a < 8; ++a) F += state.y.segment<3>(3 * nodes[a]) * g.b[a].transpose();
    if (F.determinant() <= 0)
        throw GeometryError("rescaled deformation gradient has nonpositive determinant");
    return F;
}

Mat3 Solver3D::hgradient_local(const State3D& state, int element, Real u, Real v,
                               Real w) const {
    const ShellMesh& m = *mesh_;
    const auto& nodes = m.element_nodes(element);
    std::array<Real, 8> val;
    std::array<Vec3, 8> grad;
    ShellMesh::eval_basis(u, v, w, m.dxi1(), m.dxi2(), m.ds(), val, grad);
    Mat3 jy = Mat3::Zero(), jrest = Mat3::Zero();
    for (int a = 0; a < 8; ++a) {
        jy += state.y.segment<3>(3 * nodes[a]) * grad[a].transpose();
        jrest += rest_.segment<3>(3 * nodes[a]) * grad[a].transpose();
    }
    return jy * jrest.inverse();
}

void Solver3D::element_kernel(int e, const VecX& y, bool want_tangent, VecX* r_e,
                              MatX* k_e) const {
    const auto& nodes = mesh_->element_nodes(e);
    std::array<Vec3, 8> ye;
    for (int a = 0; a < 8; ++a) ye[a] = y.segment<3>(3 * nodes[a]);
    if (r_e) r_e->setZero(24);
    if (k_e) k_e->setZero(24, 24);

    for (int q = 0; q < qp_per_element_; ++q) {
        const ElemQP& g = qp_[std::size_t(e) * qp_per_element_ + q];
        Mat3 F = Mat3::Zero();
        for (int a = 0; a < 8; ++a) F += ye[a] * g.b[a].transpose();
        if (F.determinant() <= 0) throw DegenerateGradient{};

        const Mat3 P = material_.stress(F);
        if (r_e)
            for (int a = 0; a < 8; ++a) r_e->segment<3>(3 * a) += g.weight * (P * g.b[a]);

        if (want_tangent) {
            for (int b = 0; b < 8; ++b)
                for (int jj = 0; jj < 3; ++jj) {
                    const Mat3 H = Vec3::Unit(jj) * g.b[b].transpose();
                    const Mat3 dP = material_.stress_tangent(F, H);
                    for (int a = 0; a < 8; ++a) {
                        const Vec3 col = g.weight * (dP * g.b[a]);
                        for (int ii = 0; ii < 3; ++ii) (*k_e)(3 * a + ii, 3 * b + jj) += col[ii];
                    }
                }
        }
    }
}

VecX Solver3D::internal_force(const VecX& y) const {
    const int ne = mesh_->num_elements();
    std::vector<VecX> res(ne);
    std::vector<char> bad(ne, 0);
    for_each_element(
        opts_.exec, std::size_t(ne),
        [&](std::size_t e) {
            try {
                element_kernel(int(e), y, false, &res[e], nullptr);
            } catch (const DegenerateGradient&) {
                bad[e] = 1;
            }
        },
        [&](std::size_t e) {
            if (bad[e]) throw DegenerateGradient{};
        });

    VecX r = VecX::Zero(num_dofs());
    for (int e = 0; e < ne; ++e) {
        const auto& nodes = mesh_->element_nodes(e);
        for (int a = 0; a < 8; ++a) r.segment<3>(3 * nodes[a]) += res[e].segment<3>(3 * a);
    }
    return r;
}

SpMat Solver3D::tangent_matrix(const VecX& y) const {
    const int ne = mesh_->num_elements();
    std::vector<MatX> ke(ne);
    std::vector<char> bad(ne, 0);
    for_each_element(
        opts_.exec, std::size_t(ne),
        [&](std::size_t e) {
            try {
                element_kernel(int(e), y, true, nullptr, &ke[e]);
            } catch (const DegenerateGradient&) {
                bad[e] = 1;
            }
        },
        [&](std::size_t e) {
            if (bad[e]) throw DegenerateGradient{};
        });

    std::vector<Triplet> trips;
    trips.reserve(std::size_t(ne) * 24 * 24);
    for (int e = 0; e < ne; ++e) {
        const auto& nodes = mesh_->element_nodes(e);
        for (int a = 0; a < 8; ++a)
            for (int ii = 0; ii < 3; ++ii) {
                const int ia = full2free_[3 * nodes[a] + ii];
                if (ia < 0) continue;
                for (int b = 0; b < 8; ++b)
                    for (int jj = 0; jj < 3; ++jj) {
                        const int ib = full2free_[3 * nodes[b] + jj];
                        if (ib < 0) continue;
                        trips.emplace_back(ia, ib, ke[e](3 * a + ii, 3 * b + jj));
                    }
            }
    }
    SpMat K(n_free_, n_free_);
    K.setFromTriplets(trips.begin(), trips.end());
    return K;
}

const VecX& Solver3D::set_forcing(const Forcing& forcing) const {
    if (load_forcing_ == &forcing && load0_.size() == n_free_) return load0_;
    load0_ = VecX::Zero(n_free_);
    load_forcing_ = &forcing;
    if (forcing.is_zero()) return load0_;

    const ShellMesh& m = *mesh_;
    const int nq = m.nq(), nq2 = nq * nq;
    const Real factor = scaling_.h * std::sqrt(scaling_.e_h);
    VecX full = VecX::Zero(num_dofs());
    for (int e = 0; e < m.num_elements(); ++e) {
        const auto [ei, ej, ek] = m.element_cell(e);
        const auto& nodes = m.element_nodes(e);
        for (int cq = 0; cq < nq2; ++cq) {
            const ChartFrame& f = m.chart_frame(m.chart_qp_index(ei, ej, cq));
            const Vec3 gval = forcing.space_value(m.chart(), f.xi);
            for (int sq = 0; sq < nq; ++sq) {
                const ElemQP& g = qp_[std::size_t(e) * qp_per_element_ + cq * nq + sq];
                const auto& N = m.shape_values(cq, sq);
                for (int a = 0; a < 8; ++a)
                    full.segment<3>(3 * nodes[a]) += factor * g.weight * N[a] * gval;
            }
        }
    }
    for (int i = 0; i < n_free_; ++i) load0_[i] = full[free2full_[i]];
    return load0_;
}

void Solver3D::validate(const State3D& state) const {
    if (state.y.size() != num_dofs() || state.v.size() != num_dofs())
        throw StateError("state size does not match mesh");
    if (!opts_.clamp_lateral) return;
    for (int n = 0; n < mesh_->num_nodes(); ++n)
        if (clamped_[n]) {
            if ((state.y.segment<3>(3 * n) - rest_.segment<3>(3 * n)).norm() > 1e-9 ||
                state.v.segment<3>(3 * n).norm() > 1e-9)
                throw StateError("clamped lateral boundary condition violated");
        }
}

VecX Solver3D::assemble_residual(const State3D& state, const Forcing& forcing) const {
    validate(state);
    VecX r;
    try {
        r = internal_force(state.y);
    } catch (const DegenerateGradient&) {
        throw SolverError("degenerate deformation gradient in residual assembly");
    }
    if (!forcing.is_zero()) {
        const VecX& l0 = set_forcing(forcing);
        const Real tf = forcing.time_factor(state.t);
        for (int i = 0; i < n_free_; ++i) r[free2full_[i]] -= tf * l0[i];
    }
    for (int d = 0; d < num_dofs(); ++d)
        if (full2free_[d] < 0) r[d] = 0;
    return r;
}

Energy3D Solver3D::energy(const State3D& state) const {
    const ShellMesh& m = *mesh_;
    const int ne = m.num_elements(), nq = m.nq();
    std::vector<Real> kin(ne, 0.0), ela(ne, 0.0);
    parallel_for(opts_.exec, std::size_t(ne), [&](std::size_t e) {
        const auto& nodes = m.element_nodes(int(e));
        std::array<Vec3, 8> ye, ve;
        for (int a = 0; a < 8; ++a) {
            ye[a] = state.y.segment<3>(3 * nodes[a]);
            ve[a] = state.v.segment<3>(3 * nodes[a]);
        }
        for (int cq = 0; cq < nq * nq; ++cq)
            for (int sq = 0; sq < nq; ++sq) {
                const ElemQP& g = qp_[e * qp_per_element_ + cq * nq + sq];
                const auto& N = m.shape_values(cq, sq);
                Mat3 F = Mat3::Zero();
                Vec3 vq = Vec3::Zero();
                for (int a = 0; a < 8; ++a) {
                    F += ye[a] * g.b[a].transpose();
                    vq += N[a] * ve[a];
                }
                ela[e] += g.weight * material_.energy_density(F);
                kin[e] += g.weight * 0.5 * scaling_.h * scaling_.h * vq.squaredNorm();
            }
    });
    Energy3D out;
    out.kinetic = ordered_sum(kin);
    out.elastic = ordered_sum(ela);
    return out;
}

Real Solver3D::energy_ratio(const State3D& state) const {
    return energy(state).elastic / scaling_.e_h;
}

void Solver3D::do_step(const State3D& state, Real dt, const Forcing& forcing, State3D& out,
                       StepReport3D& rep) const {
    const Real h2 = scaling_.h * scaling_.h;
    const Real t_mid = state.t + dt / 2;
    const Real tf = forcing.is_zero() ? 0.0 : forcing.time_factor(t_mid);
    const VecX* l0 = forcing.is_zero() ? nullptr : &set_forcing(forcing);

    VecX yn_free(n_free_), vn_free(n_free_);
    for (int i = 0; i < n_free_; ++i) {
        yn_free[i] = state.y[free2full_[i]];
        vn_free[i] = state.v[free2full_[i]];
    }

    VecX ynew = state.y; // full; clamped entries stay at rest
    const VecX mv = mass_free_ * vn_free;

    auto residual_free = [&](const VecX& ynew_full) {
        VecX ymid = 0.5 * (state.y + ynew_full);
        VecX r_full = internal_force(ymid);
        VecX G(n_free_);
        for (int i = 0; i < n_free_; ++i) G[i] = r_full[free2full_[i]];
        if (l0) G -= tf * (*l0);
        VecX dy(n_free_);
        for (int i = 0; i < n_free_; ++i) dy[i] = ynew_full[free2full_[i]] - yn_free[i];
        G += (2 * h2 / (dt * dt)) * (mass_free_ * dy) - (2 * h2 / dt) * mv;
        return G;
    };

    VecX G = residual_free(ynew);
    const Real g0 = G.norm();
    int it = 0;
    Eigen::SparseLU<SpMat> lu;
    Real g_prev = std::numeric_limits<Real>::infinity();
    while (G.norm() > std::max(opts_.newton_tol_abs, opts_.newton_tol_rel * g0)) {
        // Stagnation at the attainable floor counts as converged when the
        // residual has already dropped far below its initial value.
        if (G.norm() >= 0.25 * g_prev && G.norm() <= 1e-10 * std::max(g0, Real(1.0))) break;
        if (++it > opts_.newton_max_iter) {
            std::ostringstream os;
            os << "Newton stalled after " << opts_.newton_max_iter
               << " iterations, |G| = " << G.norm() << " (t = " << state.t << ", dt = " << dt
               << ")";
            throw SolverError(os.str());
        }
        VecX ymid = 0.5 * (state.y + ynew);
        SpMat K = tangent_matrix(ymid);
        SpMat A = (2 * h2 / (dt * dt)) * mass_free_ + SpMat(0.5 * K);
        lu.compute(A);
        if (lu.info() != Eigen::Success) throw SolverError("Newton tangent factorization failed");
        const VecX delta = lu.solve(-G);
        for (int i = 0; i < n_free_; ++i) ynew[free2full_[i]] += delta[i];
        g_prev = G.norm();
        G = residual_free(ynew);
    }
    rep.newton_iters += it;

    out = state;
    out.y = ynew;
    out.t = state.t + dt;
    for (int i = 0; i < n_free_; ++i) {
        const int d = free2full_[i];
        out.v[d] = 2.0 * (ynew[d] - state.y[d]) / dt - state.v[d];
    }
    for (int d = 0; d < num_dofs(); ++d)
        if (full2free_[d] < 0) out.v[d] = 0;

    if (l0) {
        VecX vmid(n_free_);
        for (int i = 0; i < n_free_; ++i)
            vmid[i] = 0.5 * (state.v[free2full_[i]] + out.v[free2full_[i]]);
        rep.work += dt * tf * l0->dot(vmid);
    }
}

State3D Solver3D::step(const State3D& state, Real dt, const Forcing& forcing,
                       StepReport3D* report) const {
    if (dt <= 0) throw ConfigError("step needs dt > 0");
    validate(state);
    StepReport3D rep;
    const Energy3D e0 = energy(state);
    rep.energy_before = e0.total();

    for (int halvings = 0; halvings <= 5; ++halvings) {
        const int nsub = 1 << halvings;
        const Real sub_dt = dt / nsub;
        try {
            State3D cur = state;
            StepReport3D sub = rep;
            sub.halvings = halvings;
            for (int k = 0; k < nsub; ++k) {
                State3D next;
                do_step(cur, sub_dt, forcing, next, sub);
                cur = next;
            }
            const Energy3D e1 = energy(cur);
            sub.energy_after = e1.total();
            sub.slack = sub.energy_after - sub.energy_before - sub.work;
            if (opts_.tol_energy >= 0 && sub.slack > opts_.tol_energy) cur.energy_flagged = true;
            cur.energy_flagged = cur.energy_flagged || state.energy_flagged;
            if (report) *report = sub;
            return cur;
        } catch (const DegenerateGradient&) {
            continue; // reject and halve
        }
    }
    throw SolverError("step rejected: degenerate gradient persists after 5 dt halvings");
}

} // namespace shellvk
