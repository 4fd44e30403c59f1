#include "shellvk/reduction.hpp"

#include "shellvk/kinematics.hpp"

#include <algorithm>
#include <cmath>

namespace shellvk {

Reduction::Reduction(const Solver3D& solver) : solver_(&solver), mesh_(&solver.mesh()) {}

namespace {

// Exact through-thickness integrals of the piecewise-linear nodal column:
// avg = (1/h0) int y ds, mom = (1/h0) int s y ds.
void column_integrals(const ShellMesh& m, const VecX& field, int i, int j, Vec3& avg,
                      Vec3& mom) {
    avg = Vec3::Zero();
    mom = Vec3::Zero();
    const Real h0 = m.h0();
    for (int k = 0; k < m.ns(); ++k) {
        const Real s0 = m.node_s(k), s1 = m.node_s(k + 1), ds = s1 - s0;
        const Vec3 y0 = field.segment<3>(3 * m.node_id(i, j, k));
        const Vec3 y1 = field.segment<3>(3 * m.node_id(i, j, k + 1));
        avg += 0.5 * ds * (y0 + y1);
        // int_{s0}^{s1} s [y0 + (y1-y0)(s-s0)/ds] ds
        const Real i1 = 0.5 * (s1 * s1 - s0 * s0);
        const Real i2 = (s1 * s1 * s1 - s0 * s0 * s0) / 3.0 - 0.5 * s0 * (s1 * s1 - s0 * s0);
        mom += y0 * i1 + (y1 - y0) * (i2 / ds);
    }
    avg /= h0;
    mom /= h0;
}

} // namespace

Real Reduction::node_weight(int i, int j) const {
    const ShellMesh& m = *mesh_;
    const Real w1 = (i == 0 || i == m.n1()) ? 0.5 : 1.0;
    const Real w2 = (j == 0 || j == m.n2()) ? 0.5 : 1.0;
    return w1 * w2 * m.dxi1() * m.dxi2() * m.node_frame(i, j).area_element;
}

MatX Reduction::scaled_average(const State3D& s) const {
    const ShellMesh& m = *mesh_;
    const Real scale = s.scaling.h / std::sqrt(s.scaling.e_h);
    MatX out(m.num_chart_nodes(), 3);
    for (int j = 0; j <= m.n2(); ++j)
        for (int i = 0; i <= m.n1(); ++i) {
            Vec3 avg, mom;
            column_integrals(m, s.y, i, j, avg, mom);
            out.row(m.chart_node_id(i, j)) = (scale * (avg - m.node_frame(i, j).x)).transpose();
        }
    return out;
}

MatX Reduction::scaled_average_rate(const State3D& s) const {
    const ShellMesh& m = *mesh_;
    const Real scale = s.scaling.h / std::sqrt(s.scaling.e_h);
    MatX out(m.num_chart_nodes(), 3);
    for (int j = 0; j <= m.n2(); ++j)
        for (int i = 0; i <= m.n1(); ++i) {
            Vec3 avg, mom;
            column_integrals(m, s.v, i, j, avg, mom);
            out.row(m.chart_node_id(i, j)) = (scale * avg).transpose();
        }
    return out;
}

MatX Reduction::first_moment_scaled(const State3D& s) const {
    const ShellMesh& m = *mesh_;
    const Real h = s.scaling.h, h0 = m.h0();
    const Real scale = 1.0 / std::sqrt(s.scaling.e_h);
    MatX out(m.num_chart_nodes(), 3);
    for (int j = 0; j <= m.n2(); ++j)
        for (int i = 0; i <= m.n1(); ++i) {
            const ChartFrame& f = m.node_frame(i, j);
            Vec3 avg, mom;
            column_integrals(m, s.y, i, j, avg, mom);
            // moment of the rest map x + (s h/h0) m: the x part has zero odd
            // moment, the linear part contributes (h/h0) <s^2> m.
            const Real s2avg = [&] {
                Real acc = 0;
                for (int k = 0; k < m.ns(); ++k) {
                    const Real s0 = m.node_s(k), s1 = m.node_s(k + 1);
                    acc += (s1 * s1 * s1 - s0 * s0 * s0) / 3.0;
                }
                return acc / h0;
            }();
            const Vec3 zeta = mom - (h / h0) * s2avg * f.m;
            out.row(m.chart_node_id(i, j)) = (scale * zeta).transpose();
        }
    return out;
}

std::vector<Mat2> Reduction::scaled_strain(const MatX& Vh) const {
    const ShellMesh& m = *mesh_;
    const Real inv_h = 1.0 / solver_->scaling().h;
    std::vector<Mat2> out(m.num_chart_nodes());

    auto row = [&](int i, int j) { return Vh.row(m.chart_node_id(i, j)).transpose(); };
    for (int j = 0; j <= m.n2(); ++j)
        for (int i = 0; i <= m.n1(); ++i) {
            Vec3 d1, d2;
            const Real dx1 = m.dxi1(), dx2 = m.dxi2();
            if (i == 0) d1 = (-3 * row(0, j) + 4 * row(1, j) - row(2, j)) / (2 * dx1);
            else if (i == m.n1())
                d1 = (3 * row(i, j) - 4 * row(i - 1, j) + row(i - 2, j)) / (2 * dx1);
            else d1 = (row(i + 1, j) - row(i - 1, j)) / (2 * dx1);
            if (j == 0) d2 = (-3 * row(i, 0) + 4 * row(i, 1) - row(i, 2)) / (2 * dx2);
            else if (j == m.n2())
                d2 = (3 * row(i, j) - 4 * row(i, j - 1) + row(i, j - 2)) / (2 * dx2);
            else d2 = (row(i, j + 1) - row(i, j - 1)) / (2 * dx2);
            out[m.chart_node_id(i, j)] =
                inv_h * sym_tangential_gradient(m.node_frame(i, j), d1, d2);
        }
    return out;
}

Reduction::RotationData Reduction::rotation_surrogate(const State3D& s) const {
    const ShellMesh& m = *mesh_;
    const int nq = m.nq();
    const int ncells = m.n1() * m.n2();
    const Real h0 = m.h0();
    const Real se = std::sqrt(s.scaling.e_h);
    const Real inv_se = 1.0 / se;
    const MaterialModel& mat = solver_->material();
    const GaussRule gs(nq);
    const Real cell_area_w = m.dxi1() * m.dxi2();

    RotationData out;
    out.Rh.resize(ncells);
    out.Ebar_tan.resize(ncells);
    out.Ehat_tan.resize(ncells);

    Real rdist = 0;
    for (int ej = 0; ej < m.n2(); ++ej)
        for (int ei = 0; ei < m.n1(); ++ei) {
            const int cell = ei + m.n1() * ej;
            const ChartFrame& f = m.cell_center_frame(ei, ej);

            // Through-thickness average of the rescaled gradient at the
            // in-plane cell center.
            Mat3 avg = Mat3::Zero();
            for (int ek = 0; ek < m.ns(); ++ek)
                for (int sq = 0; sq < nq; ++sq)
                    avg += (m.s_qp_weight(sq) / h0) *
                           solver_->hgradient_local(s, m.element_id(ei, ej, ek), 0.5, 0.5,
                                                    gs.pts[sq]);
            const Mat3 R = polar_rotation(avg);
            out.Rh[cell] = R;
            rdist += cell_area_w * f.area_element * (R - Mat3::Identity()).squaredNorm();

            Mat2 ebar = Mat2::Zero(), ehat = Mat2::Zero();
            for (int ek = 0; ek < m.ns(); ++ek)
                for (int sq = 0; sq < nq; ++sq) {
                    const Mat3 F = solver_->hgradient_local(s, m.element_id(ei, ej, ek), 0.5,
                                                            0.5, gs.pts[sq]);
                    const Mat3 G = inv_se * (R.transpose() * F - Mat3::Identity());
                    const Mat3 E = inv_se * mat.stress(Mat3::Identity() + se * G);
                    const Mat2 Et = f.tangential(E);
                    const Real w = m.s_qp_weight(sq) / h0;
                    ebar += w * Et;
                    ehat += w * m.s_qp(m.s_qp_index(ek, sq)) * Et;
                }
            out.Ebar_tan[cell] = ebar;
            out.Ehat_tan[cell] = ehat;
        }
    out.rh_identity_dist = std::sqrt(rdist);
    return out;
}

Real Reduction::y_pi_h1(const State3D& s) const {
    const ShellMesh& m = *mesh_;
    const int nq = m.nq(), nq2 = nq * nq;
    Real acc = 0;
    for (int e = 0; e < m.num_elements(); ++e) {
        const auto [ei, ej, ek] = m.element_cell(e);
        const auto& nodes = m.element_nodes(e);
        std::array<Vec3, 8> diff, pos;
        for (int a = 0; a < 8; ++a) {
            const int n = nodes[a];
            const int k = n / ((m.n1() + 1) * (m.n2() + 1));
            const int rem = n % ((m.n1() + 1) * (m.n2() + 1));
            const int jj = rem / (m.n1() + 1), ii = rem % (m.n1() + 1);
            pos[a] = m.node_position(ii, jj, k);
            diff[a] = s.y.segment<3>(3 * n) - m.node_frame(ii, jj).x;
        }
        for (int cq = 0; cq < nq2; ++cq)
            for (int sq = 0; sq < nq; ++sq) {
                const auto& N = m.shape_values(cq, sq);
                const auto& dN = m.shape_gradients(cq, sq);
                Mat3 jgeo = Mat3::Zero(), jdiff = Mat3::Zero();
                Vec3 val = Vec3::Zero();
                for (int a = 0; a < 8; ++a) {
                    jgeo += pos[a] * dN[a].transpose();
                    jdiff += diff[a] * dN[a].transpose();
                    val += N[a] * diff[a];
                }
                const Mat3 grad = jdiff * jgeo.inverse();
                const ChartFrame& f = m.chart_frame(m.chart_qp_index(ei, ej, cq));
                const Shifter& sh = m.shifter_at(m.chart_qp_index(ei, ej, cq),
                                                 m.s_qp_index(ek, sq));
                const Real w =
                    m.chart_qp_weight(cq) * m.s_qp_weight(sq) * f.area_element * sh.det;
                acc += w * (val.squaredNorm() + grad.squaredNorm());
            }
    }
    return std::sqrt(acc);
}

DiagnosticsSample Reduction::sample(const State3D& s) const {
    DiagnosticsSample d;
    d.t = s.t;
    d.Vh = scaled_average(s);
    d.Vh_t = scaled_average_rate(s);
    d.zeta_scaled = first_moment_scaled(s);
    d.strain_h = scaled_strain(d.Vh);
    RotationData rot = rotation_surrogate(s);
    d.Rh = std::move(rot.Rh);
    d.Ebar_tan = std::move(rot.Ebar_tan);
    d.Ehat_tan = std::move(rot.Ehat_tan);
    d.rh_identity_dist = rot.rh_identity_dist;
    d.energy_ratio = solver_->energy_ratio(s);
    d.y_pi_h1 = y_pi_h1(s);
    return d;
}

ReferenceSample Reduction::reference(const Solver2D& lim, const State2D& s) const {
    const ShellMesh& m = *mesh_;
    ReferenceSample r;
    r.t = s.t;
    r.V.resize(m.num_chart_nodes(), 3);
    r.Vt.resize(m.num_chart_nodes(), 3);
    r.Am.resize(m.num_chart_nodes(), 3);
    r.B.resize(m.num_chart_nodes());

    const Real sk = std::sqrt(s.kappa);
    for (int j = 0; j <= m.n2(); ++j)
        for (int i = 0; i <= m.n1(); ++i) {
            const ChartFrame& f = m.node_frame(i, j);
            const int id = m.chart_node_id(i, j);
            const VectorJet2 jet = lim.eval_jet(s.V, f.xi);
            r.V.row(id) = jet.v.transpose();
            r.Vt.row(id) = lim.eval_value(s.Vt, f.xi).transpose();
            const Mat3 A = skew_field(f, jet.d1, jet.d2);
            r.Am.row(id) = (A * f.m).transpose();
            r.B[id] = lim.eval_B(s.um, f.xi);
        }

    const int ncells = m.n1() * m.n2();
    r.Sigma_tan.resize(ncells);
    r.Ehat_tan.resize(ncells);
    for (int ej = 0; ej < m.n2(); ++ej)
        for (int ei = 0; ei < m.n1(); ++ei) {
            const int cell = ei + m.n1() * ej;
            const ChartFrame& f = m.cell_center_frame(ei, ej);
            const VectorJet2 jet = lim.eval_jet(s.V, f.xi);
            const BendData bd = bend_data(f, jet);
            const Mat2 B = lim.eval_B(s.um, f.xi);
            r.Sigma_tan[cell] = lim.forms().l2_apply(f.x, B - 0.5 * sk * bd.A2_tan);
            r.Ehat_tan[cell] = (m.h0() / 12.0) * lim.forms().l2_apply(f.x, bd.bend);
        }
    return r;
}

Reduction::Distances Reduction::distances(const DiagnosticsSample& d,
                                          const ReferenceSample& r) const {
    const ShellMesh& m = *mesh_;
    Distances out;
    const Real h0_12 = m.h0() / 12.0;
    Real aV = 0, aVt = 0, az = 0, astr = 0;
    for (int j = 0; j <= m.n2(); ++j)
        for (int i = 0; i <= m.n1(); ++i) {
            const int id = m.chart_node_id(i, j);
            const Real w = node_weight(i, j);
            aV += w * (d.Vh.row(id) - r.V.row(id)).squaredNorm();
            aVt += w * (d.Vh_t.row(id) - r.Vt.row(id)).squaredNorm();
            az += w * (d.zeta_scaled.row(id) - h0_12 * r.Am.row(id)).squaredNorm();
            astr += w * (d.strain_h[id] - r.B[id]).squaredNorm();
        }
    out.dV = std::sqrt(aV);
    out.dVt = std::sqrt(aVt);
    out.dzeta = std::sqrt(az);
    out.dstrain = std::sqrt(astr);

    Real aeb = 0, aeh = 0;
    const Real cell_w = m.dxi1() * m.dxi2();
    for (int ej = 0; ej < m.n2(); ++ej)
        for (int ei = 0; ei < m.n1(); ++ei) {
            const int cell = ei + m.n1() * ej;
            const Real w = cell_w * m.cell_center_frame(ei, ej).area_element;
            aeb += w * (d.Ebar_tan[cell] - r.Sigma_tan[cell]).squaredNorm();
            aeh += w * (d.Ehat_tan[cell] - r.Ehat_tan[cell]).squaredNorm();
        }
    out.dEbar = std::sqrt(aeb);
    out.dEhat = std::sqrt(aeh);
    return out;
}

State3D lift_state(const Solver2D& lim, const State2D& s2, const Solver3D& s3) {
    const ShellMesh& m = s3.mesh();
    const ScalingLaw& sc = s3.scaling();
    const Real h = sc.h, h0 = m.h0();
    const Real eps = sc.eps(), se = std::sqrt(sc.e_h), kh = sc.sqrt_kappa_h();
    const MaterialModel& mat = s3.material();
    const Real lam_bar = mat.lambda / (mat.lambda + 2.0 * mat.mu);

    State3D out = s3.rest_state();
    out.t = s2.t;
    for (int j = 0; j <= m.n2(); ++j)
        for (int i = 0; i <= m.n1(); ++i) {
            const ChartFrame& f = m.node_frame(i, j);
            const VectorJet2 jet = lim.eval_jet(s2.V, f.xi);
            const BendData bd = bend_data(f, jet);
            const Vec3 Am = bd.A * f.m;
            const Vec3 Vt = lim.eval_value(s2.Vt, f.xi);
            const Vec3 ugen = lim.eval_um_value(s2.um, f.xi);
            const Mat2 B = lim.eval_B(s2.um, f.xi);
            // The rotation removal contributes -(kh/2) A^2 to the full 3x3
            // strain; its normal-normal entry +(kh/2)|Am|^2 must be cancelled
            // by the corrector along with the Poisson relaxation.
            const Real c0 = -lam_bar * (B - 0.5 * kh * bd.A2_tan).trace() -
                            0.5 * kh * Am.squaredNorm();
            const Real c1 = -lam_bar * bd.bend.trace();
            for (int k = 0; k <= m.ns(); ++k) {
                const int n = m.node_id(i, j, k);
                const Real sk = m.node_s(k);
                const Real sigma = sk * h / h0;
                out.y.segment<3>(3 * n) += eps * (jet.v + sigma * Am) + se * ugen +
                                           (h * se / h0) *
                                               (c0 * sk + c1 * sk * sk / (2.0 * h0)) * f.m;
                out.v.segment<3>(3 * n) = eps * Vt;
            }
        }
    return out;
}

ConvergenceReport build_report(std::vector<ReportRow> rows, const std::string& orientation_note) {
    if (rows.size() < 3) throw InputError("convergence report needs at least 3 thicknesses");
    std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return a.h > b.h;
    });
    for (std::size_t k = 0; k + 1 < rows.size(); ++k)
        if (rows[k].h == rows[k + 1].h) throw InputError("duplicate thickness in report");
    for (const ReportRow& r : rows) {
        if (r.times.size() != r.dist.size() || r.times != rows[0].times)
            throw InputError("mismatched time grids across thicknesses");
        for (const auto& d : r.dist)
            if (!std::isfinite(d.dV) || !std::isfinite(d.dzeta) || !std::isfinite(d.dstrain))
                throw InputError("non-finite distance in report row");
    }

    ConvergenceReport rep;
    rep.orientation_note = orientation_note;

    auto metric = [&](const std::string& name, auto getter, bool over_all_times) {
        TrendVerdict v;
        v.metric = name;
        const std::size_t nt = rows[0].times.size();
        Real maxval = 0;
        for (std::size_t ti = 0; ti < nt; ++ti)
            for (std::size_t k = 0; k < rows.size(); ++k)
                maxval = std::max(maxval, std::abs(getter(rows[k], ti)));
        if (maxval >= 1e-12) {
            for (std::size_t ti = 0; ti < nt; ++ti) {
                for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
                    const Real a = getter(rows[k], ti), b = getter(rows[k + 1], ti);
                    // Tolerant comparisons: ties at roundoff level do not
                    // spoil the monotone verdicts.
                    const Real tol = 1e-9 * std::max({std::abs(a), std::abs(b), Real(1e-300)});
                    if (!(b < a - tol)) v.strictly_decreasing = false;
                    if (b > a + tol) v.non_increasing = false;
                }
                if (!over_all_times) break;
            }
        }
        for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
            const Real a = getter(rows[k], nt - 1), b = getter(rows[k + 1], nt - 1);
            v.ratios.push_back(a != 0 ? b / a : 0);
        }
        rep.verdicts.push_back(v);
    };

    metric("V", [](const ReportRow& r, std::size_t t) { return r.dist[t].dV; }, true);
    metric("Vt", [](const ReportRow& r, std::size_t t) { return r.dist[t].dVt; }, true);
    metric("zeta", [](const ReportRow& r, std::size_t t) { return r.dist[t].dzeta; }, true);
    metric("strain", [](const ReportRow& r, std::size_t t) { return r.dist[t].dstrain; }, true);
    metric("Ebar", [](const ReportRow& r, std::size_t t) { return r.dist[t].dEbar; }, true);
    metric("Ehat", [](const ReportRow& r, std::size_t t) { return r.dist[t].dEhat; }, true);
    metric("y_pi_h1", [](const ReportRow& r, std::size_t) { return r.y_pi_h1_final; }, false);

    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        const Real ratio = rows[k + 1].sup_energy_ratio /
                           std::max(rows[k].sup_energy_ratio, Real(1e-300));
        rep.energy_ratio_ratios.push_back(ratio);
        if (ratio < 0.5 || ratio > 2.0) rep.energy_ratio_bounded = false;
    }

    // "Converged" verdict: V, zeta strictly decreasing; strain non-
    // increasing; energy ratios bounded. Subsequential behavior permitted by
    // the theorem is reported but does not assert failure for the others.
    bool ok = rep.energy_ratio_bounded;
    for (const TrendVerdict& v : rep.verdicts) {
        if (v.metric == "V" || v.metric == "zeta") ok = ok && v.strictly_decreasing;
        if (v.metric == "strain") ok = ok && v.non_increasing;
    }
    rep.converged = ok;
    rep.rows = std::move(rows);
    return rep;
}

} // namespace shellvk
