#include "shellvk/geometry.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace shellvk {

Vec3 normal(const Chart& chart, const Vec2& xi) {
    chart.require_inside(xi);
    return chart.normal(xi);
}

SecondFundamentalForm second_fundamental_form(const Chart& chart, const Vec2& xi) {
    chart.require_inside(xi);
    SecondFundamentalForm out;
    out.Pi = chart.curvature(xi);
    const ChartFrame f = chart.frame(xi);
    Eigen::SelfAdjointEigenSolver<Mat2> es(f.tangential(sym(out.Pi)));
    out.principal = es.eigenvalues();
    return out;
}

Shifter shifter(const Mat3& Pi, Real s) {
    Shifter sh;
    sh.F = Mat3::Identity() + s * Pi;
    sh.det = sh.F.determinant();
    if (sh.det <= 0)
        throw GeometryError("shifter determinant nonpositive: thickness too large for curvature");
    sh.Finv = sh.F.inverse();
    return sh;
}

GaussRule::GaussRule(int n) {
    // Nodes on [0,1]. Hard-coded up to 5 points; plenty for trilinear and
    // bicubic elements.
    switch (n) {
        case 1:
            pts = {0.5};
            wts = {1.0};
            break;
        case 2: {
            const Real d = 0.5 / std::sqrt(3.0);
            pts = {0.5 - d, 0.5 + d};
            wts = {0.5, 0.5};
            break;
        }
        case 3: {
            const Real d = 0.5 * std::sqrt(3.0 / 5.0);
            pts = {0.5 - d, 0.5, 0.5 + d};
            wts = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
            break;
        }
        case 4: {
            const Real a = 0.5 * std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const Real b = 0.5 * std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const Real wa = (18.0 + std::sqrt(30.0)) / 72.0;
            const Real wb = (18.0 - std::sqrt(30.0)) / 72.0;
            pts = {0.5 - b, 0.5 - a, 0.5 + a, 0.5 + b};
            wts = {wb, wa, wa, wb};
            break;
        }
        case 5: {
            const Real a = 0.5 / 3.0 * std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0));
            const Real b = 0.5 / 3.0 * std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0));
            const Real wa = (322.0 + 13.0 * std::sqrt(70.0)) / 1800.0;
            const Real wb = (322.0 - 13.0 * std::sqrt(70.0)) / 1800.0;
            pts = {0.5 - b, 0.5 - a, 0.5, 0.5 + a, 0.5 + b};
            wts = {wb, wa, 64.0 / 225.0, wa, wb};
            break;
        }
        default: throw ConfigError("quadrature order must be 1..5");
    }
}

void ShellMesh::eval_basis(Real u, Real v, Real w, Real d1, Real d2, Real d3,
                           std::array<Real, 8>& val, std::array<Vec3, 8>& grad) {
    const Real lu[2] = {1 - u, u}, lv[2] = {1 - v, v}, lw[2] = {1 - w, w};
    const Real du[2] = {-1, 1}, dv[2] = {-1, 1}, dw[2] = {-1, 1};
    for (int c = 0; c < 2; ++c)
        for (int b = 0; b < 2; ++b)
            for (int a = 0; a < 2; ++a) {
                const int l = a + 2 * (b + 2 * c);
                val[l] = lu[a] * lv[b] * lw[c];
                grad[l] = Vec3(du[a] * lv[b] * lw[c] / d1, lu[a] * dv[b] * lw[c] / d2,
                               lu[a] * lv[b] * dw[c] / d3);
            }
}

ShellMesh::ShellMesh(const Chart& chart, int n1, int n2, int ns, Real h0, int nq)
    : chart_(chart), n1_(n1), n2_(n2), ns_(ns), nq_(nq), h0_(h0) {
    if (n1 < 2 || n2 < 2 || ns < 1) throw GeometryError("mesh needs n1,n2 >= 2 and ns >= 1");
    if (h0 <= 0) throw GeometryError("h0 must be positive");

    // Shifter bound 1/2 < det F(s) < 3/2 over the whole slab, checked from
    // the principal curvatures before any quadrature data is built.
    const Real kmax = chart.max_abs_curvature();
    if (kmax > 0) {
        const Real e = 0.5 * h0 * kmax;
        const Real lo = std::pow(1.0 - e, (chart.kind() == ChartKind::SpherePatch) ? 2 : 1);
        const Real hi = std::pow(1.0 + e, (chart.kind() == ChartKind::SpherePatch) ? 2 : 1);
        if (e >= 1.0 || lo <= 0.5 || hi >= 1.5)
            throw GeometryError("thickness h0 violates 1/2 < det F(s) < 3/2 for this chart");
    }

    d1_ = (chart.param_hi()[0] - chart.param_lo()[0]) / n1;
    d2_ = (chart.param_hi()[1] - chart.param_lo()[1]) / n2;
    ds_ = h0 / ns;

    conn_.resize(num_elements());
    for (int ek = 0; ek < ns_; ++ek)
        for (int ej = 0; ej < n2_; ++ej)
            for (int ei = 0; ei < n1_; ++ei) {
                auto& c = conn_[element_id(ei, ej, ek)];
                int l = 0;
                for (int kk = 0; kk < 2; ++kk)
                    for (int jj = 0; jj < 2; ++jj)
                        for (int ii = 0; ii < 2; ++ii)
                            c[l++] = node_id(ei + ii, ej + jj, ek + kk);
            }

    const GaussRule g(nq_);

    chart_qp_w_.resize(nq_ * nq_);
    for (int qv = 0; qv < nq_; ++qv)
        for (int qu = 0; qu < nq_; ++qu)
            chart_qp_w_[qu + nq_ * qv] = g.wts[qu] * g.wts[qv] * d1_ * d2_;

    chart_qp_frames_.resize(n1_ * n2_ * nq_ * nq_);
    for (int ej = 0; ej < n2_; ++ej)
        for (int ei = 0; ei < n1_; ++ei)
            for (int qv = 0; qv < nq_; ++qv)
                for (int qu = 0; qu < nq_; ++qu) {
                    const Vec2 xi(chart.param_lo()[0] + (ei + g.pts[qu]) * d1_,
                                  chart.param_lo()[1] + (ej + g.pts[qv]) * d2_);
                    chart_qp_frames_[chart_qp_index(ei, ej, qu + nq_ * qv)] = chart.frame(xi);
                }

    s_qp_.resize(ns_ * nq_);
    s_qp_w_.resize(ns_ * nq_);
    for (int ek = 0; ek < ns_; ++ek)
        for (int q = 0; q < nq_; ++q) {
            s_qp_[s_qp_index(ek, q)] = -h0_ / 2 + (ek + g.pts[q]) * ds_;
            s_qp_w_[s_qp_index(ek, q)] = g.wts[q] * ds_;
        }

    shift_.resize(chart_qp_frames_.size() * s_qp_.size());
    for (std::size_t cq = 0; cq < chart_qp_frames_.size(); ++cq)
        for (std::size_t sq = 0; sq < s_qp_.size(); ++sq) {
            Shifter sh = shifter(chart_qp_frames_[cq].Pi, s_qp_[sq]);
            if (sh.det <= 0.5 || sh.det >= 1.5)
                throw GeometryError("det F(s) outside (1/2, 3/2) at a quadrature point");
            shift_[cq * s_qp_.size() + sq] = sh;
        }

    node_frames_.resize(num_chart_nodes());
    for (int j = 0; j <= n2_; ++j)
        for (int i = 0; i <= n1_; ++i) node_frames_[chart_node_id(i, j)] = chart.frame(node_xi(i, j));

    basis_val_.resize(nq_ * nq_ * nq_);
    basis_grad_.resize(nq_ * nq_ * nq_);
    for (int cq = 0; cq < nq_ * nq_; ++cq)
        for (int sq = 0; sq < nq_; ++sq) {
            const Real u = g.pts[cq % nq_], v = g.pts[cq / nq_], w = g.pts[sq];
            eval_basis(u, v, w, d1_, d2_, ds_, basis_val_[cq * nq_ + sq],
                       basis_grad_[cq * nq_ + sq]);
        }

    center_frames_.resize(n1_ * n2_);
    for (int ej = 0; ej < n2_; ++ej)
        for (int ei = 0; ei < n1_; ++ei) {
            const Vec2 xi(chart.param_lo()[0] + (ei + 0.5) * d1_,
                          chart.param_lo()[1] + (ej + 0.5) * d2_);
            center_frames_[ei + n1_ * ej] = chart.frame(xi);
        }
}

std::array<int, 3> ShellMesh::element_cell(int e) const {
    const int ei = e % n1_;
    const int ej = (e / n1_) % n2_;
    const int ek = e / (n1_ * n2_);
    return {ei, ej, ek};
}

Vec2 ShellMesh::node_xi(int i, int j) const {
    return Vec2(chart_.param_lo()[0] + d1_ * i, chart_.param_lo()[1] + d2_ * j);
}

Vec3 ShellMesh::node_position(int i, int j, int k) const {
    const ChartFrame& f = node_frames_[chart_node_id(i, j)];
    return f.x + node_s(k) * f.m;
}

Real ShellMesh::quadrature_area() const {
    Real area = 0;
    for (int ej = 0; ej < n2_; ++ej)
        for (int ei = 0; ei < n1_; ++ei)
            for (int cq = 0; cq < nq_ * nq_; ++cq)
                area += chart_qp_w_[cq] * chart_qp_frames_[chart_qp_index(ei, ej, cq)].area_element;
    return area;
}

void ShellMesh::dump_csv(const std::string& node_path, const std::string& conn_path) const {
    std::ofstream nf(node_path);
    nf << "id,xi1,xi2,s,x,y,z\n";
    char buf[256];
    for (int k = 0; k <= ns_; ++k)
        for (int j = 0; j <= n2_; ++j)
            for (int i = 0; i <= n1_; ++i) {
                const Vec2 xi = node_xi(i, j);
                const Vec3 p = node_position(i, j, k);
                std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                              node_id(i, j, k), xi[0], xi[1], node_s(k), p[0], p[1], p[2]);
                nf << buf;
            }
    std::ofstream cf(conn_path);
    cf << "element,n0,n1,n2,n3,n4,n5,n6,n7\n";
    for (int e = 0; e < num_elements(); ++e) {
        cf << e;
        for (int l = 0; l < 8; ++l) cf << ',' << conn_[e][l];
        cf << '\n';
    }
}

SurfaceGrid::SurfaceGrid(const Chart& chart, int n1, int n2, int nq)
    : chart_(chart), n1_(n1), n2_(n2), nq_(nq) {
    if (n1 < 2 || n2 < 2) throw GeometryError("surface grid needs n1,n2 >= 2");
    d1_ = (chart.param_hi()[0] - chart.param_lo()[0]) / n1;
    d2_ = (chart.param_hi()[1] - chart.param_lo()[1]) / n2;
    const GaussRule g(nq_);

    qp_w_.resize(qp_per_cell());
    qp_local_.resize(qp_per_cell());
    for (int qv = 0; qv < nq_; ++qv)
        for (int qu = 0; qu < nq_; ++qu) {
            qp_w_[qu + nq_ * qv] = g.wts[qu] * g.wts[qv] * d1_ * d2_;
            qp_local_[qu + nq_ * qv] = Vec2(g.pts[qu], g.pts[qv]);
        }

    qp_frames_.resize(num_qp());
    for (int ej = 0; ej < n2_; ++ej)
        for (int ei = 0; ei < n1_; ++ei)
            for (int q = 0; q < qp_per_cell(); ++q) {
                const Vec2 loc = qp_local_[q];
                const Vec2 xi(chart.param_lo()[0] + (ei + loc[0]) * d1_,
                              chart.param_lo()[1] + (ej + loc[1]) * d2_);
                qp_frames_[qp_index(cell_id(ei, ej), q)] = chart.frame(xi);
            }

    node_frames_.resize(num_nodes());
    for (int j = 0; j <= n2_; ++j)
        for (int i = 0; i <= n1_; ++i) node_frames_[node_id(i, j)] = chart.frame(node_xi(i, j));
}

Vec2 SurfaceGrid::node_xi(int i, int j) const {
    return Vec2(chart_.param_lo()[0] + d1_ * i, chart_.param_lo()[1] + d2_ * j);
}

} // namespace shellvk
