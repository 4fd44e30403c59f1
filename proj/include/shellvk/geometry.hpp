#ifndef SHELLVK_GEOMETRY_HPP
#define SHELLVK_GEOMETRY_HPP

#include "shellvk/chart.hpp"
#include "shellvk/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace shellvk {

/// Curvature tensor with its principal curvatures (eigenvalues of the
/// tangential minor). Pi is stored as a full ambient 3x3 with Pi*m = 0.
struct SecondFundamentalForm {
    Mat3 Pi;
    Vec2 principal;
};

Vec3 normal(const Chart& chart, const Vec2& xi);
SecondFundamentalForm second_fundamental_form(const Chart& chart, const Vec2& xi);

/// Shifter F(s) = Id + s*Pi mapping midsurface tangent data to the offset
/// surface at normal distance s; det F(s) = (1 + s*k1)(1 + s*k2).
struct Shifter {
    Mat3 F, Finv;
    Real det;
};

Shifter shifter(const Mat3& Pi, Real s);

/// 1D Gauss-Legendre rule mapped to [0,1].
struct GaussRule {
    std::vector<Real> pts, wts;
    explicit GaussRule(int n);
};

/// Structured hexahedral mesh of the fixed rescaled slab S^{h0}:
/// parameter rectangle x (-h0/2, h0/2), n1 x n2 x ns trilinear cells.
/// All chart frames and shifters are precomputed at the tensor-product
/// quadrature points; the object is immutable after construction.
class ShellMesh {
  public:
    ShellMesh(const Chart& chart, int n1, int n2, int ns, Real h0, int nq = 2);

    const Chart& chart() const { return chart_; }
    Real h0() const { return h0_; }
    int n1() const { return n1_; }
    int n2() const { return n2_; }
    int ns() const { return ns_; }
    int nq() const { return nq_; }

    int num_nodes() const { return (n1_ + 1) * (n2_ + 1) * (ns_ + 1); }
    int num_elements() const { return n1_ * n2_ * ns_; }
    int num_chart_nodes() const { return (n1_ + 1) * (n2_ + 1); }

    int node_id(int i, int j, int k) const { return i + (n1_ + 1) * (j + (n2_ + 1) * k); }
    int chart_node_id(int i, int j) const { return i + (n1_ + 1) * j; }
    int element_id(int ei, int ej, int ek) const { return ei + n1_ * (ej + n2_ * ek); }
    std::array<int, 3> element_cell(int e) const;
    const std::array<int, 8>& element_nodes(int e) const { return conn_[e]; }

    Vec2 node_xi(int i, int j) const;
    Real node_s(int k) const { return -h0_ / 2 + ds_ * k; }
    /// Ambient position of a mesh node on S^{h0}: x(xi) + s*m(xi).
    Vec3 node_position(int i, int j, int k) const;
    bool is_lateral_boundary(int i, int j) const {
        return i == 0 || i == n1_ || j == 0 || j == n2_;
    }

    const ChartFrame& node_frame(int i, int j) const { return node_frames_[chart_node_id(i, j)]; }

    // --- quadrature layout -------------------------------------------------
    int n_chart_qp_per_cell() const { return nq_ * nq_; }
    int n_s_qp_per_layer() const { return nq_; }
    int chart_qp_index(int ei, int ej, int cq) const {
        return (ei + n1_ * ej) * nq_ * nq_ + cq;
    }
    int s_qp_index(int ek, int sq) const { return ek * nq_ + sq; }

    const ChartFrame& chart_frame(int qpi) const { return chart_qp_frames_[qpi]; }
    /// Quadrature weight on the chart including the parameter measure
    /// (excludes the area element |t1 x t2|).
    Real chart_qp_weight(int cq) const { return chart_qp_w_[cq]; }
    Real s_qp(int si) const { return s_qp_[si]; }
    Real s_qp_weight(int sq) const { return s_qp_w_[sq]; }
    const Shifter& shifter_at(int chart_qpi, int s_qpi) const {
        return shift_[chart_qpi * (ns_ * nq_) + s_qpi];
    }

    /// Trilinear shape values / parameter-space gradients at local QP
    /// (cq, sq); identical for all elements of the uniform grid.
    const std::array<Real, 8>& shape_values(int cq, int sq) const {
        return basis_val_[cq * nq_ + sq];
    }
    const std::array<Vec3, 8>& shape_gradients(int cq, int sq) const {
        return basis_grad_[cq * nq_ + sq];
    }

    /// Trilinear basis at arbitrary local coordinates of a cell, with
    /// parameter-space gradients scaled by the given cell sizes.
    static void eval_basis(Real u, Real v, Real w, Real d1, Real d2, Real d3,
                           std::array<Real, 8>& val, std::array<Vec3, 8>& grad);

    /// Chart frame at the in-plane center of a chart cell.
    const ChartFrame& cell_center_frame(int ei, int ej) const {
        return center_frames_[ei + n1_ * ej];
    }

    Real dxi1() const { return d1_; }
    Real dxi2() const { return d2_; }
    Real ds() const { return ds_; }

    /// Surface area of the chart by the mesh quadrature rule.
    Real quadrature_area() const;

    void dump_csv(const std::string& node_path, const std::string& conn_path) const;

  private:
    Chart chart_;
    int n1_, n2_, ns_, nq_;
    Real h0_, d1_, d2_, ds_;
    std::vector<std::array<int, 8>> conn_;
    std::vector<ChartFrame> chart_qp_frames_; // per chart cell x (nq*nq)
    std::vector<Real> chart_qp_w_;            // per local cq, includes d1*d2
    std::vector<Real> s_qp_, s_qp_w_;         // per layer x nq
    std::vector<Shifter> shift_;              // chart_qp x s_qp
    std::vector<ChartFrame> node_frames_;
    std::vector<ChartFrame> center_frames_;
    std::vector<std::array<Real, 8>> basis_val_;
    std::vector<std::array<Vec3, 8>> basis_grad_;
};

/// 2D quadrature grid over the chart rectangle, used by the limit solver and
/// the diagnostics: n1 x n2 cells with an nq x nq Gauss rule per cell.
class SurfaceGrid {
  public:
    SurfaceGrid(const Chart& chart, int n1, int n2, int nq);

    const Chart& chart() const { return chart_; }
    int n1() const { return n1_; }
    int n2() const { return n2_; }
    int nq() const { return nq_; }
    int num_cells() const { return n1_ * n2_; }
    int num_nodes() const { return (n1_ + 1) * (n2_ + 1); }
    int qp_per_cell() const { return nq_ * nq_; }
    int num_qp() const { return num_cells() * qp_per_cell(); }

    int node_id(int i, int j) const { return i + (n1_ + 1) * j; }
    int cell_id(int ei, int ej) const { return ei + n1_ * ej; }
    int qp_index(int cell, int q) const { return cell * qp_per_cell() + q; }

    Vec2 node_xi(int i, int j) const;
    const ChartFrame& node_frame(int i, int j) const { return node_frames_[node_id(i, j)]; }
    const ChartFrame& qp_frame(int qpi) const { return qp_frames_[qpi]; }
    /// Parameter measure weight of local qp q (excludes area element).
    Real qp_weight(int q) const { return qp_w_[q]; }
    /// Local coordinates of qp q within the reference cell [0,1]^2.
    Vec2 qp_local(int q) const { return qp_local_[q]; }

    Real dxi1() const { return d1_; }
    Real dxi2() const { return d2_; }

  private:
    Chart chart_;
    int n1_, n2_, nq_;
    Real d1_, d2_;
    std::vector<ChartFrame> qp_frames_;
    std::vector<ChartFrame> node_frames_;
    std::vector<Real> qp_w_;
    std::vector<Vec2> qp_local_;
};

} // namespace shellvk

#endif
