#ifndef SHELLVK_CHART_HPP
#define SHELLVK_CHART_HPP

#include "shellvk/types.hpp"

#include <string>

namespace shellvk {

enum class ChartKind { Plate, Cylinder, SpherePatch };

std::string to_string(ChartKind k);
ChartKind chart_kind_from_string(const std::string& s);

/// Everything the assembly kernels need at one parameter point, precomputed:
/// position, raw tangents t_c = dx/dxi_c and their derivatives, the oriented
/// unit normal n, the director m = -n (the through-thickness direction whose
/// ambient derivative equals the curvature tensor Pi, so that the shifter
/// F(s) = Id + s*Pi is the exact Jacobian of (x, s) -> x + s*m), the dual
/// tangent basis g^c with <g^c, t_d> = delta_cd, and an orthonormal tangent
/// frame that1/that2 with coefficients beta so that_b = sum_c beta(c,b) t_c.
struct ChartFrame {
    Vec2 xi;
    Vec3 x;
    Vec3 t1, t2;
    Vec3 x11, x12, x22; // second derivatives of the chart map
    Vec3 n;             // oriented unit normal (what normal() reports)
    Vec3 m;             // director, m = -n
    Mat3 Pi;            // curvature tensor, Pi = grad(m), Pi*m = 0
    Vec3 g1, g2;        // dual tangent basis
    Vec3 g1_d1, g1_d2, g2_d1, g2_d2; // chart derivatives of g^c
    Vec3 that1, that2;  // orthonormal tangent frame
    Vec3 that1_d1, that1_d2, that2_d1, that2_d2; // chart derivatives of the frame
    Mat2 beta;          // that_b = beta(1,b)*t1 + beta(2,b)*t2 (0-based in code)
    Real area_element;  // |t1 x t2|

    Vec3 m_deriv(int c) const { return Pi * (c == 0 ? t1 : t2); }
    Vec3 that(int a) const { return a == 0 ? that1 : that2; }
    Vec3 that_deriv(int a, int c) const {
        if (a == 0) return c == 0 ? that1_d1 : that1_d2;
        return c == 0 ? that2_d1 : that2_d2;
    }
    Vec3 g(int c) const { return c == 0 ? g1 : g2; }
    Vec3 t(int c) const { return c == 0 ? t1 : t2; }
    Vec3 g_deriv(int c, int d) const {
        if (c == 0) return d == 0 ? g1_d1 : g1_d2;
        return d == 0 ? g2_d1 : g2_d2;
    }
    Vec3 x_deriv2(int c, int d) const {
        if (c == 0 && d == 0) return x11;
        if (c == 1 && d == 1) return x22;
        return x12;
    }

    /// Tangential minor of a 3x3 matrix in the orthonormal frame.
    Mat2 tangential(const Mat3& M) const {
        Mat2 out;
        out(0, 0) = that1.dot(M * that1);
        out(0, 1) = that1.dot(M * that2);
        out(1, 0) = that2.dot(M * that1);
        out(1, 1) = that2.dot(M * that2);
        return out;
    }
};

/// Analytic single-chart surfaces: a flat plate, a cylinder patch and a
/// sphere patch (graph chart centered at the pole). All maps are injective
/// with rank-2 Jacobians on their parameter rectangles, and curvature has
/// closed form. `orientation` flips the reported normal (and with it the
/// sign of Pi); the default +1 reports the outward normal for the curved
/// charts and +e3 for the plate.
class Chart {
  public:
    static Chart plate(Real lx, Real ly, int orientation = +1);
    static Chart cylinder(Real radius, Real angle, Real length, int orientation = +1);
    static Chart sphere_patch(Real radius, Real half_width, int orientation = +1);

    ChartKind kind() const { return kind_; }
    int orientation() const { return orientation_; }

    Vec2 param_lo() const { return lo_; }
    Vec2 param_hi() const { return hi_; }
    bool contains(const Vec2& xi, Real tol = 1e-12) const;
    void require_inside(const Vec2& xi) const;

    Vec3 position(const Vec2& xi) const;
    Vec3 tangent(const Vec2& xi, int c) const;
    /// Oriented unit normal.
    Vec3 normal(const Vec2& xi) const;
    /// Director m = -normal; the extrusion x + s*m has Jacobian Id + s*Pi.
    Vec3 director(const Vec2& xi) const;
    /// Curvature tensor Pi = grad(director), extended with Pi*m = 0.
    Mat3 curvature(const Vec2& xi) const;

    struct NormalJet {
        Vec3 v, d1, d2, d11, d12, d22;
    };
    /// Oriented normal with its chart derivatives up to second order, for
    /// analytic profile fields of the form v(xi) n(xi).
    NormalJet normal_jet(const Vec2& xi) const;

    ChartFrame frame(const Vec2& xi) const;

    /// Closed-form surface area (1D-reduced Gauss quadrature for the sphere
    /// patch, exact to machine precision); reference value for mesh tests.
    Real reference_area() const;

    /// Largest |principal curvature| over the chart; 0 for the plate.
    Real max_abs_curvature() const;

    Real shape_param(int i) const { return shape_[i]; }
    std::string describe() const;

  private:
    Chart() = default;
    ChartKind kind_ = ChartKind::Plate;
    int orientation_ = +1;
    Real shape_[3] = {1, 1, 0}; // plate: lx,ly ; cylinder: R,angle,length ; sphere: R,half_width
    Vec2 lo_ = Vec2::Zero(), hi_ = Vec2::Ones();
};

} // namespace shellvk

#endif
