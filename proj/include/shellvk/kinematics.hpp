#ifndef SHELLVK_KINEMATICS_HPP
#define SHELLVK_KINEMATICS_HPP

#include "shellvk/chart.hpp"
#include "shellvk/types.hpp"

namespace shellvk {

/// Chart-derivative jet of a surface vector field.
struct VectorJet2 {
    Vec3 v = Vec3::Zero();
    Vec3 d1 = Vec3::Zero(), d2 = Vec3::Zero();
    Vec3 d11 = Vec3::Zero(), d12 = Vec3::Zero(), d22 = Vec3::Zero();
};

/// Skew matrix field A of a displacement V with A tau = d_tau V on tangents,
/// completed through skew-symmetry: <A m, that_a> = -<d_a V, m>, <A m, m> = 0.
/// Exactly skew when V is an infinitesimal isometry; for penalized discrete
/// fields the symmetric tangential defect equals sym(grad V)_tan.
inline Mat3 skew_field(const ChartFrame& f, const Vec3& d1, const Vec3& d2) {
    const Vec3 w = -(f.m.dot(d1)) * f.g1 - (f.m.dot(d2)) * f.g2;
    return d1 * f.g1.transpose() + d2 * f.g2.transpose() + w * f.m.transpose();
}

/// sym(grad V)_tan in the orthonormal tangent frame (the isometry defect).
inline Mat2 sym_tangential_gradient(const ChartFrame& f, const Vec3& d1, const Vec3& d2) {
    const Vec3 dh[2] = {f.beta(0, 0) * d1 + f.beta(1, 0) * d2,
                        f.beta(0, 1) * d1 + f.beta(1, 1) * d2};
    Mat2 s;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            s(a, b) = 0.5 * (dh[a].dot(f.that(b)) + dh[b].dot(f.that(a)));
    return s;
}

struct BendData {
    Mat3 A;       // skew gradient field
    Mat2 bend;    // (grad(A m) - A Pi)_tan
    Mat2 symtan;  // sym(grad V)_tan
    Mat2 A2_tan;  // (A^2)_tan
};

/// All per-point kinematic quantities of the limit model derived from the
/// jet of V: the rotation field A, the bending tensor, the isometry defect
/// and the tangential minor of A^2.
inline BendData bend_data(const ChartFrame& f, const VectorJet2& jet) {
    BendData out;
    out.A = skew_field(f, jet.d1, jet.d2);
    out.symtan = sym_tangential_gradient(f, jet.d1, jet.d2);

    // Chart derivatives of A, differentiating the completion construction.
    const Vec3 D[2] = {jet.d1, jet.d2};
    const Vec3 DD[2][2] = {{jet.d11, jet.d12}, {jet.d12, jet.d22}};
    const Vec3 w = -(f.m.dot(D[0])) * f.g1 - (f.m.dot(D[1])) * f.g2;
    Vec3 dAm[2]; // d/dxi_c of (A m)
    for (int c = 0; c < 2; ++c) {
        const Vec3 mc = f.m_deriv(c);
        Mat3 dA = Mat3::Zero();
        for (int d = 0; d < 2; ++d)
            dA += DD[d][c] * f.g(d).transpose() + D[d] * f.g_deriv(d, c).transpose();
        Vec3 wc = Vec3::Zero();
        for (int d = 0; d < 2; ++d)
            wc += -(mc.dot(D[d]) + f.m.dot(DD[d][c])) * f.g(d) -
                  (f.m.dot(D[d])) * f.g_deriv(d, c);
        dA += wc * f.m.transpose() + w * mc.transpose();
        dAm[c] = dA * f.m + out.A * mc;
    }

    Mat2 grad_Am;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const Vec3 dir = f.beta(0, b) * dAm[0] + f.beta(1, b) * dAm[1];
            grad_Am(a, b) = f.that(a).dot(dir);
        }
    Mat2 APi;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) APi(a, b) = f.that(a).dot(out.A * (f.Pi * f.that(b)));
    out.bend = grad_Am - APi;

    const Mat3 A2 = out.A * out.A;
    out.A2_tan = f.tangential(A2);
    return out;
}

} // namespace shellvk

#endif
