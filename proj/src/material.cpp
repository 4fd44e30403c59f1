#include "shellvk/material.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace shellvk {

Real MaterialModel::energy_density(const Mat3& F) const {
    const Mat3 E = 0.5 * (F.transpose() * F - Mat3::Identity());
    const Real trE = E.trace();
    return mu * ddot(E, E) + 0.5 * lambda * trE * trE;
}

Mat3 MaterialModel::stress(const Mat3& F) const {
    const Mat3 E = 0.5 * (F.transpose() * F - Mat3::Identity());
    return F * (2.0 * mu * E + lambda * E.trace() * Mat3::Identity());
}

Mat3 MaterialModel::stress_tangent(const Mat3& F, const Mat3& H) const {
    const Mat3 E = 0.5 * (F.transpose() * F - Mat3::Identity());
    const Mat3 dE = sym(F.transpose() * H);
    const Mat3 S = 2.0 * mu * E + lambda * E.trace() * Mat3::Identity();
    const Mat3 dS = 2.0 * mu * dE + lambda * dE.trace() * Mat3::Identity();
    return H * S + F * dS;
}

Real MaterialModel::q3(const Mat3& F) const {
    const Mat3 s = sym(F);
    const Real tr = F.trace();
    return 2.0 * mu * ddot(s, s) + lambda * tr * tr;
}

Mat3 MaterialModel::l3_apply(const Mat3& F) const {
    return 2.0 * mu * sym(F) + lambda * F.trace() * Mat3::Identity();
}

Real QuadraticForms::q2(const Vec3& /*x*/, const Mat2& G) const {
    const Mat2 s = sym2(G);
    const Real tr = s.trace();
    return 2.0 * model.mu * ddot2(s, s) + lambda_star() * tr * tr;
}

Mat2 QuadraticForms::l2_apply(const Vec3& /*x*/, const Mat2& G) const {
    const Mat2 s = sym2(G);
    return 2.0 * model.mu * s + lambda_star() * s.trace() * Mat2::Identity();
}

Mat3 QuadraticForms::minimizing_extension(const Vec3& /*x*/, const Mat2& G) const {
    // First-order conditions of min Q3 over the symmetric normal components
    // (z1, z2, z33) of the extension: shears vanish, and
    // 2 mu z33 + lambda (tr G + z33) = 0.
    const Mat2 s = sym2(G);
    Mat3 ext = Mat3::Zero();
    ext.topLeftCorner<2, 2>() = s;
    ext(2, 2) = -model.lambda / (model.lambda + 2.0 * model.mu) * s.trace();
    return ext;
}

Real distance_to_rotations(const Mat3& F) {
    Eigen::JacobiSVD<Mat3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vec3 sv = svd.singularValues();
    const Real detUV = (svd.matrixU() * svd.matrixV().transpose()).determinant();
    if (detUV < 0) sv[2] = -sv[2];
    return std::sqrt((sv[0] - 1) * (sv[0] - 1) + (sv[1] - 1) * (sv[1] - 1) +
                     (sv[2] - 1) * (sv[2] - 1));
}

Mat3 polar_rotation(const Mat3& F) {
    Eigen::JacobiSVD<Mat3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 R = svd.matrixU() * svd.matrixV().transpose();
    if (R.determinant() < 0) {
        Mat3 D = Mat3::Identity();
        D(2, 2) = -1;
        R = svd.matrixU() * D * svd.matrixV().transpose();
    }
    if (svd.singularValues()[1] < 1e-14)
        throw DiagnosticsError("polar rotation undefined: rank-deficient gradient");
    return R;
}

} // namespace shellvk
