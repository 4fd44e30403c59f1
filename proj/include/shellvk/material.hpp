#ifndef SHELLVK_MATERIAL_HPP
#define SHELLVK_MATERIAL_HPP

#include "shellvk/chart.hpp"
#include "shellvk/types.hpp"

namespace shellvk {

enum class MaterialKind { StVenantKirchhoff };

/// Isotropic St. Venant-Kirchhoff energy
///   W(F) = mu |E|^2 + (lambda/2) tr(E)^2,  E = (F^T F - Id)/2.
/// Frame indifferent, zero on SO(3), C^2 with D^2W(Id) positive definite on
/// symmetric matrices. Coercivity holds near SO(3) (checked by the invariant
/// suite over the neighborhood the simulations live in).
struct MaterialModel {
    MaterialKind kind = MaterialKind::StVenantKirchhoff;
    Real mu = 1.0;
    Real lambda = 1.0;

    MaterialModel() = default;
    MaterialModel(Real mu_, Real lambda_) : mu(mu_), lambda(lambda_) {
        if (mu <= 0 || lambda < 0) throw ConfigError("need mu > 0 and lambda >= 0");
    }

    Real energy_density(const Mat3& F) const;
    /// First Piola-Kirchhoff stress DW(F) = F (2 mu E + lambda tr(E) Id).
    Mat3 stress(const Mat3& F) const;
    /// Directional derivative of the stress, dDW(F)[H].
    Mat3 stress_tangent(const Mat3& F, const Mat3& H) const;

    /// Q3(F) = D^2 W(Id)(F,F) = 2 mu |sym F|^2 + lambda (tr F)^2.
    Real q3(const Mat3& F) const;
    /// L3 F = 2 mu sym F + lambda tr(F) Id, so Q3(F) = L3 F : F.
    Mat3 l3_apply(const Mat3& F) const;
};

/// The relaxed tangential form Q2(x,G) = min{ Q3(Ft) : (Ft - F)_tan = 0 }
/// and its operator L2. For the isotropic model the minimum over the three
/// free normal components has the closed form
///   Q2(G) = 2 mu |sym G|^2 + (2 mu lambda / (2 mu + lambda)) tr(sym G)^2,
/// independent of the surface point; the point argument stays in the API so
/// anisotropic materials can slot in later.
struct QuadraticForms {
    MaterialModel model;

    explicit QuadraticForms(const MaterialModel& m) : model(m) {}

    Real lambda_star() const {
        return 2.0 * model.mu * model.lambda / (2.0 * model.mu + model.lambda);
    }

    Real q2(const Vec3& x, const Mat2& G) const;
    Mat2 l2_apply(const Vec3& x, const Mat2& G) const;

    /// The minimizing 3x3 extension of G over the normal components:
    /// shear components vanish, the (m,m) entry is -lambda/(lambda+2mu) tr(sym G).
    Mat3 minimizing_extension(const Vec3& x, const Mat2& G) const;

    Real q2(const Mat2& G) const { return q2(Vec3::Zero(), G); }
    Mat2 l2_apply(const Mat2& G) const { return l2_apply(Vec3::Zero(), G); }
};

/// dist(F, SO(3)) via the singular values of F (rotation-aware: reflections
/// are far from SO(3)).
Real distance_to_rotations(const Mat3& F);

/// Polar-decomposition rotation factor of F (det-corrected SVD); requires
/// F nonsingular enough that the factor is well defined.
Mat3 polar_rotation(const Mat3& F);

} // namespace shellvk

#endif
