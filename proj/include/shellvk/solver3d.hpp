#ifndef SHELLVK_SOLVER3D_HPP
#define SHELLVK_SOLVER3D_HPP

#include "shellvk/fields.hpp"
#include "shellvk/geometry.hpp"
#include "shellvk/material.hpp"
#include "shellvk/parallel.hpp"
#include "shellvk/scaling.hpp"
#include "shellvk/types.hpp"

#include <array>
#include <optional>
#include <vector>

namespace shellvk {

/// Rescaled nodal deformation y^h on S^{h0} and its velocity; immutable
/// snapshot passed between steps.
struct State3D {
    VecX y, v; // 3 * num_nodes, ambient components
    Real t = 0;
    ScalingLaw scaling;
    bool energy_flagged = false;
};

struct StepReport3D {
    int newton_iters = 0;
    int halvings = 0;
    Real energy_before = 0, energy_after = 0;
    Real work = 0;  // forcing work over the step
    Real slack = 0; // E_after - E_before - work
};

struct Energy3D {
    Real kinetic = 0, elastic = 0;
    Real total() const { return kinetic + elastic; }
};

struct Solver3DOptions {
    Real newton_tol_abs = 1e-10;
    Real newton_tol_rel = 1e-12;
    int newton_max_iter = 30;
    Real tol_energy = -1.0; // absolute slack tolerance; < 0 disables flagging
    bool clamp_lateral = true; // disabled only by test-only free configurations
    Exec exec = Exec::Parallel;
};

/// Analytic initial-data profiles, assembled through the recovery-sequence
/// structure of the von Karman regime:
///   y(0) = rest + eps [V + (s h/h0) A m]            (bending, eps = sqrt(e_h)/h)
///        + sqrt(e_h) u_mem                          (membrane corrector)
///        + (h sqrt(e_h)/h0) c0 s m                  (normal-strain relaxation)
///   v(0) = eps * velocity profile,
/// with A the skew gradient field of the bending profile and c0 the
/// relaxation coefficient -lambda/(lambda+2mu) tr(B_mem - (k_h/2) A^2)_tan.
/// The h-dependent through-thickness factors keep the scaled initial energy
/// O(e_h) uniformly in h; all shipped profiles vanish on the lateral boundary.
struct InitialData3D {
    ProfileSpec bending;
    ProfileSpec velocity;
    ProfileSpec membrane;        // optional corrector, O(sqrt(e_h))
    bool with_relaxation = false;
    /// Statically relax the through-thickness column modes (zero average,
    /// zero first moment) after the lift. Removes the stiff-mode content the
    /// interpolated ansatz cannot avoid while preserving the scaled averages
    /// and moments exactly.
    bool prepared = true;
};

/// Implicit-midpoint integrator for the rescaled elastodynamic weak form on
/// the extruded mesh: clamped lateral boundary, traction-free faces
/// (natural), quadrature weight det F(s h/h0) and gradients reconstructed
/// through the discrete rest configuration.
class Solver3D {
  public:
    Solver3D(const ShellMesh& mesh, const MaterialModel& material, const ScalingLaw& scaling,
             const Solver3DOptions& opts = {});

    const ShellMesh& mesh() const { return *mesh_; }
    const MaterialModel& material() const { return material_; }
    const ScalingLaw& scaling() const { return scaling_; }
    const Solver3DOptions& options() const { return opts_; }

    int num_dofs() const { return 3 * mesh_->num_nodes(); }
    const VecX& rest() const { return rest_; }

    State3D rest_state() const;
    State3D init_state(const InitialData3D& data) const;

    /// Minimizes the elastic energy over nodal column modes with vanishing
    /// through-thickness average and first moment; the convergence witnesses
    /// V^h and zeta^h of the result coincide with those of the input.
    State3D equilibrate_thickness_modes(const State3D& state) const;

    /// Rescaled deformation gradient at a quadrature point of an element.
    Mat3 hgradient(const State3D& state, int element, int cq, int sq) const;
    /// Same reconstruction at arbitrary local coordinates (u, v, w) in [0,1]^3
    /// of an element; the diagnostics sample gradients at in-plane cell
    /// centers, where trilinear gradients superconverge.
    Mat3 hgradient_local(const State3D& state, int element, Real u, Real v, Real w) const;

    /// Static Galerkin residual of the rescaled weak form (internal force
    /// minus load) at time t; rows of clamped DOFs zeroed.
    VecX assemble_residual(const State3D& state, const Forcing& forcing) const;

    Energy3D energy(const State3D& state) const;
    /// Elastic energy over e_h (the scaled-energy boundedness diagnostic).
    Real energy_ratio(const State3D& state) const;

    State3D step(const State3D& state, Real dt, const Forcing& forcing,
                 StepReport3D* report = nullptr) const;

    /// Forcing load vector at time t (includes the h sqrt(e_h) factor).
    const VecX& set_forcing(const Forcing& forcing) const;

    bool is_clamped_node(int node) const { return clamped_[node]; }
    void validate(const State3D& state) const;

  private:
    struct ElemQP {
        Mat3 ginv;        // inverse of the discrete rest Jacobian (hgradient)
        Real weight;      // full weight: gauss x measure x area x det F(s h/h0)
        std::array<Vec3, 8> b; // reconstructed basis gradients
    };

    void build_caches();
    void element_kernel(int e, const VecX& y, bool want_tangent, VecX* r_e,
                        MatX* k_e) const;
    VecX internal_force(const VecX& y) const;
    SpMat tangent_matrix(const VecX& y) const;
    void do_step(const State3D& state, Real dt, const Forcing& forcing, State3D& out,
                 StepReport3D& rep) const;

    const ShellMesh* mesh_;
    MaterialModel material_;
    ScalingLaw scaling_;
    Solver3DOptions opts_;

    VecX rest_;
    std::vector<bool> clamped_; // per node
    std::vector<int> full2free_;
    std::vector<int> free2full_;
    int n_free_ = 0;

    std::vector<ElemQP> qp_; // element * qp_per_element + (cq * nq + sq)
    int qp_per_element_ = 0;

    SpMat mass_free_;
    mutable VecX load0_;        // unit-time-factor load, free-size
    mutable const Forcing* load_forcing_ = nullptr;
};

} // namespace shellvk

#endif
