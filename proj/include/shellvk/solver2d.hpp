#ifndef SHELLVK_SOLVER2D_HPP
#define SHELLVK_SOLVER2D_HPP

#include "shellvk/fields.hpp"
#include "shellvk/geometry.hpp"
#include "shellvk/kinematics.hpp"
#include "shellvk/material.hpp"
#include "shellvk/parallel.hpp"
#include "shellvk/types.hpp"

#include <Eigen/SparseLU>

#include <array>
#include <vector>

namespace shellvk {

/// Limit state: C^1 displacement V (tensor-product cubic Hermite per ambient
/// component: value, d1, d2, d12 per node), its time derivative, and the
/// membrane displacement u_m whose tangential sym-gradient is the membrane
/// strain B (bilinear, 2 frame components per node).
struct State2D {
    VecX V, Vt; // Hermite DOFs
    VecX um;    // membrane generator DOFs; B = sym(grad u_m)_tan
    Real t = 0;
    Real kappa = 0;
};

struct Energy2D {
    Real kinetic = 0, bending = 0, membrane = 0, penalty = 0;
    /// The conserved functional of the kappa = 0 limit flow.
    Real kappa0_total() const { return kinetic + bending; }
    Real total() const { return kinetic + bending + membrane + penalty; }
};

struct StepReport2D {
    int newton_iters = 0;
    Real residual_B = 0;          // normalized stationarity residual over the strain space
    Real constraint_residual = 0; // L2 norm of sym(grad V)_tan
    Energy2D energy;
};

struct Solver2DOptions {
    Real eps_iso = 1e-6;   // isometry penalty weight is 1/eps_iso
    Real tol_B = 1e-9;
    Real newton_tol_abs = 1e-11;
    Real newton_tol_rel = 1e-13;
    int newton_max_iter = 30;
    int nq = 3;
    Exec exec = Exec::Parallel;
};

/// Implicit-midpoint integrator for the dynamic von Karman shell system:
///   <V_tt, Vt> + (1/12) int L2(bend(V)) : bend(Vt~) + (1/eps) penalty
///     = <f, Vt~> + sqrt(kappa) int L2((B - (sqrt(kappa)/2) A^2)_tan) : (A At~)_tan,
/// with B the L2-weighted projection of (sqrt(kappa)/2)(A^2)_tan onto the
/// discrete finite-strain space, recomputed at the midpoint configuration.
class Solver2D {
  public:
    Solver2D(const Chart& chart, int n1, int n2, const MaterialModel& material, Real kappa,
             const Solver2DOptions& opts = {});

    const Chart& chart() const { return grid_.chart(); }
    const SurfaceGrid& grid() const { return grid_; }
    Real kappa() const { return kappa_; }
    const Solver2DOptions& options() const { return opts_; }
    const QuadraticForms& forms() const { return forms_; }

    int n_nodes() const { return grid_.num_nodes(); }
    int n_vdofs() const { return 12 * n_nodes(); }
    int n_mdofs() const { return 2 * n_nodes(); }
    int vdof(int node, int comp, int mode) const { return (node * 3 + comp) * 4 + mode; }

    State2D zero_state() const;
    /// Hermite interpolation of analytic profiles (exact plate isometries for
    /// normal profiles on the plate); B initialized by membrane projection.
    State2D init_limit(const ProfileSpec& w_bar, const ProfileSpec& w_hat) const;
    /// Penalized H-projection of a raw profile onto the near-isometry space:
    /// (M + (1/eps_proj) P) V = M I_h(raw); used on curved charts.
    State2D init_limit_projected(const ProfileSpec& raw, const ProfileSpec& w_hat,
                                 Real eps_proj) const;

    // --- field evaluation --------------------------------------------------
    VectorJet2 eval_jet(const VecX& vdofs, const Vec2& xi) const;
    Vec3 eval_value(const VecX& vdofs, const Vec2& xi) const { return eval_jet(vdofs, xi).v; }
    /// Membrane strain of u_m at a parameter point.
    Mat2 eval_B(const VecX& um, const Vec2& xi) const;
    Vec3 eval_um_value(const VecX& um, const Vec2& xi) const;

    // --- forms and operators ------------------------------------------------
    /// Symmetric bending bilinear form (1/12) int L2(bend(Va)) : bend(Vb).
    Real bending_form(const VecX& va, const VecX& vb) const;
    /// Membrane projection: u_m solving the stationarity condition for
    /// B = proj[(sqrt(kappa)/2) (A^2)_tan] over the discrete strain space.
    VecX project_membrane(const VecX& vdofs) const;
    /// Normalized stationarity residual max_i |<L2(B - k/2 A^2), s_i>| / |s_i|.
    Real residual_B(const VecX& um, const VecX& vdofs) const;
    /// L2 norm of the isometry defect sym(grad V)_tan.
    Real constraint_residual(const VecX& vdofs) const;

    Energy2D energy(const State2D& s) const;
    State2D step_vk(const State2D& s, Real dt, const Forcing& f,
                    StepReport2D* report = nullptr) const;
    /// Stepping with an arbitrary time-dependent load vector (manufactured
    /// solutions); `load_at` returns the assembled full-size load at time t.
    State2D step_vk(const State2D& s, Real dt, const std::function<VecX(Real)>& load_at,
                    StepReport2D* report = nullptr) const;

    // Assembled operators (full DOF numbering), exposed for the plate
    // cross-checks and the lift machinery.
    const SpMat& mass_matrix() const { return M_full_; }
    const SpMat& bending_matrix() const { return K_full_; }
    const SpMat& penalty_matrix() const { return P_full_; }
    const SpMat& membrane_gram() const { return Km_; }
    VecX membrane_rhs(const VecX& vdofs) const;
    VecX coupling_force(const VecX& vdofs, const VecX& um) const; // full size

    VecX load_vector(const Forcing& f, Real t) const; // full size
    /// Quadrature-consistent load of an arbitrary surface field (used by the
    /// manufactured-solution studies).
    VecX assemble_load(const std::function<Vec3(const Vec2&)>& field) const;

    VecX interpolate(const ProfileSpec& p) const; // Hermite DOFs of a profile
    bool is_boundary_node(int i, int j) const {
        return i == 0 || i == grid_.n1() || j == 0 || j == grid_.n2();
    }

  private:
    struct QPBasis {
        // Per local V-DOF (48): kinematics caches.
        std::array<Vec3, 48> val;
        std::array<Mat3, 48> A;
        std::array<Mat2, 48> bend;
        std::array<Mat2, 48> symtan;
        // Per local membrane DOF (8): value and strain caches.
        std::array<Vec3, 8> mval;
        std::array<Mat2, 8> mstrain;
    };

    void build();
    void local_vdofs(int ei, int ej, std::array<int, 48>& idx) const;
    void local_mdofs(int ei, int ej, std::array<int, 8>& idx) const;
    VectorJet2 jet_at(const VecX& vdofs, int ei, int ej, Real u, Real v) const;
    VecX solve_membrane(const VecX& rhs) const;

    SurfaceGrid grid_;
    MaterialModel material_;
    QuadraticForms forms_;
    Real kappa_;
    Solver2DOptions opts_;

    std::vector<QPBasis> qp_basis_; // cell * qp_per_cell + q
    std::vector<Real> mbasis_norm_; // L2 norms of membrane basis strains

    std::vector<int> v_full2free_, v_free2full_;
    int nv_free_ = 0;

    SpMat M_full_, K_full_, P_full_;
    SpMat M_free_, K_free_, P_free_;
    SpMat Km_, Mu_;
    Eigen::SparseLU<SpMat> mem_lu_; // factorization of Km + delta Mu
    Real mem_delta_ = 0;

    // The linear part of the midpoint tangent is constant; its factorization
    // is cached per time-step size.
    mutable Real cached_dt_ = -1;
    mutable Eigen::SparseLU<SpMat> step_lu_;
};

} // namespace shellvk

#endif
