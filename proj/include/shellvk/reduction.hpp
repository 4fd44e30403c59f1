#ifndef SHELLVK_REDUCTION_HPP
#define SHELLVK_REDUCTION_HPP

#include "shellvk/solver2d.hpp"
#include "shellvk/solver3d.hpp"
#include "shellvk/types.hpp"

#include <string>
#include <vector>

namespace shellvk {

/// Convergence witnesses of a 3D state: the scaled average displacement
/// V^h and its rate, the scaled first moment zeta^h/sqrt(e_h), the membrane
/// strain proxy (1/h) sym(grad V^h)_tan, the polar-decomposition rotation
/// surrogate R^h with the induced strain/stress moments, the scaled-energy
/// ratio and the H^1 distance of y^h to the midsurface projection.
/// Displacement-type fields live on the chart nodes; the rotation and
/// stress-moment fields are sampled at in-plane cell centers, where the
/// trilinear gradients superconverge (standard recovery points).
struct DiagnosticsSample {
    Real t = 0;
    MatX Vh, Vh_t, zeta_scaled; // num_chart_nodes x 3
    std::vector<Mat2> strain_h; // per chart node
    std::vector<Mat3> Rh;       // per chart cell
    std::vector<Mat2> Ebar_tan, Ehat_tan; // per chart cell
    Real energy_ratio = 0;
    Real rh_identity_dist = 0; // ||R^h - Id||_{L2(S)}
    Real y_pi_h1 = 0;          // ||y^h - pi||_{H1(S^{h0})}
};

/// Limit-model targets sampled on the same chart grid.
struct ReferenceSample {
    Real t = 0;
    MatX V, Vt, Am; // num_chart_nodes x 3 ; Am scaled by h0/12 happens in distances
    std::vector<Mat2> B;                     // per chart node
    std::vector<Mat2> Sigma_tan, Ehat_tan;   // per cell: L2(B-(sqrt(k)/2)A^2), (h0/12) L2(bend)
};

class Reduction {
  public:
    explicit Reduction(const Solver3D& solver);

    const Solver3D& solver() const { return *solver_; }

    MatX scaled_average(const State3D& s) const;
    MatX scaled_average_rate(const State3D& s) const;
    /// Returns the scaled moment zeta^h / sqrt(e_h); the unscaled moment is
    /// sqrt(e_h) times it.
    MatX first_moment_scaled(const State3D& s) const;
    std::vector<Mat2> scaled_strain(const MatX& Vh) const;

    struct RotationData {
        std::vector<Mat3> Rh;
        std::vector<Mat2> Ebar_tan, Ehat_tan;
        Real rh_identity_dist = 0;
    };
    RotationData rotation_surrogate(const State3D& s) const;

    Real y_pi_h1(const State3D& s) const;

    DiagnosticsSample sample(const State3D& s) const;
    ReferenceSample reference(const Solver2D& lim, const State2D& s) const;

    /// Weighted L2 distances between a diagnostics sample and its targets.
    struct Distances {
        Real dV = 0, dVt = 0, dzeta = 0, dstrain = 0, dEbar = 0, dEhat = 0;
    };
    Distances distances(const DiagnosticsSample& d, const ReferenceSample& r) const;

    Real node_weight(int i, int j) const;

  private:
    const Solver3D* solver_;
    const ShellMesh* mesh_;
};

/// Lift of a limit state to a 3D state through the recovery-sequence ansatz
/// (isometry + rotation lift + membrane corrector + normal-strain relaxation
/// correctors). Not clamped-compatible in general: intended for diagnostics,
/// not for time stepping.
State3D lift_state(const Solver2D& lim, const State2D& s2, const Solver3D& s3);

/// Per-thickness row of a convergence report.
struct ReportRow {
    Real h = 0, e_h = 0;
    Real sup_energy_ratio = 0;
    std::vector<Real> times;
    std::vector<Reduction::Distances> dist; // per time
    Real y_pi_h1_final = 0;
    Real rh_dist_final = 0;
};

struct TrendVerdict {
    std::string metric;
    bool strictly_decreasing = true;
    bool non_increasing = true;
    std::vector<Real> ratios; // successive value ratios at the last time
};

/// Cross-thickness trend report: rows sorted by decreasing h, per-metric
/// monotonicity verdicts at each sampled time, and the boundedness check of
/// sup_t I^h/e^h (successive ratios within [1/2, 2]).
struct ConvergenceReport {
    std::vector<ReportRow> rows;
    std::vector<TrendVerdict> verdicts;
    bool energy_ratio_bounded = true;
    std::vector<Real> energy_ratio_ratios;
    bool converged = true; // all monotonicity verdicts hold
    std::string orientation_note;
};

ConvergenceReport build_report(std::vector<ReportRow> rows, const std::string& orientation_note);

} // namespace shellvk

#endif
