#ifndef SHELLVK_ORACLES_HPP
#define SHELLVK_ORACLES_HPP

#include "shellvk/material.hpp"
#include "shellvk/solver2d.hpp"
#include "shellvk/types.hpp"

#include <random>

namespace shellvk {
namespace oracles {

/// Deterministic RNG used by the invariant suites.
using Rng = std::mt19937_64;

Mat3 random_matrix(Rng& rng, Real scale = 1.0);
Mat3 random_rotation(Rng& rng);
Mat2 random_matrix2(Rng& rng, Real scale = 1.0);

/// Central finite differences of the energy density: reference for DW.
Mat3 fd_stress(const MaterialModel& m, const Mat3& F, Real step = 1e-6);
/// Finite-difference D^2 W(Id)(F,F): reference for q3.
Real fd_q3(const MaterialModel& m, const Mat3& F, Real step = 1e-4);

/// Brute-force relaxation of Q3 over the three free normal components:
/// coarse grid scan followed by Newton polish with finite-difference
/// derivatives of z -> q3(embed(G, z)). Independent of the closed form and
/// of the exact linear-solve minimizer.
Real brute_force_q2(const MaterialModel& m, const Mat2& G);

/// Fitted local coercivity constant: min W(F)/dist^2(F,SO(3)) over random
/// samples with dist <= 0.1 and det F > 0.
Real coercivity_constant(const MaterialModel& m, Rng& rng, int samples);

/// Independently coded classical dynamic von Karman plate assembly, using
/// direct flat-chart formulas (Hessians of the deflection, plane-strain
/// gradients) on the same DOF layout as Solver2D. Only valid for plate
/// charts.
struct PlateOperators {
    SpMat mass, bending, penalty, membrane_gram;
};
PlateOperators classical_plate_operators(const Solver2D& solver);
VecX classical_plate_membrane_rhs(const Solver2D& solver, const VecX& vdofs);
VecX classical_plate_coupling_force(const Solver2D& solver, const VecX& vdofs,
                                    const VecX& um);

/// Max entrywise difference |A - B| relative to the largest entry of A.
Real matrix_distance(const SpMat& a, const SpMat& b);

} // namespace oracles
} // namespace shellvk

#endif
