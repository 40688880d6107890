#pragma once

#include "memflow/assembly.hpp"
#include "memflow/discrete_calculus.hpp"
#include "memflow/solver.hpp"
#include "memflow/state.hpp"

namespace memflow {

/// Zeroes the interface rows of a phase-local nodal field; under the lumped
/// products this is the orthogonal projection onto fields vanishing on the
/// interface.
MatX3d interior_projection(const SurfaceOperators& ops, int phase, const MatX3d& field);

/// a(zeta, eta) = lumped pairing of Q zeta with the interior projection of
/// eta over one phase; symmetric and positive semidefinite.
double a_form(const SurfaceOperators& ops, int phase, const MatX3d& zeta, const MatX3d& eta);

/// The 3x3 conservation system: matrix entries from the a-forms of the
/// vertex normals and the given curvature fields, unknowns
/// (-lambda^V, lambda^A_1, lambda^A_2).
Mat3d multiplier_matrix(const SurfaceOperators& ops, const std::array<MatX3d, 2>& kappa);

/// Solves the (sub)system for the requested conservation mode; rows/columns
/// of inactive constraints are dropped. Throws when the active block is not
/// positive definite (linearly dependent projected normals/curvatures).
Vec3d solve_multiplier_system(const Mat3d& M, const Vec3d& b, ConserveMode mode);

/// Right-hand side of the conservation system for given velocity and fields.
/// `velocity` is a global K x 3 field; fields are phase/interface nodal.
Vec3d multiplier_rhs(const SurfaceOperators& ops, const BlockSystem& sys,
                     const MatX3d& velocity, const std::array<MatX3d, 2>& Y,
                     const std::array<MatX3d, 2>& kappa, const std::array<MatX3d, 2>& m);

/// Multipliers of the explicit scheme, evaluated from the previous-step
/// velocity and the time-level-m fields.
Vec3d explicit_multipliers(const SurfaceOperators& ops, const BlockSystem& sys,
                           const DiscreteState& state, ConserveMode mode);

struct ImplicitResult {
    StepSolution sol;
    std::array<MatX3d, 2> kappa_new;
    Vec3d lambda = Vec3d::Zero();
    int passes = 0;
    int krylov_total = 0;
};

/// Fixed-point iteration with implicit multipliers: repeated solves of the
/// already-assembled system with updated multiplier terms on the right-hand
/// side, until the multiplier increments drop below the tolerance. No
/// matrices are reassembled between passes.
ImplicitResult implicit_multiplier_step(const SurfaceOperators& ops, const BlockSystem& sys,
                                        const CoupledSolver& solver, const PhaseParams& params,
                                        const DiscreteState& state);

/// Nodal curvature update from the solved side-constraint multiplier.
std::array<MatX3d, 2> updated_curvature(const SurfaceOperators& ops, const PhaseParams& params,
                                        const std::array<MatX3d, 2>& Y_new);

} // namespace memflow
