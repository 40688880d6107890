#pragma once

#include <array>

#include "memflow/discrete_calculus.hpp"
#include "memflow/state.hpp"
#include "memflow/surface_mesh.hpp"
#include "memflow/types.hpp"

namespace memflow {

/// Scalar-dof layout of the coupled step system. Unknown blocks, in order:
/// Y_1, Y_2, position update dX (global), curve curvature kg, weak conormals
/// m_1, m_2, and (C1 only) the junction multiplier Phi. Equation blocks:
/// flow rows per global vertex (interface rows carry both phase
/// contributions), the side-constraint rows per phase, the lumped junction
/// rows per phase, the curve curvature rows, and (C1 only) the conormal
/// matching rows.
struct DofMap {
    Index K1 = 0, K2 = 0, K = 0, Kg = 0;
    bool c1 = false;

    Index oY[2] = {0, 0}, oX = 0, oKG = 0, oM[2] = {0, 0}, oPhi = 0;
    Index rFlow = 0, rSide[2] = {0, 0}, rE[2] = {0, 0}, rC = 0, rD = 0;
    Index n = 0;

    static DofMap build(const MeshTopology& topo, bool c1);

    Index y(int i, Index kl, int c) const { return oY[i] + 3 * kl + c; }
    Index x(Index k, int c) const { return oX + 3 * k + c; }
    Index kg(Index g, int c) const { return oKG + 3 * g + c; }
    Index m(int i, Index g, int c) const { return oM[i] + 3 * g + c; }
    Index phi(Index g, int c) const { return oPhi + 3 * g + c; }

    Index row_flow(Index k, int c) const { return rFlow + 3 * k + c; }
    Index row_side(int i, Index kl, int c) const { return rSide[i] + 3 * kl + c; }
    Index row_e(int i, Index g, int c) const { return rE[i] + 3 * g + c; }
    Index row_c(Index g, int c) const { return rC + 3 * g + c; }
    Index row_d(Index g, int c) const { return rD + 3 * g + c; }
};

/// One phase block over the unknowns (Y_i, dX_i, kg_i, m_i), all indexed
/// phase-locally; the building block of the interface-coupled system and of
/// its preconditioner.
struct PhaseBlock {
    SpMat B;
    VecXd g; ///< right-hand side without multiplier terms
    Index Ki = 0, Kg = 0;

    Index oY() const { return 0; }
    Index oX() const { return 3 * Ki; }
    Index oKG() const { return 6 * Ki; }
    Index oM() const { return 6 * Ki + 3 * Kg; }
    Index size() const { return 6 * Ki + 6 * Kg; }
};

/// The assembled time-level system: the interface-reduced square operator,
/// the explicit forcing split into its reusable pieces, the two phase blocks
/// and (C1 only) the full block operator used for preconditioning.
struct BlockSystem {
    DofMap map;
    SpMat reduced;

    VecXd flow_forcing;                 ///< 3K, explicit forcing, no multiplier terms
    std::array<VecXd, 2> flow_forcing_phase; ///< 3K_i, phase share of the above
    std::array<VecXd, 2> side_rhs;      ///< 3K_i
    VecXd curve_rhs;                    ///< 3Kg
    VecXd vol_vec;                      ///< 3K, lumped vertex-normal pairing
    std::array<VecXd, 2> vol_vec_phase; ///< 3K_i

    std::array<PhaseBlock, 2> phase;
    SpMat full_block; ///< assembled only when C1 = 1

    /// Preconditioner variants of the blocks: the interface line-tension and
    /// dissipation rows carry mass-proportional shares instead of the
    /// half-and-half split, matching the residual transfer weights.
    std::array<SpMat, 2> precond_phase;
    SpMat precond_full;

    const SurfaceOperators* ops = nullptr;
    const PhaseParams* params = nullptr;
    double dt = 0.0;
};

PhaseBlock assemble_phase_block(const SurfaceOperators& ops, const PhaseParams& params,
                                const DiscreteState& state, int phase, double dt);

BlockSystem assemble_coupled_system(const SurfaceOperators& ops, const PhaseParams& params,
                                    const DiscreteState& state, double dt);

/// Right-hand side of the reduced system for given multipliers. The area
/// terms are evaluated at `X_area` (the current positions for the explicit
/// scheme, the latest iterate in the implicit fixed point).
VecXd compose_rhs(const BlockSystem& sys, const Vec3d& lambda, const MatX3d& X_area);

/// Splits a reduced solution vector back into nodal fields.
struct StepSolution {
    MatX3d dX;                   ///< K x 3
    std::array<MatX3d, 2> Y;     ///< K_i x 3
    std::array<MatX3d, 2> m;     ///< Kg x 3
    MatX3d kappa_gamma;          ///< Kg x 3
    MatX3d Phi;                  ///< Kg x 3 (zero when C0)
};

StepSolution split_solution(const BlockSystem& sys, const VecXd& u);

// Flattening helpers shared by assembly, solvers and tests.
VecXd flatten(const MatX3d& field);
MatX3d unflatten(const VecXd& v);

} // namespace memflow
