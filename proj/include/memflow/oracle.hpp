#pragma once

#include <utility>
#include <vector>

#include "memflow/assembly.hpp"
#include "memflow/discrete_calculus.hpp"
#include "memflow/state.hpp"
#include "memflow/surface_mesh.hpp"

namespace memflow {

/// Radius evolution of a sphere under the bending flow, reduced to a scalar
/// ODE. R' = alpha/2 (k - kbar)^2 k - alpha (k - kbar) 2/R^2 with k = -2/R;
/// under volume or area conservation the sphere is stationary.
struct SphereOdeResult {
    std::vector<double> t;
    std::vector<double> R;
    bool truncated = false;

    double final_radius() const { return R.back(); }
};

SphereOdeResult sphere_radius_ode(double alpha, double kappa_bar, ConserveMode mode, double R0,
                                  double t_end, double dt_ode);

/// Independent cross-check of the reduction: steepest descent of the sphere
/// energy E(R), with E'(R) approximated by central differences.
SphereOdeResult sphere_radius_ode_energy_route(double alpha, double kappa_bar,
                                               ConserveMode mode, double R0, double t_end,
                                               double dt_ode);

/// Sphere bending energy as a function of the radius.
double sphere_energy(double alpha, double kappa_bar, double R);

/// Dense LU solve of the reduced coupled operator (reference for the sparse
/// paths; desk-scale systems only).
VecXd dense_reference_solve(const BlockSystem& sys, const VecXd& rhs);

/// Per-phase defect of the discrete total-curvature identity: the lumped
/// curve pairing of the curvature with the weak conormal, plus 2 pi times the
/// Euler characteristic, minus the analytically known total Gaussian
/// curvature of the phase.
std::array<double, 2> gauss_bonnet_residual(const TwoPhaseSurfaceMesh& mesh,
                                            const SurfaceOperators& ops,
                                            const DiscreteState& state,
                                            const std::array<double, 2>& reference_total);

/// Monolithic assembly of the step system a uniform-data C1 run reduces to:
/// a closed-surface scheme in the glued unknowns (Y, dX) with the interface
/// vertices keeping their per-phase masses, normals and junction-adjusted
/// projection weights. Reference for the coupled block machinery.
struct ClosedReferenceSystem {
    SpMat A;
    VecXd rhs;
    Index K = 0; ///< dofs are [Y (3K) | dX (3K)]
};

ClosedReferenceSystem closed_reference_system(const SurfaceOperators& ops,
                                              const PhaseParams& params,
                                              const DiscreteState& state, double dt);

/// One step of the reference scheme; returns (dX, Y).
std::pair<MatX3d, MatX3d> closed_reference_step(const SurfaceOperators& ops,
                                                const PhaseParams& params,
                                                const DiscreteState& state, double dt);

} // namespace memflow
