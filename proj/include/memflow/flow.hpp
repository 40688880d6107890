#pragma once

#include <optional>
#include <vector>

#include "memflow/assembly.hpp"
#include "memflow/discrete_calculus.hpp"
#include "memflow/multipliers.hpp"
#include "memflow/solver.hpp"
#include "memflow/state.hpp"
#include "memflow/surface_mesh.hpp"

namespace memflow {

struct SimulationConfig; // io.hpp

/// Least-squares sphere through a point set; valid when the relative radial
/// residual is tiny.
struct SphereFit {
    Vec3d center = Vec3d::Zero();
    double radius = 0.0;
    double residual = 0.0;
    bool ok = false;
};
SphereFit fit_sphere(const MatX3d& points);

/// Initial data: weak conormals from the edge conormals, nodal curvature
/// either from the sphere formula (when a phase lies on a sphere) or from
/// the lumped curvature identity, and the curve curvature of the interface
/// polygon.
DiscreteState initialize_state(const TwoPhaseSurfaceMesh& mesh, const SurfaceOperators& ops,
                               const PhaseParams& params);

/// Discrete energy of a time level: bending against the face normals of the
/// carrying surface, the Gaussian-rigidity boundary term with the Euler
/// characteristic offset, and the line energy.
double discrete_energy(const SurfaceOperators& ops, const PhaseParams& params,
                       const std::array<MatX3d, 2>& kappa, const std::array<MatX3d, 2>& m,
                       const MatX3d& kappa_gamma);

/// Largest interior tangential residual of the position side constraint,
/// relative to the phase H1 norm of the new positions. Vanishes (to solver
/// tolerance) for theta = 0.
double conformality_residual(const SurfaceOperators& ops, const MatX3d& X_new);

struct TimeStepResult {
    DiscreteState state;
    TwoPhaseSurfaceMesh mesh;
    DiagnosticsRecord diag;
    SolveReport solve;
    double conformality = 0.0;
};

TimeStepResult time_step(const DiscreteState& state, const TwoPhaseSurfaceMesh& mesh,
                         const PhaseParams& params, const SolverConfig& solver_cfg);

DiagnosticsRecord initial_diagnostics(const TwoPhaseSurfaceMesh& mesh,
                                      const SurfaceOperators& ops, const PhaseParams& params,
                                      const DiscreteState& state);

/// Full driver: mesh from file or generator, initialization, time loop,
/// snapshots and the diagnostics log. Partial outputs are kept on failure.
std::vector<DiagnosticsRecord> run(const SimulationConfig& config);

} // namespace memflow
