#pragma once

#include <array>
#include <vector>

#include "memflow/state.hpp"
#include "memflow/surface_mesh.hpp"
#include "memflow/types.hpp"

namespace memflow {

/// Nodal fields steering the vertex projections: theta_h vanishes on the
/// interface and equals theta elsewhere, theta_star is 1 on the interface and
/// theta elsewhere.
struct ThetaFields {
    VecXd theta_h;    ///< per global vertex
    VecXd theta_star; ///< per global vertex
    double theta = 0.0;
};

ThetaFields build_theta_fields(const TwoPhaseSurfaceMesh& mesh, double theta);

/// Per-vertex 3x3 projection operators of one phase, for both the theta and
/// the theta_star field.
struct VertexQOperator {
    std::vector<Mat3d> q;      ///< rows follow phase_vertices[i]
    std::vector<Mat3d> q_star;
};

std::array<VertexQOperator, 2> build_q_operators(const TwoPhaseSurfaceMesh& mesh,
                                                 const VertexNormalField& normals,
                                                 const ThetaFields& fields);

/// Everything the assembly needs about one surface configuration: face
/// geometry, lumped masses, vertex normals, projections, stiffness matrices
/// and the interface curve geometry. Immutable once built.
struct SurfaceOperators {
    // Faces.
    VecXd face_area;
    MatX3d face_normal;
    std::vector<Mat3d> face_grad; ///< column c = gradient of local node c

    // Lumped vertex masses.
    std::array<VecXd, 2> mass_phase; ///< per phase-local vertex
    VecXd mass;                      ///< global, both phases

    VertexNormalField normals;
    ThetaFields theta;
    std::array<VertexQOperator, 2> Q;

    /// Scalar stiffness of each phase over global vertex indices (entries
    /// only between vertices of the phase).
    std::array<SpMat, 2> stiffness;

    // Interface curve.
    VecXd edge_length;   ///< per gamma edge
    MatX3d edge_tangent; ///< unit, oriented along the loops
    VecXd gamma_mass;    ///< lumped curve mass per gamma vertex
    SpMat gamma_stiffness; ///< scalar, over gamma-local indices

    const TwoPhaseSurfaceMesh* mesh = nullptr;

    double gamma_length() const { return edge_length.sum(); }
};

SurfaceOperators build_operators(const TwoPhaseSurfaceMesh& mesh, double theta);

/// Mass-lumped inner product of nodal vector fields over one phase.
/// Fields are indexed by phase-local vertex.
double lumped_inner_product(const SurfaceOperators& ops, int phase, const MatX3d& f,
                            const MatX3d& g);

/// Mass-lumped inner product of nodal vector fields over the interface curve.
double lumped_inner_product_gamma(const SurfaceOperators& ops, const MatX3d& f,
                                  const MatX3d& g);

/// Lumped diagonal of the curve mass matrix (half-sum of adjacent edge
/// lengths per interface vertex).
VecXd curve_mass_matrix(const SurfaceOperators& ops);

/// Restriction of a global nodal field to the phase-local vertex list.
MatX3d restrict_to_phase(const SurfaceOperators& ops, int phase, const MatX3d& global_field);

/// Scatter of a phase-local field into a global-size field (zero elsewhere).
MatX3d extend_from_phase(const SurfaceOperators& ops, int phase, const MatX3d& phase_field);

} // namespace memflow
