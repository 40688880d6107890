#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "memflow/types.hpp"

namespace memflow {

/// Connectivity of a closed two-phase triangulated surface. Shared between
/// successive time levels; only vertex positions change during a flow.
struct MeshTopology {
    MatX3i triangles;        ///< vertex indices, outward winding
    VecXi tri_phase;         ///< phase label per triangle, 1 or 2
    Index num_vertices = 0;

    /// Global indices of the vertices of each phase, sorted ascending.
    /// Interface vertices belong to both lists.
    std::array<std::vector<Index>, 2> phase_vertices;
    /// Inverse maps, -1 where a vertex does not belong to the phase.
    std::array<VecXi, 2> global_to_phase;

    /// Interface polygon(s): closed loops of global vertex indices, oriented
    /// along the winding of the adjacent phase-1 triangles.
    std::vector<std::vector<Index>> interface_loops;
    std::vector<Index> gamma_vertices; ///< loops concatenated
    VecXi global_to_gamma;             ///< -1 off the interface

    struct GammaEdge {
        Index a, b;   ///< global endpoints, oriented along the loop
        Index ga, gb; ///< interface-local endpoint indices
        Index tri1, tri2; ///< adjacent triangle of phase 1 resp. 2
    };
    std::vector<GammaEdge> gamma_edges;

    std::array<int, 2> euler{0, 0}; ///< per-phase Euler characteristic

    Index K() const { return num_vertices; }
    Index K_phase(int i) const { return static_cast<Index>(phase_vertices[i].size()); }
    Index K_gamma() const { return static_cast<Index>(gamma_vertices.size()); }
    Index J() const { return static_cast<Index>(triangles.rows()); }
    Index J_phase(int i) const;
    bool vertex_on_gamma(Index k) const { return global_to_gamma[k] >= 0; }
};

/// A closed polyhedral surface split into two phases by its interface curve.
struct TwoPhaseSurfaceMesh {
    MatX3d vertices;
    std::shared_ptr<const MeshTopology> topo;

    Index K() const { return topo->K(); }
    Index J() const { return topo->J(); }
    Index K_gamma() const { return topo->K_gamma(); }

    /// Next-step mesh: same connectivity, new positions.
    TwoPhaseSurfaceMesh with_positions(MatX3d X) const { return {std::move(X), topo}; }
};

/// Builds and checks the connectivity: closed orientable surface, every edge
/// shared by exactly two consistently wound triangles, phase labels in {1,2},
/// interface a disjoint union of simple closed loops. Throws on violation.
std::shared_ptr<const MeshTopology>
build_topology(Index num_vertices, const MatX3i& triangles, const VecXi& tri_phase);

/// Assembles a mesh from raw arrays; checks topology and positive face areas.
TwoPhaseSurfaceMesh make_mesh(MatX3d vertices, MatX3i triangles, VecXi tri_phase);

/// Reads an OFF file with a per-face phase label and checks all mesh
/// invariants, including outward orientation (positive enclosed volume).
TwoPhaseSurfaceMesh load_mesh(const std::string& path);

/// Per-face unit normals and the face-area averaged vertex normals, per phase
/// and for the whole surface.
struct VertexNormalField {
    MatX3d face_normals;              ///< per triangle
    std::array<MatX3d, 2> omega_phase; ///< rows follow phase_vertices[i]
    MatX3d omega;                     ///< rows follow global vertex indices
};

/// Computes the normal field; a vanishing averaged normal is a hard error.
VertexNormalField vertex_normals(const TwoPhaseSurfaceMesh& mesh);

double surface_area(const TwoPhaseSurfaceMesh& mesh, int phase); ///< phase 1 or 2
double surface_area(const TwoPhaseSurfaceMesh& mesh);            ///< both phases

/// Divergence-theorem volume; positive for outward orientation.
double enclosed_volume(const MatX3d& vertices, const MatX3i& triangles);
double enclosed_volume(const TwoPhaseSurfaceMesh& mesh);

/// 6 sqrt(pi) vol / area^(3/2); 1 for a round sphere.
double reduced_volume(const TwoPhaseSurfaceMesh& mesh);

int euler_characteristic(const TwoPhaseSurfaceMesh& mesh, int phase);

/// Piecewise-constant outer conormal of the given phase on each interface
/// edge (unit, in the adjacent face plane, pointing out of the phase).
MatX3d edge_conormals(const TwoPhaseSurfaceMesh& mesh, const VertexNormalField& normals,
                      int phase);

/// Nodal weak conormals on the interface: the lumped curve mass-matrix
/// projection of the piecewise-constant edge conormals.
MatX3d weak_conormal_init(const TwoPhaseSurfaceMesh& mesh, const VertexNormalField& normals,
                          int phase);

struct ValidationReport {
    struct Check {
        std::string name;
        bool pass;
        std::string detail;
    };
    std::vector<Check> checks;
    bool all_pass() const;
    std::string summary() const;
};

/// Smallest-to-largest eigenvalue ratio of the covariance of all phase
/// vertex normals; ~0 when the normals fail to span R^3.
double normal_span_ratio(const VertexNormalField& normals);

/// Non-degeneracy checks: positive face areas, nonzero vertex normals, and
/// (when c1_mode with theta == 0) that the phase vertex normals span R^3.
ValidationReport validate(const TwoPhaseSurfaceMesh& mesh, bool c1_mode, double theta);

/// Midpoint 1->4 refinement; phases inherited, no reprojection.
TwoPhaseSurfaceMesh refine_uniform(const TwoPhaseSurfaceMesh& mesh);

} // namespace memflow
