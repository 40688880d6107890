#pragma once

#include <string>
#include <vector>

#include "memflow/surface_mesh.hpp"
#include "memflow/types.hpp"

namespace memflow {

/// Mesh source of a run: a file, or a named generator with its parameters.
struct MeshSource {
    std::string file;      ///< OFF path; empty selects the generator
    std::string generator = "twocap"; ///< sphere | twocap | dumbbell | torus-caps
    int level = 3;
    double radius = 1.0;
    double ratio = 1.0;   ///< phase-1 to phase-2 area ratio (twocap)
    int islands = 0;      ///< >0: phase 1 as this many cap islands (twocap)
    double flatten = 1.0; ///< z scaling applied after phase assignment (twocap)
    double height = 2.8, width = 1.5, neck = 0.45; ///< dumbbell profile
    double split_z = 0.0;                          ///< dumbbell phase split plane
    double ring_radius = 2.0, tube_radius = 1.0;   ///< torus-caps
};

TwoPhaseSurfaceMesh generate_mesh(const MeshSource& src);

/// Whole sphere, one phase, empty interface (refined octahedron projection).
TwoPhaseSurfaceMesh gen_sphere(int level, double radius = 1.0);

/// Sphere split into two caps with the requested area ratio; ratio 1 uses the
/// octahedral equator, other ratios a latitude ring. With islands > 0 phase 1
/// becomes that many circular caps of matching total area. flatten scales z
/// after the phase assignment.
TwoPhaseSurfaceMesh gen_twocap(int level, double ratio, int islands = 0, double flatten = 1.0);

TwoPhaseSurfaceMesh gen_dumbbell(int level, double height, double width, double neck,
                                 double split_z);

/// Outer shell of a torus closed by two spherical caps; the caps are phase 1.
TwoPhaseSurfaceMesh gen_torus_caps(int level, double ring_radius, double tube_radius);

/// Surface-of-revolution builder: profile points (rho_j, z_j) from the south
/// pole (rho = 0) to the north pole (rho = 0), one phase label per profile
/// segment, n_phi segments around the axis.
struct ProfilePoint {
    double rho, z;
};
TwoPhaseSurfaceMesh revolve_profile(const std::vector<ProfilePoint>& profile,
                                    const std::vector<int>& segment_phase, int n_phi);

} // namespace memflow
