#pragma once

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "memflow/surface_mesh.hpp"
#include "memflow/types.hpp"

namespace memflow::testing {

inline Vec3d random_unit(std::mt19937& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Vec3d v;
    do {
        v = Vec3d(n(rng), n(rng), n(rng));
    } while (v.norm() < 1e-8);
    return v.normalized();
}

inline Vec3d random_vec(std::mt19937& rng, double scale = 1.0)
{
    std::normal_distribution<double> n(0.0, scale);
    return Vec3d(n(rng), n(rng), n(rng));
}

inline MatX3d random_field(std::mt19937& rng, Index rows, double scale = 1.0)
{
    std::normal_distribution<double> n(0.0, scale);
    MatX3d f(rows, 3);
    for (Index k = 0; k < rows; ++k)
        for (int c = 0; c < 3; ++c) f(k, c) = n(rng);
    return f;
}

/// Octahedron with the equator as interface: 4 upper faces phase 1, 4 lower
/// faces phase 2.
inline TwoPhaseSurfaceMesh octahedron_two_phase()
{
    MatX3d V(6, 3);
    V << 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
    MatX3i F(8, 3);
    F << 0, 2, 4, 2, 1, 4, 1, 3, 4, 3, 0, 4, 2, 0, 5, 1, 2, 5, 3, 1, 5, 0, 3, 5;
    VecXi phase(8);
    phase << 1, 1, 1, 1, 2, 2, 2, 2;
    return make_mesh(std::move(V), F, phase);
}

/// Axis-aligned unit cube surface, all phase 1.
inline TwoPhaseSurfaceMesh unit_cube()
{
    MatX3d V(8, 3);
    V << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1;
    MatX3i F(12, 3);
    // bottom (z=0, outward -z), top, and the four sides
    F << 0, 2, 1, 0, 3, 2, 4, 5, 6, 4, 6, 7, 0, 1, 5, 0, 5, 4, 1, 2, 6, 1, 6, 5, 2, 3, 7, 2,
        7, 6, 3, 0, 4, 3, 4, 7;
    VecXi phase = VecXi::Ones(12);
    return make_mesh(std::move(V), F, phase);
}

/// Axis-aligned box surface with per-axis grid subdivisions; faces are
/// labeled phase 1 where the centroid has x < split_x, else phase 2.
inline TwoPhaseSurfaceMesh box_mesh(int nx, int ny, int nz, double Lx = 1.0, double Ly = 1.0,
                                    double Lz = 1.0, double split_x = 1e30)
{
    std::vector<Vec3d> verts;
    auto key_of = [](const Vec3d& p) {
        return std::array<long long, 3>{static_cast<long long>(std::llround(p.x() * 1e9)),
                                        static_cast<long long>(std::llround(p.y() * 1e9)),
                                        static_cast<long long>(std::llround(p.z() * 1e9))};
    };
    std::map<std::array<long long, 3>, Index> lookup;
    auto vid = [&](const Vec3d& p) {
        const auto key = key_of(p);
        auto it = lookup.find(key);
        if (it != lookup.end()) return it->second;
        const Index idx = static_cast<Index>(verts.size());
        verts.push_back(p);
        lookup[key] = idx;
        return idx;
    };
    std::vector<std::array<Index, 3>> tris;
    auto side = [&](Vec3d origin, Vec3d U, Vec3d V, int nu, int nv) {
        for (int u = 0; u < nu; ++u)
            for (int v = 0; v < nv; ++v) {
                const Vec3d a = origin + U * (double(u) / nu) + V * (double(v) / nv);
                const Vec3d b = origin + U * (double(u + 1) / nu) + V * (double(v) / nv);
                const Vec3d c = origin + U * (double(u + 1) / nu) + V * (double(v + 1) / nv);
                const Vec3d d = origin + U * (double(u) / nu) + V * (double(v + 1) / nv);
                tris.push_back({vid(a), vid(b), vid(c)});
                tris.push_back({vid(a), vid(c), vid(d)});
            }
    };
    const Vec3d ex(Lx, 0, 0), ey(0, Ly, 0), ez(0, 0, Lz);
    side(Vec3d(0, 0, 0), ey, ex, ny, nx);          // bottom, outward -z
    side(Vec3d(0, 0, Lz), ex, ey, nx, ny);         // top, outward +z
    side(Vec3d(0, 0, 0), ex, ez, nx, nz);          // y = 0, outward -y
    side(Vec3d(0, Ly, 0), ez, ex, nz, nx);         // y = Ly, outward +y
    side(Vec3d(0, 0, 0), ez, ey, nz, ny);          // x = 0, outward -x
    side(Vec3d(Lx, 0, 0), ey, ez, ny, nz);         // x = Lx, outward +x

    MatX3d V(static_cast<Index>(verts.size()), 3);
    for (size_t k = 0; k < verts.size(); ++k) V.row(static_cast<Index>(k)) = verts[k];
    MatX3i F(static_cast<Index>(tris.size()), 3);
    VecXi phase(static_cast<Index>(tris.size()));
    for (size_t j = 0; j < tris.size(); ++j) {
        F.row(static_cast<Index>(j)) << tris[j][0], tris[j][1], tris[j][2];
        const double cx = (V(tris[j][0], 0) + V(tris[j][1], 0) + V(tris[j][2], 0)) / 3.0;
        phase[static_cast<Index>(j)] = cx < split_x ? 1 : 2;
    }
    return make_mesh(std::move(V), F, phase);
}

} // namespace memflow::testing
