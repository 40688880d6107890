#include "memflow/generators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace memflow {

namespace {

struct RawMesh {
    std::vector<Vec3d> V;
    std::vector<std::array<Index, 3>> F;
    std::vector<int> phase;

    TwoPhaseSurfaceMesh finish()
    {
        MatX3d vm(static_cast<Index>(V.size()), 3);
        for (size_t k = 0; k < V.size(); ++k) vm.row(static_cast<Index>(k)) = V[k];
        MatX3i fm(static_cast<Index>(F.size()), 3);
        VecXi pm(static_cast<Index>(F.size()));
        for (size_t j = 0; j < F.size(); ++j) {
            fm.row(static_cast<Index>(j)) << F[j][0], F[j][1], F[j][2];
            pm[static_cast<Index>(j)] = phase[j];
        }
        TwoPhaseSurfaceMesh mesh = make_mesh(std::move(vm), fm, pm);
        if (enclosed_volume(mesh) < 0.0) {
            fm.col(1).swap(fm.col(2));
            mesh = make_mesh(mesh.vertices, fm, pm);
        }
        return mesh;
    }
};

// Octahedron refined L times, vertices projected to the unit sphere.
RawMesh octasphere(int level)
{
    RawMesh m;
    m.V = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    m.F = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
           {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<Index, Index>, Index> mid;
        auto midpoint = [&](Index a, Index b) {
            const auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            const Index idx = static_cast<Index>(m.V.size());
            m.V.push_back((0.5 * (m.V[a] + m.V[b])).normalized());
            mid[key] = idx;
            return idx;
        };
        std::vector<std::array<Index, 3>> nf;
        nf.reserve(m.F.size() * 4);
        for (const auto& f : m.F) {
            const Index ab = midpoint(f[0], f[1]);
            const Index bc = midpoint(f[1], f[2]);
            const Index ca = midpoint(f[2], f[0]);
            nf.push_back({f[0], ab, ca});
            nf.push_back({ab, f[1], bc});
            nf.push_back({ca, bc, f[2]});
            nf.push_back({ab, bc, ca});
        }
        m.F = std::move(nf);
    }
    m.phase.assign(m.F.size(), 1);
    return m;
}

} // namespace

TwoPhaseSurfaceMesh revolve_profile(const std::vector<ProfilePoint>& profile,
                                    const std::vector<int>& segment_phase, int n_phi)
{
    const size_t P = profile.size();
    if (P < 3 || segment_phase.size() != P - 1)
        throw std::invalid_argument("revolve_profile: bad profile");
    if (profile.front().rho != 0.0 || profile.back().rho != 0.0)
        throw std::invalid_argument("revolve_profile: profile must start and end on the axis");
    if (n_phi < 3) throw std::invalid_argument("revolve_profile: n_phi < 3");
    for (size_t j = 1; j + 1 < P; ++j)
        if (!(profile[j].rho > 0.0))
            throw std::invalid_argument("revolve_profile: interior profile point on the axis");

    RawMesh m;
    const Index south = 0;
    m.V.push_back({0.0, 0.0, profile.front().z});
    std::vector<Index> ring_start(P, -1);
    for (size_t j = 1; j + 1 < P; ++j) {
        ring_start[j] = static_cast<Index>(m.V.size());
        for (int t = 0; t < n_phi; ++t) {
            const double phi = 2.0 * M_PI * t / n_phi;
            m.V.push_back({profile[j].rho * std::cos(phi), profile[j].rho * std::sin(phi),
                           profile[j].z});
        }
    }
    const Index north = static_cast<Index>(m.V.size());
    m.V.push_back({0.0, 0.0, profile.back().z});

    auto ring = [&](size_t j, int t) { return ring_start[j] + (t % n_phi); };

    // South fan.
    for (int t = 0; t < n_phi; ++t) {
        m.F.push_back({south, ring(1, t + 1), ring(1, t)});
        m.phase.push_back(segment_phase[0]);
    }
    // Side strips.
    for (size_t j = 1; j + 2 < P; ++j)
        for (int t = 0; t < n_phi; ++t) {
            m.F.push_back({ring(j, t), ring(j, t + 1), ring(j + 1, t + 1)});
            m.phase.push_back(segment_phase[j]);
            m.F.push_back({ring(j, t), ring(j + 1, t + 1), ring(j + 1, t)});
            m.phase.push_back(segment_phase[j]);
        }
    // North fan.
    for (int t = 0; t < n_phi; ++t) {
        m.F.push_back({north, ring(P - 2, t), ring(P - 2, t + 1)});
        m.phase.push_back(segment_phase[P - 2]);
    }
    return m.finish();
}

TwoPhaseSurfaceMesh gen_sphere(int level, double radius)
{
    RawMesh m = octasphere(level);
    for (auto& v : m.V) v *= radius;
    return m.finish();
}

namespace {

// Sphere profile with rings exactly at the given polar angles; bands take
// alternating phases starting from `south_phase`.
TwoPhaseSurfaceMesh sphere_bands(int level, const std::vector<double>& splits, int south_phase)
{
    const int n_lat = 4 << level;
    const int n_phi = 4 << level;
    std::vector<double> bounds = {0.0};
    bounds.insert(bounds.end(), splits.begin(), splits.end());
    bounds.push_back(M_PI);

    std::vector<ProfilePoint> prof;
    std::vector<int> seg;
    prof.push_back({0.0, -1.0});
    int phase = south_phase;
    for (size_t band = 0; band + 1 < bounds.size(); ++band) {
        const double u0 = bounds[band], u1 = bounds[band + 1];
        const int m = std::max(1, static_cast<int>(std::lround(n_lat * (u1 - u0) / M_PI)));
        for (int j = 1; j <= m; ++j) {
            const double u = u0 + (u1 - u0) * j / m;
            const bool north_pole = band + 2 == bounds.size() && j == m;
            prof.push_back({north_pole ? 0.0 : std::sin(u), -std::cos(u)});
            seg.push_back(phase);
        }
        phase = 3 - phase;
    }
    return revolve_profile(prof, seg, n_phi);
}

TwoPhaseSurfaceMesh twocap_latitude(int level, double ratio)
{
    // Split latitude from the requested cap-to-remainder area ratio; the cap
    // above the ring is phase 1.
    const double z0 = (1.0 - ratio) / (1.0 + ratio);
    return sphere_bands(level, {std::acos(-z0)}, 2);
}

// Two antipodal polar caps as phase 1, bounded by clean latitude rings.
TwoPhaseSurfaceMesh antipodal_caps(int level, double ratio)
{
    const double frac1 = ratio / (1.0 + ratio);
    const double z0 = 1.0 - frac1; // each cap covers frac1/2 of the sphere
    const double u = std::acos(z0);
    return sphere_bands(level, {u, M_PI - u}, 1);
}

TwoPhaseSurfaceMesh twocap_islands(int level, double ratio, int islands, double flatten)
{
    const double frac1 = ratio / (1.0 + ratio);
    const double zc = 0.35;
    const double rc = std::sqrt(1.0 - zc * zc);
    std::vector<Vec3d> centers;
    for (int j = 0; j < islands; ++j) {
        const double phi = 2.0 * M_PI * j / islands;
        centers.push_back({rc * std::cos(phi), rc * std::sin(phi), zc});
    }
    const double cos_beta0 = 1.0 - 2.0 * frac1 / islands;
    if (cos_beta0 <= -1.0)
        throw std::invalid_argument("twocap: island area ratio too large");

    // The jagged cap boundaries occasionally pinch at a vertex; nudge the cap
    // radius until the interface is a union of simple loops.
    for (int attempt = 0; attempt < 8; ++attempt) {
        const double cb = std::cos(std::acos(cos_beta0) * (1.0 + 0.015 * attempt));
        RawMesh m = octasphere(level);
        for (size_t j = 0; j < m.F.size(); ++j) {
            const Vec3d c =
                ((m.V[m.F[j][0]] + m.V[m.F[j][1]] + m.V[m.F[j][2]]) / 3.0).normalized();
            int p = 2;
            for (const Vec3d& ctr : centers)
                if (c.dot(ctr) > cb) { p = 1; break; }
            m.phase[j] = p;
        }
        for (auto& v : m.V) v.z() *= flatten;
        try {
            return m.finish();
        } catch (const std::invalid_argument&) {
            if (attempt == 7) throw;
        }
    }
    throw std::logic_error("twocap_islands: unreachable");
}

} // namespace

TwoPhaseSurfaceMesh gen_twocap(int level, double ratio, int islands, double flatten)
{
    if (!(ratio > 0.0)) throw std::invalid_argument("twocap: ratio must be positive");
    if (islands == 2) {
        // antipodal caps carry clean ring interfaces
        TwoPhaseSurfaceMesh mesh = antipodal_caps(level, ratio);
        if (flatten != 1.0) {
            MatX3d V = mesh.vertices;
            V.col(2) *= flatten;
            mesh = mesh.with_positions(V);
        }
        return mesh;
    }
    if (islands > 0) return twocap_islands(level, ratio, islands, flatten);
    if (std::abs(ratio - 1.0) < 1e-12 && flatten == 1.0) {
        RawMesh m = octasphere(level);
        for (size_t j = 0; j < m.F.size(); ++j) {
            const double cz = (m.V[m.F[j][0]].z() + m.V[m.F[j][1]].z() + m.V[m.F[j][2]].z()) / 3.0;
            m.phase[j] = cz > 0.0 ? 1 : 2;
        }
        return m.finish();
    }
    TwoPhaseSurfaceMesh mesh = twocap_latitude(level, ratio);
    if (flatten != 1.0) {
        MatX3d V = mesh.vertices;
        V.col(2) *= flatten;
        mesh = mesh.with_positions(V);
    }
    return mesh;
}

TwoPhaseSurfaceMesh gen_dumbbell(int level, double height, double width, double neck,
                                 double split_z)
{
    if (!(height > 0.0) || !(width > 0.0) || !(neck > 0.0) || neck > 1.0)
        throw std::invalid_argument("dumbbell: bad shape parameters");
    auto rho_of = [&](double zeta) {
        return std::sqrt(1.0 - zeta * zeta) * (neck + (1.0 - neck) * zeta * zeta);
    };
    // Normalize so the widest point matches the requested width.
    double rmax = 0.0;
    for (int s = 0; s <= 1000; ++s) rmax = std::max(rmax, rho_of(-1.0 + 2.0 * s / 1000.0));
    const double scale = 0.5 * width / rmax;
    const double a = 0.5 * height;
    const double zeta_split = std::clamp(split_z / a, -0.95, 0.95);

    const int n_lat = 4 << level;
    const int n_phi = 4 << level;
    std::vector<double> zetas;
    for (int j = 1; j < n_lat; ++j) zetas.push_back(std::sin(-M_PI / 2 + M_PI * j / n_lat));
    // Snap the nearest ring to the split plane so the interface is a ring.
    size_t best = 0;
    for (size_t j = 1; j < zetas.size(); ++j)
        if (std::abs(zetas[j] - zeta_split) < std::abs(zetas[best] - zeta_split)) best = j;
    zetas[best] = zeta_split;

    std::vector<ProfilePoint> prof;
    std::vector<int> seg;
    prof.push_back({0.0, -a});
    for (size_t j = 0; j < zetas.size(); ++j) {
        prof.push_back({scale * rho_of(zetas[j]), a * zetas[j]});
        const double zmid = 0.5 * (prof[prof.size() - 2].z + prof.back().z);
        seg.push_back(zmid > split_z ? 1 : 2);
    }
    prof.push_back({0.0, a});
    seg.push_back(0.5 * (prof[prof.size() - 2].z + a) > split_z ? 1 : 2);
    return revolve_profile(prof, seg, n_phi);
}

TwoPhaseSurfaceMesh gen_torus_caps(int level, double ring_radius, double tube_radius)
{
    if (!(ring_radius > 0.0) || !(tube_radius > 0.0))
        throw std::invalid_argument("torus-caps: radii must be positive");
    const double R = ring_radius, r = tube_radius;
    const int n_arc = 2 << level; // samples per quarter arc
    const int n_phi = 8 << level;

    std::vector<ProfilePoint> prof;
    std::vector<int> seg;
    prof.push_back({0.0, -r - R});
    // South cap: sphere of radius R centered at (0, -r).
    for (int j = 1; j <= n_arc; ++j) {
        const double v = 0.5 * M_PI * j / n_arc;
        prof.push_back({R * std::sin(v), -r - R * std::cos(v)});
        seg.push_back(1);
    }
    // Outer torus shell from the bottom to the top junction circle.
    for (int j = 1; j <= 2 * n_arc; ++j) {
        const double s = -0.5 * M_PI + M_PI * j / (2 * n_arc);
        prof.push_back({R + r * std::cos(s), r * std::sin(s)});
        seg.push_back(2);
    }
    // North cap.
    for (int j = 1; j <= n_arc; ++j) {
        const double v = 0.5 * M_PI * (1.0 - static_cast<double>(j) / n_arc);
        prof.push_back({j == n_arc ? 0.0 : R * std::sin(v), r + R * std::cos(v)});
        seg.push_back(1);
    }
    return revolve_profile(prof, seg, n_phi);
}

TwoPhaseSurfaceMesh generate_mesh(const MeshSource& src)
{
    if (src.generator == "sphere") return gen_sphere(src.level, src.radius);
    if (src.generator == "twocap")
        return gen_twocap(src.level, src.ratio, src.islands, src.flatten);
    if (src.generator == "dumbbell")
        return gen_dumbbell(src.level, src.height, src.width, src.neck, src.split_z);
    if (src.generator == "torus-caps")
        return gen_torus_caps(src.level, src.ring_radius, src.tube_radius);
    throw std::invalid_argument("unsupported mesh generator '" + src.generator + "'");
}

} // namespace memflow
