#include "memflow/surface_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "memflow/geometry.hpp"
#include "memflow/io.hpp"

namespace memflow {

namespace {

// Key for an undirected edge.
inline std::pair<Index, Index> ukey(Index a, Index b)
{
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

struct EdgeInfo {
    int count = 0;
    Index tri[2] = {-1, -1};    // incident triangles
    Index dir_from[2] = {-1, -1}; // first endpoint as traversed by tri[j]
};

} // namespace

Index MeshTopology::J_phase(int i) const
{
    Index n = 0;
    for (Index j = 0; j < tri_phase.size(); ++j)
        if (tri_phase[j] == i + 1) ++n;
    return n;
}

std::shared_ptr<const MeshTopology>
build_topology(Index num_vertices, const MatX3i& triangles, const VecXi& tri_phase)
{
    auto topo = std::make_shared<MeshTopology>();
    topo->triangles = triangles;
    topo->tri_phase = tri_phase;
    topo->num_vertices = num_vertices;

    const Index J = static_cast<Index>(triangles.rows());
    if (tri_phase.size() != J)
        throw std::invalid_argument("topology: phase label count mismatch");
    if (num_vertices < 4 || J < 4)
        throw std::invalid_argument("topology: too few vertices or triangles");

    for (Index j = 0; j < J; ++j) {
        if (tri_phase[j] != 1 && tri_phase[j] != 2)
            throw std::invalid_argument("topology: phase label outside {1,2} on face " +
                                        std::to_string(j));
        for (int c = 0; c < 3; ++c) {
            const Index v = triangles(j, c);
            if (v < 0 || v >= num_vertices)
                throw std::invalid_argument("topology: vertex index out of range");
        }
        if (triangles(j, 0) == triangles(j, 1) || triangles(j, 1) == triangles(j, 2) ||
            triangles(j, 0) == triangles(j, 2))
            throw std::invalid_argument("topology: repeated vertex in face " + std::to_string(j));
    }

    // Edge census: closed orientable surface means every undirected edge is
    // traversed exactly once in each direction.
    std::map<std::pair<Index, Index>, EdgeInfo> edges;
    for (Index j = 0; j < J; ++j) {
        for (int c = 0; c < 3; ++c) {
            const Index a = triangles(j, c);
            const Index b = triangles(j, (c + 1) % 3);
            EdgeInfo& e = edges[ukey(a, b)];
            if (e.count >= 2)
                throw std::invalid_argument("topology: non-manifold edge (" + std::to_string(a) +
                                            "," + std::to_string(b) + ") shared by >2 triangles");
            e.tri[e.count] = j;
            e.dir_from[e.count] = a;
            ++e.count;
        }
    }
    for (const auto& [key, e] : edges) {
        if (e.count != 2)
            throw std::invalid_argument("topology: open surface, edge (" +
                                        std::to_string(key.first) + "," +
                                        std::to_string(key.second) + ") has one triangle");
        if (e.dir_from[0] == e.dir_from[1])
            throw std::invalid_argument("topology: inconsistent winding across edge (" +
                                        std::to_string(key.first) + "," +
                                        std::to_string(key.second) + ")");
    }

    // Phase vertex sets.
    for (int i = 0; i < 2; ++i) {
        std::vector<char> in_phase(num_vertices, 0);
        for (Index j = 0; j < J; ++j)
            if (tri_phase[j] == i + 1)
                for (int c = 0; c < 3; ++c) in_phase[triangles(j, c)] = 1;
        topo->global_to_phase[i] = VecXi::Constant(num_vertices, -1);
        for (Index k = 0; k < num_vertices; ++k)
            if (in_phase[k]) {
                topo->global_to_phase[i][k] =
                    static_cast<Index>(topo->phase_vertices[i].size());
                topo->phase_vertices[i].push_back(k);
            }
    }
    for (Index k = 0; k < num_vertices; ++k)
        if (topo->global_to_phase[0][k] < 0 && topo->global_to_phase[1][k] < 0)
            throw std::invalid_argument("topology: isolated vertex " + std::to_string(k));

    // Interface edges: phase changes across them. Orient each along the
    // winding of its phase-1 triangle, so that the phase-1 outer conormal is
    // -nu_1 x tangent.
    std::map<Index, std::pair<Index, Index>> next_of; // a -> (b, edge slot)
    struct RawGamma {
        Index a, b, tri1, tri2;
    };
    std::vector<RawGamma> raw;
    for (const auto& [key, e] : edges) {
        const int p0 = tri_phase[e.tri[0]];
        const int p1 = tri_phase[e.tri[1]];
        if (p0 == p1) continue;
        const int slot1 = (p0 == 1) ? 0 : 1; // slot of the phase-1 triangle
        RawGamma g;
        g.a = e.dir_from[slot1];
        g.b = (g.a == key.first) ? key.second : key.first;
        g.tri1 = e.tri[slot1];
        g.tri2 = e.tri[1 - slot1];
        raw.push_back(g);
    }
    for (size_t r = 0; r < raw.size(); ++r) {
        if (next_of.count(raw[r].a))
            throw std::invalid_argument("topology: interface is not a union of simple loops "
                                        "(vertex " + std::to_string(raw[r].a) + ")");
        next_of[raw[r].a] = {raw[r].b, static_cast<Index>(r)};
    }

    topo->global_to_gamma = VecXi::Constant(num_vertices, -1);
    std::vector<char> used(raw.size(), 0);
    // Deterministic loop order: start each loop at its smallest vertex.
    std::vector<Index> starts;
    for (const auto& [a, nb] : next_of) starts.push_back(a);
    std::sort(starts.begin(), starts.end());
    for (Index s : starts) {
        auto it = next_of.find(s);
        if (it == next_of.end() || used[it->second.second]) continue;
        std::vector<Index> loop;
        Index v = s;
        while (true) {
            auto jt = next_of.find(v);
            if (jt == next_of.end() || used[jt->second.second])
                throw std::invalid_argument("topology: interface loop does not close");
            loop.push_back(v);
            used[jt->second.second] = 1;
            v = jt->second.first;
            if (v == s) break;
            if (loop.size() > raw.size())
                throw std::invalid_argument("topology: interface loop walk diverged");
        }
        if (loop.size() < 3)
            throw std::invalid_argument("topology: interface loop with fewer than 3 vertices");
        for (Index k : loop) {
            topo->global_to_gamma[k] = static_cast<Index>(topo->gamma_vertices.size());
            topo->gamma_vertices.push_back(k);
        }
        topo->interface_loops.push_back(std::move(loop));
    }

    // Oriented edge list in loop order.
    for (const auto& loop : topo->interface_loops) {
        const size_t n = loop.size();
        for (size_t l = 0; l < n; ++l) {
            const Index a = loop[l];
            const Index b = loop[(l + 1) % n];
            const EdgeInfo& e = edges.at(ukey(a, b));
            MeshTopology::GammaEdge ge;
            ge.a = a;
            ge.b = b;
            ge.ga = topo->global_to_gamma[a];
            ge.gb = topo->global_to_gamma[b];
            const int slot1 = (tri_phase[e.tri[0]] == 1) ? 0 : 1;
            ge.tri1 = e.tri[slot1];
            ge.tri2 = e.tri[1 - slot1];
            topo->gamma_edges.push_back(ge);
        }
    }

    if (topo->K_phase(0) + topo->K_phase(1) - topo->K_gamma() != num_vertices)
        throw std::logic_error("topology: vertex count identity violated");

    // Per-phase Euler characteristic; interface vertices and edges belong to
    // both open phases and are counted once for each.
    for (int i = 0; i < 2; ++i) {
        Index E = 0;
        for (const auto& [key, e] : edges) {
            (void)key;
            if (tri_phase[e.tri[0]] == i + 1 || tri_phase[e.tri[1]] == i + 1) ++E;
        }
        topo->euler[i] = static_cast<int>(topo->K_phase(i) - E + topo->J_phase(i));
    }

    return topo;
}

TwoPhaseSurfaceMesh make_mesh(MatX3d vertices, MatX3i triangles, VecXi tri_phase)
{
    TwoPhaseSurfaceMesh mesh;
    mesh.topo = build_topology(static_cast<Index>(vertices.rows()), triangles, tri_phase);
    mesh.vertices = std::move(vertices);
    for (Index j = 0; j < mesh.J(); ++j) {
        const auto t = mesh.topo->triangles.row(j);
        if (!(triangle_area<double>(mesh.vertices.row(t[0]), mesh.vertices.row(t[1]),
                                    mesh.vertices.row(t[2])) > 0.0))
            throw std::invalid_argument("mesh: zero-area face " + std::to_string(j));
    }
    return mesh;
}

TwoPhaseSurfaceMesh load_mesh(const std::string& path)
{
    auto [V, F, phase] = read_off(path);
    TwoPhaseSurfaceMesh mesh = make_mesh(std::move(V), F, phase);
    const double vol = enclosed_volume(mesh);
    if (vol <= 0.0)
        throw std::invalid_argument("load_mesh: inward orientation (enclosed volume " +
                                    std::to_string(vol) + "); flip the face windings");
    return mesh;
}

VertexNormalField vertex_normals(const TwoPhaseSurfaceMesh& mesh)
{
    const MeshTopology& topo = *mesh.topo;
    VertexNormalField f;
    const Index J = topo.J();
    f.face_normals.resize(J, 3);
    VecXd area(J);
    for (Index j = 0; j < J; ++j) {
        const auto t = topo.triangles.row(j);
        const Vec3d p0 = mesh.vertices.row(t[0]);
        const Vec3d p1 = mesh.vertices.row(t[1]);
        const Vec3d p2 = mesh.vertices.row(t[2]);
        f.face_normals.row(j) = triangle_normal(p0, p1, p2);
        area[j] = triangle_area(p0, p1, p2);
    }

    MatX3d accum = MatX3d::Zero(topo.K(), 3);
    VecXd wsum = VecXd::Zero(topo.K());
    for (int i = 0; i < 2; ++i) {
        MatX3d acc_i = MatX3d::Zero(topo.K_phase(i), 3);
        VecXd w_i = VecXd::Zero(topo.K_phase(i));
        for (Index j = 0; j < J; ++j) {
            if (topo.tri_phase[j] != i + 1) continue;
            for (int c = 0; c < 3; ++c) {
                const Index k = topo.triangles(j, c);
                const Index kl = topo.global_to_phase[i][k];
                acc_i.row(kl) += area[j] * f.face_normals.row(j);
                w_i[kl] += area[j];
                accum.row(k) += area[j] * f.face_normals.row(j);
                wsum[k] += area[j];
            }
        }
        f.omega_phase[i] = acc_i.array().colwise() / w_i.array();
        for (Index kl = 0; kl < topo.K_phase(i); ++kl)
            if (!(f.omega_phase[i].row(kl).norm() > 0.0))
                throw std::runtime_error("vertex_normals: zero averaged normal at phase " +
                                         std::to_string(i + 1) + " vertex " +
                                         std::to_string(topo.phase_vertices[i][kl]));
    }
    f.omega = accum.array().colwise() / wsum.array();
    for (Index k = 0; k < topo.K(); ++k)
        if (!(f.omega.row(k).norm() > 0.0))
            throw std::runtime_error("vertex_normals: zero averaged normal at vertex " +
                                     std::to_string(k));
    return f;
}

double surface_area(const TwoPhaseSurfaceMesh& mesh, int phase)
{
    const MeshTopology& topo = *mesh.topo;
    double a = 0.0;
    for (Index j = 0; j < topo.J(); ++j) {
        if (topo.tri_phase[j] != phase) continue;
        const auto t = topo.triangles.row(j);
        a += triangle_area<double>(mesh.vertices.row(t[0]), mesh.vertices.row(t[1]),
                                   mesh.vertices.row(t[2]));
    }
    return a;
}

double surface_area(const TwoPhaseSurfaceMesh& mesh)
{
    return surface_area(mesh, 1) + surface_area(mesh, 2);
}

double enclosed_volume(const MatX3d& vertices, const MatX3i& triangles)
{
    // (1/3) sum over faces of centroid . (area-weighted normal); the centroid
    // form keeps the translation test exact up to rounding.
    double vol = 0.0;
    for (Index j = 0; j < triangles.rows(); ++j) {
        const Vec3d p0 = vertices.row(triangles(j, 0));
        const Vec3d p1 = vertices.row(triangles(j, 1));
        const Vec3d p2 = vertices.row(triangles(j, 2));
        const Vec3d c = (p0 + p1 + p2) / 3.0;
        vol += c.dot((p1 - p0).cross(p2 - p0)) / 6.0;
    }
    return vol;
}

double enclosed_volume(const TwoPhaseSurfaceMesh& mesh)
{
    return enclosed_volume(mesh.vertices, mesh.topo->triangles);
}

double reduced_volume(const TwoPhaseSurfaceMesh& mesh)
{
    const double vol = enclosed_volume(mesh);
    if (!(vol > 0.0))
        throw std::invalid_argument("reduced_volume: non-positive enclosed volume");
    const double area = surface_area(mesh);
    return 6.0 * std::sqrt(M_PI) * vol / std::pow(area, 1.5);
}

int euler_characteristic(const TwoPhaseSurfaceMesh& mesh, int phase)
{
    return mesh.topo->euler[phase - 1];
}

MatX3d edge_conormals(const TwoPhaseSurfaceMesh& mesh, const VertexNormalField& normals,
                      int phase)
{
    const MeshTopology& topo = *mesh.topo;
    MatX3d mu(static_cast<Index>(topo.gamma_edges.size()), 3);
    for (size_t e = 0; e < topo.gamma_edges.size(); ++e) {
        const auto& ge = topo.gamma_edges[e];
        Vec3d t = mesh.vertices.row(ge.b) - mesh.vertices.row(ge.a);
        t.normalize();
        const Vec3d nu =
            normals.face_normals.row(phase == 1 ? ge.tri1 : ge.tri2);
        mu.row(e) = (phase == 1 ? -1.0 : 1.0) * nu.cross(t);
    }
    return mu;
}

MatX3d weak_conormal_init(const TwoPhaseSurfaceMesh& mesh, const VertexNormalField& normals,
                          int phase)
{
    const MeshTopology& topo = *mesh.topo;
    if (topo.K_gamma() == 0)
        throw std::invalid_argument("weak_conormal_init: empty interface");
    const MatX3d mu = edge_conormals(mesh, normals, phase);
    MatX3d accum = MatX3d::Zero(topo.K_gamma(), 3);
    VecXd mass = VecXd::Zero(topo.K_gamma());
    for (size_t e = 0; e < topo.gamma_edges.size(); ++e) {
        const auto& ge = topo.gamma_edges[e];
        const double half_len =
            0.5 * (mesh.vertices.row(ge.b) - mesh.vertices.row(ge.a)).norm();
        for (Index g : {ge.ga, ge.gb}) {
            accum.row(g) += half_len * mu.row(e);
            mass[g] += half_len;
        }
    }
    return accum.array().colwise() / mass.array();
}

bool ValidationReport::all_pass() const
{
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string ValidationReport::summary() const
{
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.pass ? "[ok]   " : "[FAIL] ") << c.name;
        if (!c.detail.empty()) os << ": " << c.detail;
        os << "\n";
    }
    return os.str();
}

ValidationReport validate(const TwoPhaseSurfaceMesh& mesh, bool c1_mode, double theta)
{
    const MeshTopology& topo = *mesh.topo;
    ValidationReport rep;

    Index bad_area = -1;
    double min_area = std::numeric_limits<double>::max();
    for (Index j = 0; j < topo.J(); ++j) {
        const auto t = topo.triangles.row(j);
        const double a = triangle_area<double>(
            mesh.vertices.row(t[0]), mesh.vertices.row(t[1]), mesh.vertices.row(t[2]));
        min_area = std::min(min_area, a);
        if (!(a > 0.0) && bad_area < 0) bad_area = j;
    }
    rep.checks.push_back({"positive face areas", bad_area < 0,
                          bad_area < 0 ? "min area " + std::to_string(min_area)
                                       : "face " + std::to_string(bad_area)});
    if (bad_area >= 0) return rep; // normals undefined past this point

    try {
        const VertexNormalField nf = vertex_normals(mesh);
        rep.checks.push_back({"nonzero vertex normals", true, ""});
        if (c1_mode && theta == 0.0) {
            const double ratio = normal_span_ratio(nf);
            rep.checks.push_back({"vertex normals span R^3", ratio > 1e-12,
                                  "eigenvalue ratio " + std::to_string(ratio)});
        }
    } catch (const std::exception& ex) {
        rep.checks.push_back({"nonzero vertex normals", false, ex.what()});
    }
    return rep;
}

double normal_span_ratio(const VertexNormalField& normals)
{
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 2; ++i)
        for (Index kl = 0; kl < normals.omega_phase[i].rows(); ++kl) {
            const Vec3d w = normals.omega_phase[i].row(kl);
            cov += w * w.transpose();
        }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const double smax = es.eigenvalues()(2);
    return smax > 0.0 ? es.eigenvalues()(0) / smax : 0.0;
}

TwoPhaseSurfaceMesh refine_uniform(const TwoPhaseSurfaceMesh& mesh)
{
    const MeshTopology& topo = *mesh.topo;
    std::map<std::pair<Index, Index>, Index> midpoint;
    std::vector<Vec3d> verts;
    verts.reserve(topo.K() * 4);
    for (Index k = 0; k < topo.K(); ++k) verts.push_back(mesh.vertices.row(k));
    auto mid = [&](Index a, Index b) {
        const auto key = ukey(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const Index idx = static_cast<Index>(verts.size());
        verts.push_back(0.5 * (mesh.vertices.row(a) + mesh.vertices.row(b)));
        midpoint[key] = idx;
        return idx;
    };
    MatX3i F(topo.J() * 4, 3);
    VecXi phase(topo.J() * 4);
    Index jn = 0;
    for (Index j = 0; j < topo.J(); ++j) {
        const Index a = topo.triangles(j, 0), b = topo.triangles(j, 1), c = topo.triangles(j, 2);
        const Index ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        const Index quads[4][3] = {{a, ab, ca}, {ab, b, bc}, {ca, bc, c}, {ab, bc, ca}};
        for (auto& q : quads) {
            F.row(jn) << q[0], q[1], q[2];
            phase[jn] = topo.tri_phase[j];
            ++jn;
        }
    }
    MatX3d V(static_cast<Index>(verts.size()), 3);
    for (size_t k = 0; k < verts.size(); ++k) V.row(static_cast<Index>(k)) = verts[k];
    return make_mesh(std::move(V), F, phase);
}

} // namespace memflow
