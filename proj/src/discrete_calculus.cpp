#include "memflow/discrete_calculus.hpp"

#include <stdexcept>

#include "memflow/geometry.hpp"

namespace memflow {

ThetaFields build_theta_fields(const TwoPhaseSurfaceMesh& mesh, double theta)
{
    if (theta < 0.0 || theta > 1.0)
        throw std::invalid_argument("build_theta_fields: theta outside [0,1]");
    const MeshTopology& topo = *mesh.topo;
    ThetaFields f;
    f.theta = theta;
    f.theta_h = VecXd::Constant(topo.K(), theta);
    f.theta_star = VecXd::Constant(topo.K(), theta);
    for (Index g : topo.gamma_vertices) {
        f.theta_h[g] = 0.0;
        f.theta_star[g] = 1.0;
    }
    return f;
}

std::array<VertexQOperator, 2> build_q_operators(const TwoPhaseSurfaceMesh& mesh,
                                                 const VertexNormalField& normals,
                                                 const ThetaFields& fields)
{
    const MeshTopology& topo = *mesh.topo;
    std::array<VertexQOperator, 2> Q;
    for (int i = 0; i < 2; ++i) {
        const Index n = topo.K_phase(i);
        Q[i].q.resize(n);
        Q[i].q_star.resize(n);
        for (Index kl = 0; kl < n; ++kl) {
            const Index k = topo.phase_vertices[i][kl];
            const Vec3d w = normals.omega_phase[i].row(kl);
            Q[i].q[kl] = q_matrix(fields.theta_h[k], w);
            Q[i].q_star[kl] = q_matrix(fields.theta_star[k], w);
        }
    }
    return Q;
}

SurfaceOperators build_operators(const TwoPhaseSurfaceMesh& mesh, double theta)
{
    const MeshTopology& topo = *mesh.topo;
    SurfaceOperators ops;
    ops.mesh = &mesh;

    const Index J = topo.J();
    ops.face_area.resize(J);
    ops.face_normal.resize(J, 3);
    ops.face_grad.resize(J);
    for (Index j = 0; j < J; ++j) {
        const auto t = topo.triangles.row(j);
        const Vec3d p0 = mesh.vertices.row(t[0]);
        const Vec3d p1 = mesh.vertices.row(t[1]);
        const Vec3d p2 = mesh.vertices.row(t[2]);
        ops.face_area[j] = triangle_area(p0, p1, p2);
        ops.face_normal.row(j) = triangle_normal(p0, p1, p2);
        ops.face_grad[j] = shape_gradients(p0, p1, p2);
    }

    ops.mass = VecXd::Zero(topo.K());
    for (int i = 0; i < 2; ++i) ops.mass_phase[i] = VecXd::Zero(topo.K_phase(i));
    for (Index j = 0; j < J; ++j) {
        const int i = topo.tri_phase[j] - 1;
        const double third = ops.face_area[j] / 3.0;
        for (int c = 0; c < 3; ++c) {
            const Index k = topo.triangles(j, c);
            ops.mass[k] += third;
            ops.mass_phase[i][topo.global_to_phase[i][k]] += third;
        }
    }

    ops.normals = vertex_normals(mesh);
    ops.theta = build_theta_fields(mesh, theta);
    ops.Q = build_q_operators(mesh, ops.normals, ops.theta);

    for (int i = 0; i < 2; ++i) {
        std::vector<Triplet> trip;
        for (Index j = 0; j < J; ++j) {
            if (topo.tri_phase[j] != i + 1) continue;
            const Mat3d& g = ops.face_grad[j];
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    const double v = ops.face_area[j] * g.col(a).dot(g.col(b));
                    trip.emplace_back(topo.triangles(j, a), topo.triangles(j, b), v);
                }
        }
        ops.stiffness[i].resize(topo.K(), topo.K());
        ops.stiffness[i].setFromTriplets(trip.begin(), trip.end());
    }

    const Index E = static_cast<Index>(topo.gamma_edges.size());
    ops.edge_length.resize(E);
    ops.edge_tangent.resize(E, 3);
    ops.gamma_mass = VecXd::Zero(topo.K_gamma());
    std::vector<Triplet> gtrip;
    for (Index e = 0; e < E; ++e) {
        const auto& ge = topo.gamma_edges[e];
        const Vec3d d = mesh.vertices.row(ge.b) - mesh.vertices.row(ge.a);
        const double len = d.norm();
        if (!(len > 0.0))
            throw std::runtime_error("build_operators: degenerate interface edge");
        ops.edge_length[e] = len;
        ops.edge_tangent.row(e) = d / len;
        ops.gamma_mass[ge.ga] += 0.5 * len;
        ops.gamma_mass[ge.gb] += 0.5 * len;
        const double w = 1.0 / len;
        gtrip.emplace_back(ge.ga, ge.ga, w);
        gtrip.emplace_back(ge.gb, ge.gb, w);
        gtrip.emplace_back(ge.ga, ge.gb, -w);
        gtrip.emplace_back(ge.gb, ge.ga, -w);
    }
    ops.gamma_stiffness.resize(topo.K_gamma(), topo.K_gamma());
    ops.gamma_stiffness.setFromTriplets(gtrip.begin(), gtrip.end());

    return ops;
}

double lumped_inner_product(const SurfaceOperators& ops, int phase, const MatX3d& f,
                            const MatX3d& g)
{
    const int i = phase - 1;
    if (f.rows() != ops.mass_phase[i].size() || g.rows() != ops.mass_phase[i].size())
        throw std::invalid_argument("lumped_inner_product: field size does not match phase");
    return (ops.mass_phase[i].array() * (f.array() * g.array()).rowwise().sum()).sum();
}

double lumped_inner_product_gamma(const SurfaceOperators& ops, const MatX3d& f,
                                  const MatX3d& g)
{
    if (f.rows() != ops.gamma_mass.size() || g.rows() != ops.gamma_mass.size())
        throw std::invalid_argument("lumped_inner_product_gamma: field size mismatch");
    return (ops.gamma_mass.array() * (f.array() * g.array()).rowwise().sum()).sum();
}

VecXd curve_mass_matrix(const SurfaceOperators& ops) { return ops.gamma_mass; }

MatX3d restrict_to_phase(const SurfaceOperators& ops, int phase, const MatX3d& global_field)
{
    const MeshTopology& topo = *ops.mesh->topo;
    const int i = phase - 1;
    MatX3d out(topo.K_phase(i), 3);
    for (Index kl = 0; kl < topo.K_phase(i); ++kl)
        out.row(kl) = global_field.row(topo.phase_vertices[i][kl]);
    return out;
}

MatX3d extend_from_phase(const SurfaceOperators& ops, int phase, const MatX3d& phase_field)
{
    const MeshTopology& topo = *ops.mesh->topo;
    const int i = phase - 1;
    MatX3d out = MatX3d::Zero(topo.K(), 3);
    for (Index kl = 0; kl < topo.K_phase(i); ++kl)
        out.row(topo.phase_vertices[i][kl]) = phase_field.row(kl);
    return out;
}

} // namespace memflow
