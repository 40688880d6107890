#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace memflow {

/// Gradients of the three nodal hat functions of a flat triangle.
/// Column j is the in-plane gradient of the hat function attached to vertex j:
/// the gradients sum to zero, each is perpendicular to its opposite edge and
/// to the face normal, and has magnitude 1/height.
template <typename S>
Eigen::Matrix<S, 3, 3> shape_gradients(const Eigen::Matrix<S, 3, 1>& p0,
                                       const Eigen::Matrix<S, 3, 1>& p1,
                                       const Eigen::Matrix<S, 3, 1>& p2)
{
    const Eigen::Matrix<S, 3, 1> n = (p1 - p0).cross(p2 - p0);
    const S twice_area = n.norm();
    if (!(twice_area > S(0)))
        throw std::invalid_argument("shape_gradients: degenerate triangle");
    const Eigen::Matrix<S, 3, 1> nhat = n / twice_area;
    Eigen::Matrix<S, 3, 3> g;
    g.col(0) = nhat.cross(p2 - p1) / twice_area;
    g.col(1) = nhat.cross(p0 - p2) / twice_area;
    g.col(2) = nhat.cross(p1 - p0) / twice_area;
    return g;
}

template <typename S>
S triangle_area(const Eigen::Matrix<S, 3, 1>& p0,
                const Eigen::Matrix<S, 3, 1>& p1,
                const Eigen::Matrix<S, 3, 1>& p2)
{
    return S(0.5) * (p1 - p0).cross(p2 - p0).norm();
}

template <typename S>
Eigen::Matrix<S, 3, 1> triangle_normal(const Eigen::Matrix<S, 3, 1>& p0,
                                       const Eigen::Matrix<S, 3, 1>& p1,
                                       const Eigen::Matrix<S, 3, 1>& p2)
{
    const Eigen::Matrix<S, 3, 1> n = (p1 - p0).cross(p2 - p0);
    const S len = n.norm();
    if (!(len > S(0)))
        throw std::invalid_argument("triangle_normal: degenerate triangle");
    return n / len;
}

/// Vertex operator blending the identity with the projection onto the
/// averaged vertex normal: theta*Id + (1-theta) w w^T/|w|^2.
/// Symmetric, eigenvalues {theta, theta, 1}, maps w to w.
template <typename S>
Eigen::Matrix<S, 3, 3> q_matrix(S theta, const Eigen::Matrix<S, 3, 1>& omega)
{
    const S w2 = omega.squaredNorm();
    if (!(w2 > S(0)))
        throw std::invalid_argument("q_matrix: zero vertex normal");
    return theta * Eigen::Matrix<S, 3, 3>::Identity() +
           (S(1) - theta) * (omega * omega.transpose()) / w2;
}

/// Sensitivity of the normalized-normal pairing (xi.w)(eta.w)/|w|^2 with
/// respect to the vertex normal w; symmetric in (xi, eta) and perpendicular
/// to w.
template <typename S>
Eigen::Matrix<S, 3, 1> g_operator(const Eigen::Matrix<S, 3, 1>& xi,
                                  const Eigen::Matrix<S, 3, 1>& eta,
                                  const Eigen::Matrix<S, 3, 1>& omega)
{
    const S w2 = omega.squaredNorm();
    if (!(w2 > S(0)))
        throw std::invalid_argument("g_operator: zero vertex normal");
    const S a = xi.dot(omega);
    const S b = eta.dot(omega);
    return (a * eta + b * xi - (S(2) * a * b / w2) * omega) / w2;
}

/// Projection onto the plane perpendicular to a unit curve tangent.
template <typename S>
Eigen::Matrix<S, 3, 3> curve_projector(const Eigen::Matrix<S, 3, 1>& tangent)
{
    const S len = tangent.norm();
    if (!(len > S(0)))
        throw std::invalid_argument("curve_projector: degenerate edge");
    const Eigen::Matrix<S, 3, 1> t = tangent / len;
    return Eigen::Matrix<S, 3, 3>::Identity() - t * t.transpose();
}

} // namespace memflow
