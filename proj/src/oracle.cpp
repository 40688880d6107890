#include "memflow/oracle.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

namespace memflow {

namespace {

SphereOdeResult integrate_radius(const std::function<double(double)>& rate, double R0,
                                 double t_end, double dt_ode)
{
    if (!(R0 > 0.0)) throw std::invalid_argument("sphere ODE: R0 must be positive");
    if (!(dt_ode > 0.0)) throw std::invalid_argument("sphere ODE: dt_ode must be positive");
    SphereOdeResult out;
    double t = 0.0, R = R0;
    out.t.push_back(t);
    out.R.push_back(R);
    while (t < t_end - 1e-15 * std::max(1.0, t_end)) {
        const double h = std::min(dt_ode, t_end - t);
        const double k1 = rate(R);
        const double k2 = rate(R + 0.5 * h * k1);
        const double k3 = rate(R + 0.5 * h * k2);
        const double k4 = rate(R + h * k3);
        R += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        if (!(R > 1e-9)) {
            out.truncated = true;
            break;
        }
        out.t.push_back(t);
        out.R.push_back(R);
    }
    return out;
}

} // namespace

double sphere_energy(double alpha, double kappa_bar, double R)
{
    const double k = -2.0 / R;
    return 0.5 * alpha * (k - kappa_bar) * (k - kappa_bar) * 4.0 * M_PI * R * R;
}

SphereOdeResult sphere_radius_ode(double alpha, double kappa_bar, ConserveMode mode, double R0,
                                  double t_end, double dt_ode)
{
    auto rate = [=](double R) -> double {
        if (mode != ConserveMode::None) return 0.0; // constraint pins the radius
        const double k = -2.0 / R;
        return 0.5 * alpha * (k - kappa_bar) * (k - kappa_bar) * k -
               alpha * (k - kappa_bar) * (2.0 / (R * R));
    };
    return integrate_radius(rate, R0, t_end, dt_ode);
}

SphereOdeResult sphere_radius_ode_energy_route(double alpha, double kappa_bar,
                                               ConserveMode mode, double R0, double t_end,
                                               double dt_ode)
{
    auto rate = [=](double R) -> double {
        if (mode != ConserveMode::None) return 0.0;
        const double eps = 1e-6 * std::max(1.0, R);
        const double dE =
            (sphere_energy(alpha, kappa_bar, R + eps) - sphere_energy(alpha, kappa_bar, R - eps)) /
            (2.0 * eps);
        return -dE / (4.0 * M_PI * R * R);
    };
    return integrate_radius(rate, R0, t_end, dt_ode);
}

VecXd dense_reference_solve(const BlockSystem& sys, const VecXd& rhs)
{
    if (sys.map.n > 6000)
        throw std::invalid_argument("dense_reference_solve: system too large");
    const Eigen::MatrixXd A = Eigen::MatrixXd(sys.reduced);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
        throw std::runtime_error("dense_reference_solve: singular reduced operator");
    return lu.solve(rhs);
}

std::array<double, 2> gauss_bonnet_residual(const TwoPhaseSurfaceMesh& mesh,
                                            const SurfaceOperators& ops,
                                            const DiscreteState& state,
                                            const std::array<double, 2>& reference_total)
{
    std::array<double, 2> r{0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
        double boundary = 0.0;
        if (mesh.K_gamma() > 0)
            boundary = (ops.gamma_mass.array() *
                        (state.kappa_gamma.array() * state.m[i].array()).rowwise().sum())
                           .sum();
        r[i] = boundary + 2.0 * M_PI * mesh.topo->euler[i] - reference_total[i];
    }
    return r;
}

ClosedReferenceSystem closed_reference_system(const SurfaceOperators& ops,
                                              const PhaseParams& params,
                                              const DiscreteState& state, double dt)
{
    const MeshTopology& topo = *ops.mesh->topo;
    if (params.alpha[0] != params.alpha[1] || params.kappa_bar[0] != params.kappa_bar[1] ||
        params.alphaG[0] != 0.0 || params.alphaG[1] != 0.0 || params.line_tension != 0.0 ||
        params.rho != 0.0 || (!params.c1 && topo.K_gamma() > 0))
        throw std::invalid_argument("closed_reference_system: needs uniform C1 data");

    const Index K = topo.K();
    ClosedReferenceSystem ref;
    ref.K = K;
    const Index oY = 0, oX = 3 * K, rFlow = 0, rSide = 3 * K;

    std::vector<Triplet> trip;
    // Stiffness of the union surface: -A into the flow rows (column Y),
    // +A into the side rows (column dX).
    for (int i = 0; i < 2; ++i)
        for (int outer = 0; outer < ops.stiffness[i].outerSize(); ++outer)
            for (SpMat::InnerIterator it(ops.stiffness[i], outer); it; ++it)
                for (int c = 0; c < 3; ++c) {
                    trip.emplace_back(rFlow + 3 * it.row() + c, oY + 3 * it.col() + c,
                                      -it.value());
                    trip.emplace_back(rSide + 3 * it.row() + c, oX + 3 * it.col() + c,
                                      it.value());
                }
    // Vertex masses, phase-split at the interface.
    for (int i = 0; i < 2; ++i)
        for (Index kl = 0; kl < topo.K_phase(i); ++kl) {
            const Index k = topo.phase_vertices[i][kl];
            const double mass = ops.mass_phase[i][kl];
            const Mat3d vel = (mass / dt) * ops.Q[i].q_star[kl];
            const Mat3d side =
                (mass / params.alpha[i]) * (ops.Q[i].q[kl] * ops.Q[i].q[kl]);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    if (vel(a, b) != 0.0)
                        trip.emplace_back(rFlow + 3 * k + a, oX + 3 * k + b, vel(a, b));
                    if (side(a, b) != 0.0)
                        trip.emplace_back(rSide + 3 * k + a, oY + 3 * k + b, side(a, b));
                }
        }
    ref.A.resize(6 * K, 6 * K);
    ref.A.setFromTriplets(trip.begin(), trip.end());

    ref.rhs = VecXd::Zero(6 * K);
    // The flow forcing of the coupled assembly restricted to uniform data is
    // already the union-surface forcing.
    const BlockSystem sys = assemble_coupled_system(ops, params, state, dt);
    ref.rhs.segment(rFlow, 3 * K) = sys.flow_forcing;
    for (int i = 0; i < 2; ++i) {
        if (sys.side_rhs[i].size() == 0) continue;
        for (Index kl = 0; kl < topo.K_phase(i); ++kl) {
            const Index k = topo.phase_vertices[i][kl];
            ref.rhs.segment<3>(rSide + 3 * k) += sys.side_rhs[i].segment<3>(3 * kl);
        }
    }
    return ref;
}

std::pair<MatX3d, MatX3d> closed_reference_step(const SurfaceOperators& ops,
                                                const PhaseParams& params,
                                                const DiscreteState& state, double dt)
{
    const ClosedReferenceSystem ref = closed_reference_system(ops, params, state, dt);
    Eigen::SparseLU<SpMat> lu;
    SpMat A = ref.A;
    A.makeCompressed();
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("closed_reference_step: singular system");
    const VecXd u = lu.solve(ref.rhs);
    return {unflatten(u.segment(3 * ref.K, 3 * ref.K)), unflatten(u.segment(0, 3 * ref.K))};
}

} // namespace memflow
