#include "memflow/multipliers.hpp"

#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace memflow {

MatX3d interior_projection(const SurfaceOperators& ops, int phase, const MatX3d& field)
{
    const MeshTopology& topo = *ops.mesh->topo;
    const int i = phase - 1;
    MatX3d out = field;
    for (Index g = 0; g < topo.K_gamma(); ++g)
        out.row(topo.global_to_phase[i][topo.gamma_vertices[g]]).setZero();
    return out;
}

double a_form(const SurfaceOperators& ops, int phase, const MatX3d& zeta, const MatX3d& eta)
{
    const MeshTopology& topo = *ops.mesh->topo;
    const int i = phase - 1;
    double s = 0.0;
    for (Index kl = 0; kl < topo.K_phase(i); ++kl) {
        if (topo.vertex_on_gamma(topo.phase_vertices[i][kl])) continue;
        const Vec3d qz = ops.Q[i].q[kl] * zeta.row(kl).transpose();
        s += ops.mass_phase[i][kl] * qz.dot(eta.row(kl));
    }
    return s;
}

Mat3d multiplier_matrix(const SurfaceOperators& ops, const std::array<MatX3d, 2>& kappa)
{
    const MeshTopology& topo = *ops.mesh->topo;
    Mat3d M = Mat3d::Zero();
    for (int i = 0; i < 2; ++i) {
        if (topo.K_phase(i) == 0) continue;
        const MatX3d& omega = ops.normals.omega_phase[i];
        M(0, 0) += a_form(ops, i + 1, omega, omega);
        const double ako = a_form(ops, i + 1, kappa[i], omega);
        M(0, 1 + i) = M(1 + i, 0) = ako;
        M(1 + i, 1 + i) = a_form(ops, i + 1, kappa[i], kappa[i]);
    }
    return M;
}

Vec3d solve_multiplier_system(const Mat3d& M, const Vec3d& b, ConserveMode mode)
{
    auto fail = [&](const char* what) {
        std::ostringstream os;
        os << "multiplier system " << what
           << "; interior projections of the vertex normals and weighted curvatures "
              "are linearly dependent";
        throw std::runtime_error(os.str());
    };

    Vec3d lam = Vec3d::Zero();
    switch (mode) {
    case ConserveMode::None:
        return lam;
    case ConserveMode::Volume:
        // The first unknown of the system is -lambda^V.
        if (!(M(0, 0) > 0.0)) fail("is singular");
        lam[0] = -b[0] / M(0, 0);
        return lam;
    case ConserveMode::Area:
        for (int i = 0; i < 2; ++i) {
            if (M(1 + i, 1 + i) == 0.0 && b[1 + i] == 0.0) continue;
            if (!(M(1 + i, 1 + i) > 0.0)) fail("area block is singular");
            lam[1 + i] = b[1 + i] / M(1 + i, 1 + i);
        }
        return lam;
    case ConserveMode::VolumeArea: {
        Eigen::LLT<Mat3d> llt(M);
        if (llt.info() != Eigen::Success) fail("is not positive definite");
        const Vec3d x = llt.solve(b);
        lam[0] = -x[0];
        lam[1] = x[1];
        lam[2] = x[2];
        return lam;
    }
    }
    return lam;
}

Vec3d multiplier_rhs(const SurfaceOperators& ops, const BlockSystem& sys,
                     const MatX3d& velocity, const std::array<MatX3d, 2>& Y,
                     const std::array<MatX3d, 2>& kappa, const std::array<MatX3d, 2>& m)
{
    const MeshTopology& topo = *ops.mesh->topo;
    Vec3d b = Vec3d::Zero();
    const bool have_velocity = velocity.rows() == topo.K();

    for (int i = 0; i < 2; ++i) {
        if (topo.K_phase(i) == 0) continue;
        const MatX3d& omega = ops.normals.omega_phase[i];

        // Interface rows of the lagged velocity (the interior projection
        // minus the identity is supported there).
        double v_omega = 0.0, v_qkappa = 0.0, m_v = 0.0;
        if (have_velocity) {
            for (Index g = 0; g < topo.K_gamma(); ++g) {
                const Index k = topo.gamma_vertices[g];
                const Index kl = topo.global_to_phase[i][k];
                const Vec3d v = velocity.row(k);
                v_omega += ops.mass_phase[i][kl] * v.dot(omega.row(kl));
                v_qkappa += ops.mass_phase[i][kl] *
                            v.dot(ops.Q[i].q[kl] * kappa[i].row(kl).transpose());
                m_v += ops.gamma_mass[g] * v.dot(m[i].row(g));
            }
        }

        const MatX3d proj_omega = interior_projection(ops, i + 1, omega);
        const MatX3d proj_kappa = interior_projection(ops, i + 1, kappa[i]);
        const MatX3d A_pomega =
            ops.stiffness[i] * extend_from_phase(ops, i + 1, proj_omega);
        const MatX3d A_pkappa =
            ops.stiffness[i] * extend_from_phase(ops, i + 1, proj_kappa);

        double grad_omega = 0.0, grad_kappa = 0.0, f_omega = 0.0, f_kappa = 0.0;
        for (Index kl = 0; kl < topo.K_phase(i); ++kl) {
            const Index k = topo.phase_vertices[i][kl];
            grad_omega += Y[i].row(kl).dot(A_pomega.row(k));
            grad_kappa += Y[i].row(kl).dot(A_pkappa.row(k));
            if (!topo.vertex_on_gamma(k)) {
                const Vec3d f = sys.flow_forcing_phase[i].segment<3>(3 * kl);
                f_omega += f.dot(omega.row(kl));
                f_kappa += f.dot(kappa[i].row(kl));
            }
        }

        b[0] += -v_omega - grad_omega - f_omega;
        b[1 + i] = -v_qkappa + m_v - grad_kappa - f_kappa;
    }
    return b;
}

Vec3d explicit_multipliers(const SurfaceOperators& ops, const BlockSystem& sys,
                           const DiscreteState& state, ConserveMode mode)
{
    if (mode == ConserveMode::None) return Vec3d::Zero();
    const Mat3d M = multiplier_matrix(ops, state.kappa);
    const Vec3d b = multiplier_rhs(ops, sys, state.velocity_prev, state.Y, state.kappa, state.m);
    return solve_multiplier_system(M, b, mode);
}

std::array<MatX3d, 2> updated_curvature(const SurfaceOperators& ops, const PhaseParams& params,
                                        const std::array<MatX3d, 2>& Y_new)
{
    const MeshTopology& topo = *ops.mesh->topo;
    std::array<MatX3d, 2> kap;
    for (int i = 0; i < 2; ++i) {
        kap[i].resize(topo.K_phase(i), 3);
        for (Index kl = 0; kl < topo.K_phase(i); ++kl) {
            const Vec3d qy = ops.Q[i].q[kl] * Y_new[i].row(kl).transpose();
            kap[i].row(kl) = qy.transpose() / params.alpha[i] +
                             params.kappa_bar[i] * ops.normals.omega_phase[i].row(kl);
        }
    }
    return kap;
}

ImplicitResult implicit_multiplier_step(const SurfaceOperators& ops, const BlockSystem& sys,
                                        const CoupledSolver& solver, const PhaseParams& params,
                                        const DiscreteState& state)
{
    ImplicitResult res;
    res.lambda = state.lambda;

    MatX3d X_iter = state.X; // positions entering the area multiplier term
    std::deque<double> recent;
    std::vector<double> history;

    for (int pass = 0; pass < params.fixedpoint_maxit; ++pass) {
        const VecXd rhs = compose_rhs(sys, res.lambda, X_iter);
        SolveReport rep;
        const VecXd u = solver.solve(rhs, &rep);
        res.krylov_total += rep.iterations;
        res.sol = split_solution(sys, u);
        res.kappa_new = updated_curvature(ops, params, res.sol.Y);
        res.passes = pass + 1;

        const MatX3d velocity = res.sol.dX / sys.dt;
        const Mat3d M = multiplier_matrix(ops, res.kappa_new);
        const Vec3d b = multiplier_rhs(ops, sys, velocity, res.sol.Y, res.kappa_new, res.sol.m);
        const Vec3d lam_new = solve_multiplier_system(M, b, params.conserve);

        const double diff = (lam_new - res.lambda).cwiseAbs().sum();
        res.lambda = lam_new;
        X_iter = state.X + res.sol.dX;
        history.push_back(diff);
        if (diff < params.fixedpoint_tol) return res;

        recent.push_back(diff);
        if (recent.size() > 5) recent.pop_front();
        if (recent.size() == 5) {
            bool growing = true;
            for (size_t j = 1; j < recent.size(); ++j)
                if (recent[j] <= recent[j - 1]) { growing = false; break; }
            if (growing) {
                std::ostringstream os;
                os << "implicit multipliers diverging; increments:";
                for (double d : history) os << " " << d;
                throw std::runtime_error(os.str());
            }
        }
    }
    std::ostringstream os;
    os << "implicit multipliers did not converge in " << params.fixedpoint_maxit
       << " passes; increments:";
    for (double d : history) os << " " << d;
    throw std::runtime_error(os.str());
}

} // namespace memflow
