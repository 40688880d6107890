#include "memflow/flow.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <Eigen/Dense>

#include <unsupported/Eigen/SparseExtra>

#include "memflow/generators.hpp"
#include "memflow/io.hpp"

namespace memflow {

bool DiscreteState::finite() const
{
    auto ok = [](const MatX3d& f) { return f.allFinite(); };
    return ok(X) && ok(Y[0]) && ok(Y[1]) && ok(kappa[0]) && ok(kappa[1]) && ok(m[0]) &&
           ok(m[1]) && ok(kappa_gamma) && ok(Phi) && lambda.allFinite();
}

SphereFit fit_sphere(const MatX3d& points)
{
    SphereFit fit;
    const Index n = points.rows();
    if (n < 4) return fit;
    Eigen::MatrixXd A(n, 4);
    VecXd rhs(n);
    for (Index k = 0; k < n; ++k) {
        A.row(k) << 2.0 * points(k, 0), 2.0 * points(k, 1), 2.0 * points(k, 2), 1.0;
        rhs[k] = points.row(k).squaredNorm();
    }
    const Eigen::Vector4d sol = A.colPivHouseholderQr().solve(rhs);
    fit.center = sol.head<3>();
    const double r2 = sol[3] + fit.center.squaredNorm();
    if (!(r2 > 0.0)) return fit;
    fit.radius = std::sqrt(r2);
    fit.residual = 0.0;
    for (Index k = 0; k < n; ++k)
        fit.residual = std::max(
            fit.residual, std::abs((points.row(k).transpose() - fit.center).norm() - fit.radius));
    fit.ok = fit.residual < 1e-6 * fit.radius;
    return fit;
}

DiscreteState initialize_state(const TwoPhaseSurfaceMesh& mesh, const SurfaceOperators& ops,
                               const PhaseParams& params)
{
    const MeshTopology& topo = *mesh.topo;
    DiscreteState st;
    st.X = mesh.vertices;
    st.velocity_prev = MatX3d::Zero(topo.K(), 3);

    const Index Kg = topo.K_gamma();
    for (int i = 0; i < 2; ++i)
        st.m[i] = Kg > 0 ? weak_conormal_init(mesh, ops.normals, i + 1) : MatX3d(0, 3);

    for (int i = 0; i < 2; ++i) {
        const Index Ki = topo.K_phase(i);
        st.kappa[i].resize(Ki, 3);
        if (Ki == 0) continue;
        MatX3d pts(Ki, 3);
        for (Index kl = 0; kl < Ki; ++kl) pts.row(kl) = mesh.vertices.row(topo.phase_vertices[i][kl]);
        const SphereFit fit = fit_sphere(pts);
        if (fit.ok) {
            st.kappa[i] = -(2.0 / fit.radius) * ops.normals.omega_phase[i];
        } else {
            const MatX3d AX = ops.stiffness[i] * st.X;
            for (Index kl = 0; kl < Ki; ++kl) {
                const Index k = topo.phase_vertices[i][kl];
                Vec3d r = -AX.row(k);
                const Index g = topo.global_to_gamma[k];
                if (g >= 0) r += ops.gamma_mass[g] * st.m[i].row(g);
                st.kappa[i].row(kl) = r / ops.mass_phase[i][kl];
            }
        }
        st.Y[i] = params.alpha[i] *
                  (st.kappa[i] - params.kappa_bar[i] * ops.normals.omega_phase[i]);
    }

    if (Kg > 0) {
        MatX3d Xg(Kg, 3);
        for (Index g = 0; g < Kg; ++g) Xg.row(g) = mesh.vertices.row(topo.gamma_vertices[g]);
        const MatX3d AgX = ops.gamma_stiffness * Xg;
        st.kappa_gamma = -(AgX.array().colwise() / ops.gamma_mass.array()).matrix();
    } else {
        st.kappa_gamma.resize(0, 3);
    }
    st.Phi = MatX3d::Zero(Kg, 3);
    return st;
}

double discrete_energy(const SurfaceOperators& ops, const PhaseParams& params,
                       const std::array<MatX3d, 2>& kappa, const std::array<MatX3d, 2>& m,
                       const MatX3d& kappa_gamma)
{
    const MeshTopology& topo = *ops.mesh->topo;
    double E = 0.0;
    for (Index j = 0; j < topo.J(); ++j) {
        const int i = topo.tri_phase[j] - 1;
        const Vec3d nu = ops.face_normal.row(j);
        double s = 0.0;
        for (int c = 0; c < 3; ++c) {
            const Index kl = topo.global_to_phase[i][topo.triangles(j, c)];
            s += (kappa[i].row(kl).transpose() - params.kappa_bar[i] * nu).squaredNorm();
        }
        E += 0.5 * params.alpha[i] * (ops.face_area[j] / 3.0) * s;
    }
    for (int i = 0; i < 2; ++i) {
        if (topo.K_phase(i) == 0) continue;
        double boundary = 0.0;
        if (topo.K_gamma() > 0)
            boundary = (ops.gamma_mass.array() *
                        (kappa_gamma.array() * m[i].array()).rowwise().sum())
                           .sum();
        E += params.alphaG[i] * (boundary + 2.0 * M_PI * topo.euler[i]);
    }
    E += params.line_tension * ops.gamma_length();
    return E;
}

double conformality_residual(const SurfaceOperators& ops, const MatX3d& X_new)
{
    const MeshTopology& topo = *ops.mesh->topo;
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        if (topo.K_phase(i) == 0) continue;
        const MatX3d AX = ops.stiffness[i] * X_new;
        double h1 = 0.0;
        for (Index kl = 0; kl < topo.K_phase(i); ++kl) {
            const Index k = topo.phase_vertices[i][kl];
            h1 += ops.mass_phase[i][kl] * X_new.row(k).squaredNorm();
            h1 += X_new.row(k).dot(AX.row(k));
        }
        h1 = std::sqrt(std::max(h1, 0.0));
        double res = 0.0;
        for (Index kl = 0; kl < topo.K_phase(i); ++kl) {
            const Index k = topo.phase_vertices[i][kl];
            if (topo.vertex_on_gamma(k)) continue;
            const Vec3d w = ops.normals.omega_phase[i].row(kl).normalized();
            const Vec3d r = AX.row(k);
            res = std::max(res, (r - r.dot(w) * w).norm());
        }
        worst = std::max(worst, res / std::max(h1, 1e-300));
    }
    return worst;
}

DiagnosticsRecord initial_diagnostics(const TwoPhaseSurfaceMesh& mesh,
                                      const SurfaceOperators& ops, const PhaseParams& params,
                                      const DiscreteState& state)
{
    DiagnosticsRecord d;
    d.step = 0;
    d.time = 0.0;
    d.energy = discrete_energy(ops, params, state.kappa, state.m, state.kappa_gamma);
    d.area1 = surface_area(mesh, 1);
    d.area2 = surface_area(mesh, 2);
    d.gamma_length = ops.gamma_length();
    d.volume = enclosed_volume(mesh);
    return d;
}

TimeStepResult time_step(const DiscreteState& state, const TwoPhaseSurfaceMesh& mesh,
                         const PhaseParams& params, const SolverConfig& solver_cfg)
{
    params.check();
    const SurfaceOperators ops = build_operators(mesh, params.theta);
    const BlockSystem sys = assemble_coupled_system(ops, params, state, params.dt);
    const CoupledSolver solver(sys, solver_cfg);

    TimeStepResult out;
    Vec3d lambda = Vec3d::Zero();
    StepSolution sol;
    std::array<MatX3d, 2> kappa_new;
    int passes = 0;
    int krylov = 0;

    if (params.conserve == ConserveMode::None ||
        params.multiplier_mode == MultiplierMode::Explicit) {
        lambda = explicit_multipliers(ops, sys, state, params.conserve);
        const VecXd rhs = compose_rhs(sys, lambda, state.X);
        SolveReport rep;
        const VecXd u = solver.solve(rhs, &rep);
        out.solve = rep;
        krylov = rep.iterations;
        sol = split_solution(sys, u);
        kappa_new = updated_curvature(ops, params, sol.Y);
    } else {
        ImplicitResult res = implicit_multiplier_step(ops, sys, solver, params, state);
        sol = std::move(res.sol);
        kappa_new = std::move(res.kappa_new);
        lambda = res.lambda;
        passes = res.passes;
        krylov = res.krylov_total;
    }

    const MatX3d X_new = state.X + sol.dX;
    out.conformality = conformality_residual(ops, X_new);

    // Energy of the produced time level, evaluated on the carrying surface.
    const double energy = discrete_energy(ops, params, kappa_new, sol.m, sol.kappa_gamma);

    out.mesh = mesh.with_positions(X_new);
    {
        // Degeneration check after the move.
        const ValidationReport rep = validate(out.mesh, params.c1, params.theta);
        if (!rep.checks.empty() && !rep.checks[0].pass)
            throw std::runtime_error("time_step: mesh degenerated (" +
                                     rep.checks[0].detail + ")");
        vertex_normals(out.mesh); // throws on vanishing averaged normals
    }

    out.state.X = X_new;
    out.state.Y = sol.Y;
    out.state.kappa = kappa_new;
    out.state.m = sol.m;
    out.state.kappa_gamma = sol.kappa_gamma;
    out.state.Phi = sol.Phi;
    out.state.lambda = lambda;
    out.state.velocity_prev = sol.dX / params.dt;
    out.state.time = state.time + params.dt;
    out.state.step = state.step + 1;
    if (!out.state.finite())
        throw std::runtime_error("time_step: non-finite field after solve");

    DiagnosticsRecord d;
    d.step = out.state.step;
    d.time = out.state.time;
    d.energy = energy;
    d.area1 = surface_area(out.mesh, 1);
    d.area2 = surface_area(out.mesh, 2);
    {
        double len = 0.0;
        for (const auto& ge : mesh.topo->gamma_edges)
            len += (X_new.row(ge.b) - X_new.row(ge.a)).norm();
        d.gamma_length = len;
    }
    d.volume = enclosed_volume(out.mesh);
    d.lambdaV = lambda[0];
    d.lambdaA1 = lambda[1];
    d.lambdaA2 = lambda[2];
    d.krylov_iters = krylov;
    d.fp_passes = passes;
    out.diag = d;
    return out;
}

std::vector<DiagnosticsRecord> run(const SimulationConfig& config)
{
    namespace fs = std::filesystem;
    const PhaseParams& params = config.params;
    params.check();

    TwoPhaseSurfaceMesh mesh = config.mesh.file.empty() ? generate_mesh(config.mesh)
                                                        : load_mesh(config.mesh.file);
    {
        const ValidationReport rep = validate(mesh, params.c1, params.theta);
        if (!rep.all_pass())
            throw std::runtime_error("run: mesh fails validation\n" + rep.summary());
    }

    fs::create_directories(config.out_dir);
    const std::string stem = (fs::path(config.out_dir) / config.name).string();

    SurfaceOperators ops0 = build_operators(mesh, params.theta);
    DiscreteState state = initialize_state(mesh, ops0, params);

    std::vector<DiagnosticsRecord> records;
    records.push_back(initial_diagnostics(mesh, ops0, params, state));

    const std::string csv_path = stem + "_diagnostics.csv";
    write_csv(records, csv_path);
    write_vtk(mesh, state, stem + "_0.vtk");

    SolverConfig scfg = config.solver;
    for (int s = 0; s < config.steps; ++s) {
        try {
            if (!config.dump_system_dir.empty() && s == 0) {
                const SurfaceOperators ops = build_operators(mesh, params.theta);
                const BlockSystem sys = assemble_coupled_system(ops, params, state, params.dt);
                fs::create_directories(config.dump_system_dir);
                Eigen::saveMarket(sys.reduced,
                                  (fs::path(config.dump_system_dir) / "system.mtx").string());
                Eigen::saveMarketVector(
                    compose_rhs(sys, Vec3d::Zero(), state.X),
                    (fs::path(config.dump_system_dir) / "rhs.mtx").string());
            }
            TimeStepResult r = time_step(state, mesh, params, scfg);
            state = std::move(r.state);
            mesh = std::move(r.mesh);
            records.push_back(r.diag);
            append_csv(r.diag, csv_path);
            if (config.cadence > 0 && r.diag.step % config.cadence == 0)
                write_vtk(mesh, state, stem + "_" + std::to_string(r.diag.step) + ".vtk");
            if (config.stop_velocity > 0.0 &&
                state.velocity_prev.rowwise().norm().maxCoeff() < config.stop_velocity)
                break;
        } catch (const std::exception&) {
            write_vtk(mesh, state, stem + "_abort.vtk");
            throw;
        }
    }
    write_vtk(mesh, state, stem + "_final.vtk");
    return records;
}

} // namespace memflow
