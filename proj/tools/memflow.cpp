#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "memflow/flow.hpp"
#include "memflow/generators.hpp"
#include "memflow/io.hpp"
#include "memflow/oracle.hpp"
#include "memflow/surface_mesh.hpp"

using namespace memflow;

namespace {

int cmd_run(const std::string& config_path, const std::string& solver,
            const std::string& solver_tol, const std::string& solver_maxit, int steps,
            const std::string& out, const std::string& dump)
{
    SimulationConfig cfg =
        config_path.empty() ? parse_config_text("") : parse_config(config_path);
    if (!solver.empty()) cfg.solver.method = solver_method_from_string(solver);
    if (!solver_tol.empty()) cfg.solver.tol = std::stod(solver_tol);
    if (!solver_maxit.empty()) cfg.solver.maxit = std::stoi(solver_maxit);
    if (steps >= 0) cfg.steps = steps;
    if (!out.empty()) cfg.out_dir = out;
    if (!dump.empty()) cfg.dump_system_dir = dump;

    const auto records = run(cfg);
    const auto& last = records.back();
    std::printf("finished %d step(s): t=%.6g energy=%.10g area=(%.8g, %.8g) volume=%.8g\n",
                last.step, last.time, last.energy, last.area1, last.area2, last.volume);
    std::printf("diagnostics: %s/%s_diagnostics.csv\n", cfg.out_dir.c_str(), cfg.name.c_str());
    return 0;
}

int cmd_verify_sphere_ode(double alpha, double kbar, double r0, double t_end, double dt_ode,
                          const std::string& conserve)
{
    const ConserveMode mode = conserve_from_string(conserve);
    const auto a = sphere_radius_ode(alpha, kbar, mode, r0, t_end, dt_ode);
    const auto b = sphere_radius_ode_energy_route(alpha, kbar, mode, r0, t_end, dt_ode);
    double max_diff = 0.0;
    for (size_t i = 0; i < std::min(a.R.size(), b.R.size()); ++i)
        max_diff = std::max(max_diff, std::abs(a.R[i] - b.R[i]));
    std::printf("# sphere radius under the bending flow (two independent reductions)\n");
    std::printf("# t  R_strong_form  R_energy_descent\n");
    const size_t stride = std::max<size_t>(1, a.t.size() / 20);
    for (size_t i = 0; i < a.R.size(); i += stride)
        std::printf("%.8g %.12g %.12g\n", a.t[i], a.R[i], i < b.R.size() ? b.R[i] : -1.0);
    std::printf("# final: t=%.8g R=%.12g, route disagreement %.3e\n", a.t.back(), a.R.back(),
                max_diff);
    return max_diff < 1e-9 ? 0 : 1;
}

int cmd_verify_gauss_bonnet(const std::string& mesh_path)
{
    const TwoPhaseSurfaceMesh mesh = load_mesh(mesh_path);
    const SurfaceOperators ops = build_operators(mesh, 0.0);
    PhaseParams params;
    const DiscreteState state = initialize_state(mesh, ops, params);
    std::printf("# lumped total-curvature identity per phase:\n");
    std::printf("#   <kappa_gamma, m_i>_gamma + 2 pi chi_i   (-> total Gaussian curvature)\n");
    for (int i = 0; i < 2; ++i) {
        double boundary = 0.0;
        if (mesh.K_gamma() > 0)
            boundary = (ops.gamma_mass.array() *
                        (state.kappa_gamma.array() * state.m[i].array()).rowwise().sum())
                           .sum();
        std::printf("phase %d: boundary term %.10g, chi = %d, total %.10g\n", i + 1, boundary,
                    mesh.topo->euler[i], boundary + 2.0 * M_PI * mesh.topo->euler[i]);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"memflow: two-phase membrane bending flow on triangulated surfaces"};
    app.require_subcommand(1);

    // run
    auto* runc = app.add_subcommand("run", "integrate a configured flow");
    std::string config_path, solver, solver_tol, solver_maxit, out, dump;
    int steps = -1;
    runc->add_option("--config", config_path, "configuration file");
    runc->add_option("--solver", solver, "direct|bicgstab|gmres");
    runc->add_option("--solver-tol", solver_tol, "Krylov relative tolerance");
    runc->add_option("--solver-maxit", solver_maxit, "Krylov iteration cap");
    runc->add_option("--steps", steps, "number of time steps");
    runc->add_option("--out", out, "output directory");
    runc->add_option("--dump-system", dump,
                     "write the first step system in MatrixMarket triplet form");

    // verify
    auto* verify = app.add_subcommand("verify", "independent reference computations");
    verify->require_subcommand(1);
    auto* vode = verify->add_subcommand("sphere-ode", "radius ODE of a sphere");
    double alpha = 1.0, kbar = -0.5, r0 = 1.0, t_end = 0.1, dt_ode = 1e-6;
    std::string conserve = "none";
    vode->add_option("--alpha", alpha);
    vode->add_option("--kappa-bar", kbar);
    vode->add_option("--r0", r0);
    vode->add_option("--t-end", t_end);
    vode->add_option("--dt-ode", dt_ode);
    vode->add_option("--conserve", conserve);
    auto* vgb = verify->add_subcommand("gauss-bonnet", "total-curvature identity of a mesh");
    std::string gb_mesh;
    vgb->add_option("mesh", gb_mesh, "OFF file with phase labels")->required();

    // gen
    auto* gen = app.add_subcommand("gen", "write a generated mesh");
    MeshSource src;
    std::string gen_out = "mesh.off";
    gen->add_option("shape", src.generator, "sphere|twocap|dumbbell|torus-caps")->required();
    gen->add_option("--level", src.level);
    gen->add_option("--radius", src.radius);
    gen->add_option("--ratio", src.ratio);
    gen->add_option("--islands", src.islands);
    gen->add_option("--flatten", src.flatten);
    gen->add_option("--height", src.height);
    gen->add_option("--width", src.width);
    gen->add_option("--neck", src.neck);
    gen->add_option("--split-z", src.split_z);
    gen->add_option("--ring-radius", src.ring_radius);
    gen->add_option("--tube-radius", src.tube_radius);
    gen->add_option("--out", gen_out, "output OFF path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (runc->parsed())
            return cmd_run(config_path, solver, solver_tol, solver_maxit, steps, out, dump);
        if (vode->parsed())
            return cmd_verify_sphere_ode(alpha, kbar, r0, t_end, dt_ode, conserve);
        if (vgb->parsed()) return cmd_verify_gauss_bonnet(gb_mesh);
        if (gen->parsed()) {
            const TwoPhaseSurfaceMesh mesh = generate_mesh(src);
            write_off(mesh, gen_out);
            std::printf("wrote %s: K=%d J=%d K_gamma=%d (J1,J2)=(%d,%d) (K1,K2)=(%d,%d)\n",
                        gen_out.c_str(), mesh.K(), mesh.J(), mesh.K_gamma(),
                        mesh.topo->J_phase(0), mesh.topo->J_phase(1), mesh.topo->K_phase(0),
                        mesh.topo->K_phase(1));
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
