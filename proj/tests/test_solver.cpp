#include <doctest.h>

#include <random>

#include <Eigen/IterativeLinearSolvers>

#include "memflow/assembly.hpp"
#include "memflow/flow.hpp"
#include "memflow/generators.hpp"
#include "memflow/oracle.hpp"
#include "memflow/solver.hpp"
#include "test_helpers.hpp"

using namespace memflow;

namespace {

BlockSystem make_system(const TwoPhaseSurfaceMesh& mesh, const SurfaceOperators& ops,
                        PhaseParams& params)
{
    const DiscreteState st = initialize_state(mesh, ops, params);
    return assemble_coupled_system(ops, params, st, params.dt);
}

} // namespace

TEST_CASE("factorize: identity, zero row, assembled blocks")
{
    SpMat I(5, 5);
    I.setIdentity();
    const SparseFactorization f = factorize(I, "identity");
    VecXd b(5);
    b << 1, 2, 3, 4, 5;
    CHECK((f.solve(b) - b).norm() == 0.0);

    SpMat Z = I;
    Z.coeffRef(2, 2) = 0.0;
    Z.prune(0.0);
    CHECK_THROWS_WITH_AS(factorize(Z, "zero-row"), doctest::Contains("zero-row"),
                         std::runtime_error);

    const TwoPhaseSurfaceMesh mesh = gen_twocap(2, 1.0);
    const SurfaceOperators ops = build_operators(mesh, 0.0);
    PhaseParams params;
    const DiscreteState st = initialize_state(mesh, ops, params);
    for (int phase : {1, 2}) {
        const PhaseBlock blk = assemble_phase_block(ops, params, st, phase, params.dt);
        CHECK_NOTHROW(factorize(blk.B, "phase block"));
    }
}

TEST_CASE("Krylov paths: zero rhs, preconditioned convergence, direct agreement")
{
    std::mt19937 rng(53);
    std::normal_distribution<double> n01(0.0, 1.0);

    int checked = 0;
    for (bool c1 : {false, true}) {
        for (int variant = 0; variant < 5; ++variant) {
            const TwoPhaseSurfaceMesh mesh =
                (variant % 2) ? gen_twocap(2, 0.5) : gen_twocap(2, 1.0);
            PhaseParams params;
            params.c1 = c1;
            params.kappa_bar = {-1.0 - 0.2 * variant, -0.25};
            params.line_tension = 0.1 * variant;
            params.rho = (variant % 2) ? 2.0 : 0.0;
            const SurfaceOperators ops = build_operators(mesh, 0.0);
            const BlockSystem sys = make_system(mesh, ops, params);

            SolverConfig kcfg; // automatic: bicgstab for C0, gmres for C1
            const CoupledSolver krylov(sys, kcfg);
            CHECK(krylov.effective_method() ==
                  (c1 ? SolverMethod::GMRES : SolverMethod::BiCGSTAB));

            SolveReport rep;
            const VecXd x0 = krylov.solve(VecXd::Zero(sys.map.n), &rep);
            CHECK(x0.norm() == 0.0);
            CHECK(rep.iterations == 0);

            VecXd b(sys.map.n);
            for (Index r = 0; r < sys.map.n; ++r) b[r] = n01(rng);
            const VecXd xk = krylov.solve(b, &rep);
            CHECK(!rep.fallback);
            CHECK(rep.iterations <= 10);

            SolverConfig dcfg;
            dcfg.method = SolverMethod::Direct;
            const CoupledSolver direct(sys, dcfg);
            const VecXd xd = direct.solve(b);
            CHECK((xd - xk).norm() <= 1e-8 * xd.norm());
            ++checked;
        }
    }
    CHECK(checked == 10);
}

TEST_CASE("repeated solves with one factorization are bit-identical")
{
    const TwoPhaseSurfaceMesh mesh = gen_twocap(2, 1.0);
    PhaseParams params;
    const SurfaceOperators ops = build_operators(mesh, 0.0);
    const BlockSystem sys = make_system(mesh, ops, params);
    SolverConfig cfg;
    cfg.method = SolverMethod::Direct;
    const CoupledSolver solver(sys, cfg);
    std::mt19937 rng(59);
    std::normal_distribution<double> n01(0.0, 1.0);
    VecXd b(sys.map.n);
    for (Index r = 0; r < sys.map.n; ++r) b[r] = n01(rng);
    const VecXd x1 = solver.solve(b);
    const VecXd x2 = solver.solve(b);
    CHECK((x1 - x2).norm() == 0.0);
}

TEST_CASE("without the block preconditioner the Krylov solver stalls")
{
    const TwoPhaseSurfaceMesh mesh = gen_twocap(2, 1.0);
    PhaseParams params;
    params.kappa_bar = {-1.0, -0.5};
    const SurfaceOperators ops = build_operators(mesh, 0.0);
    const DiscreteState st = initialize_state(mesh, ops, params);
    const BlockSystem sys = assemble_coupled_system(ops, params, st, params.dt);
    const VecXd b = compose_rhs(sys, Vec3d::Zero(), st.X);

    Eigen::BiCGSTAB<SpMat, Eigen::IdentityPreconditioner> plain;
    plain.setTolerance(1e-12);
    plain.setMaxIterations(1000);
    plain.compute(sys.reduced);
    const VecXd x = plain.solve(b);
    const bool converged =
        plain.info() == Eigen::Success && (sys.reduced * x - b).norm() <= 1e-10 * b.norm();
    CHECK(!converged);
}

TEST_CASE("dense reference agrees with the sparse paths")
{
    std::mt19937 rng(61);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int variant = 0; variant < 10; ++variant) {
        const TwoPhaseSurfaceMesh mesh = gen_twocap(2, variant % 2 ? 1.0 : 0.4);
        PhaseParams params;
        params.c1 = variant % 3 == 0;
        params.kappa_bar = {-0.5 - 0.1 * variant, 0.1 * variant};
        const SurfaceOperators ops = build_operators(mesh, 0.0);
        const BlockSystem sys = make_system(mesh, ops, params);
        VecXd b(sys.map.n);
        for (Index r = 0; r < sys.map.n; ++r) b[r] = n01(rng);
        SolverConfig cfg;
        cfg.method = SolverMethod::Direct;
        const VecXd xs = CoupledSolver(sys, cfg).solve(b);
        const VecXd xd = dense_reference_solve(sys, b);
        CHECK((xs - xd).norm() <= 1e-10 * xd.norm());
    }

    // permuting the unknown ordering permutes the solution
    const TwoPhaseSurfaceMesh mesh = gen_twocap(2, 1.0);
    PhaseParams params;
    const SurfaceOperators ops = build_operators(mesh, 0.0);
    const BlockSystem sys = make_system(mesh, ops, params);
    VecXd b(sys.map.n);
    for (Index r = 0; r < sys.map.n; ++r) b[r] = n01(rng);
    const VecXd x = dense_reference_solve(sys, b);
    Eigen::PermutationMatrix<Eigen::Dynamic> P(sys.map.n);
    P.setIdentity();
    std::shuffle(P.indices().data(), P.indices().data() + sys.map.n, rng);
    BlockSystem permuted = sys;
    permuted.reduced = sys.reduced.twistedBy(P);
    const VecXd xp = dense_reference_solve(permuted, P * b);
    CHECK((P * x - xp).norm() <= 1e-9 * x.norm());
}
