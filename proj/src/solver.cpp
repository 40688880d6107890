#include "memflow/solver.hpp"

#include <stdexcept>

#include <Eigen/IterativeLinearSolvers>
#include <unsupported/Eigen/IterativeSolvers>

namespace memflow {

SolverMethod solver_method_from_string(const std::string& s)
{
    if (s == "auto" || s == "automatic") return SolverMethod::Automatic;
    if (s == "direct") return SolverMethod::Direct;
    if (s == "bicgstab") return SolverMethod::BiCGSTAB;
    if (s == "gmres") return SolverMethod::GMRES;
    throw std::invalid_argument("unknown solver method '" + s + "'");
}

std::string to_string(SolverMethod m)
{
    switch (m) {
    case SolverMethod::Automatic: return "auto";
    case SolverMethod::Direct: return "direct";
    case SolverMethod::BiCGSTAB: return "bicgstab";
    case SolverMethod::GMRES: return "gmres";
    }
    return "?";
}

void SolverConfig::check() const
{
    if (!(tol > 0.0)) throw std::invalid_argument("solver: tolerance must be positive");
    if (maxit < 1) throw std::invalid_argument("solver: maxit must be >= 1");
    if (restart < 1) throw std::invalid_argument("solver: restart must be >= 1");
}

void SparseFactorization::factorize(const SpMat& A, const std::string& name)
{
    name_ = name;
    lu_ = std::make_shared<Eigen::SparseLU<SpMat>>();
    SpMat Ac = A;
    Ac.makeCompressed();
    lu_->compute(Ac);
    ok_ = lu_->info() == Eigen::Success;
    if (!ok_)
        throw std::runtime_error("factorize: matrix '" + name +
                                 "' is singular to working precision");
}

VecXd SparseFactorization::solve(const VecXd& b) const
{
    if (!ok_) throw std::logic_error("SparseFactorization::solve before factorize");
    return lu_->solve(b);
}

SparseFactorization factorize(const SpMat& A, const std::string& name)
{
    SparseFactorization f;
    f.factorize(A, name);
    return f;
}

void InterfaceBlockPreconditioner::attach(const BlockSystem* sys, const SparseFactorization* b1,
                                          const SparseFactorization* b2,
                                          const SparseFactorization* full)
{
    sys_ = sys;
    blu_[0] = b1;
    blu_[1] = b2;
    full_ = full;
}

VecXd InterfaceBlockPreconditioner::expand(const VecXd& r, int i) const
{
    const DofMap& map = sys_->map;
    const MeshTopology& topo = *sys_->ops->mesh->topo;
    const PhaseBlock& blk = sys_->phase[i];
    VecXd ri = VecXd::Zero(blk.size());
    for (Index kl = 0; kl < blk.Ki; ++kl) {
        const Index k = topo.phase_vertices[i][kl];
        // Interface flow rows are split in proportion to the phase vertex
        // masses; this reproduces the dominant velocity-mass contribution of
        // each phase row exactly.
        const double w = topo.vertex_on_gamma(k) ? phase_weight(i, k) : 1.0;
        for (int c = 0; c < 3; ++c) {
            ri[3 * kl + c] = w * r[map.row_flow(k, c)];
            ri[blk.oX() + 3 * kl + c] = r[map.row_side(i, kl, c)];
        }
    }
    for (Index g = 0; g < blk.Kg; ++g)
        for (int c = 0; c < 3; ++c) {
            ri[blk.oKG() + 3 * g + c] = r[map.row_e(i, g, c)];
            // the curve rows are duplicated verbatim in the phase blocks, so
            // each copy receives the full residual
            ri[blk.oM() + 3 * g + c] = r[map.row_c(g, c)];
        }
    return ri;
}

double InterfaceBlockPreconditioner::phase_weight(int i, Index k) const
{
    const MeshTopology& topo = *sys_->ops->mesh->topo;
    const double m0 = sys_->ops->mass_phase[0][topo.global_to_phase[0][k]];
    const double m1 = sys_->ops->mass_phase[1][topo.global_to_phase[1][k]];
    return (i == 0 ? m0 : m1) / (m0 + m1);
}

void InterfaceBlockPreconditioner::restrict_into(const VecXd& z, int i, VecXd& u) const
{
    const DofMap& map = sys_->map;
    const MeshTopology& topo = *sys_->ops->mesh->topo;
    const PhaseBlock& blk = sys_->phase[i];
    for (Index kl = 0; kl < blk.Ki; ++kl) {
        const Index k = topo.phase_vertices[i][kl];
        const double w = topo.vertex_on_gamma(k) ? phase_weight(i, k) : 1.0;
        for (int c = 0; c < 3; ++c) {
            u[map.y(i, kl, c)] = z[3 * kl + c];
            u[map.x(k, c)] += w * z[blk.oX() + 3 * kl + c];
        }
    }
    for (Index g = 0; g < blk.Kg; ++g)
        for (int c = 0; c < 3; ++c) {
            u[map.kg(g, c)] += 0.5 * z[blk.oKG() + 3 * g + c];
            u[map.m(i, g, c)] = z[blk.oM() + 3 * g + c];
        }
}

VecXd InterfaceBlockPreconditioner::apply(const VecXd& r) const
{
    const DofMap& map = sys_->map;
    VecXd u = VecXd::Zero(map.n);
    if (map.c1 && full_) {
        const Index n1 = sys_->phase[0].size();
        const Index n2 = sys_->phase[1].size();
        VecXd rf(n1 + n2 + 3 * map.Kg);
        rf.segment(0, n1) = expand(r, 0);
        rf.segment(n1, n2) = expand(r, 1);
        for (Index g = 0; g < map.Kg; ++g)
            for (int c = 0; c < 3; ++c)
                rf[n1 + n2 + 3 * g + c] = r[map.row_d(g, c)];
        const VecXd zf = full_->solve(rf);
        restrict_into(zf.segment(0, n1), 0, u);
        restrict_into(zf.segment(n1, n2), 1, u);
        for (Index g = 0; g < map.Kg; ++g)
            for (int c = 0; c < 3; ++c) u[map.phi(g, c)] = zf[n1 + n2 + 3 * g + c];
        return u;
    }
    for (int i = 0; i < 2; ++i) {
        if (!blu_[i] || !blu_[i]->ready()) continue;
        const VecXd zi = blu_[i]->solve(expand(r, i));
        restrict_into(zi, i, u);
    }
    return u;
}

CoupledSolver::CoupledSolver(const BlockSystem& sys, SolverConfig cfg)
    : sys_(&sys), cfg_(cfg)
{
    cfg_.check();
    effective_ = cfg_.method;
    if (effective_ == SolverMethod::Automatic)
        effective_ = sys.map.c1 ? SolverMethod::GMRES : SolverMethod::BiCGSTAB;

    if (effective_ == SolverMethod::Direct) {
        direct_factorization();
        return;
    }
    if (sys.map.c1) {
        full_lu_.factorize(sys.precond_full, "coupled block operator");
        precond_.attach(sys_, nullptr, nullptr, &full_lu_);
    } else {
        for (int i = 0; i < 2; ++i)
            if (sys.phase[i].size() > 0)
                block_lu_[i].factorize(sys.precond_phase[i],
                                       "phase " + std::to_string(i + 1) + " block");
        precond_.attach(sys_, block_lu_[0].ready() ? &block_lu_[0] : nullptr,
                        block_lu_[1].ready() ? &block_lu_[1] : nullptr, nullptr);
    }
}

const SparseFactorization& CoupledSolver::direct_factorization() const
{
    if (!have_direct_) {
        direct_.factorize(sys_->reduced, "reduced coupled system");
        have_direct_ = true;
    }
    return direct_;
}

namespace {

template <typename Solver>
VecXd run_krylov(Solver& solver, const SpMat& A, const VecXd& rhs,
                 const InterfaceBlockPreconditioner& pc, const SolverConfig& cfg,
                 int& iters, bool& ok)
{
    solver.preconditioner() = pc;
    solver.setTolerance(cfg.tol);
    solver.setMaxIterations(cfg.maxit);
    solver.compute(A);
    const VecXd x = solver.solve(rhs);
    iters = static_cast<int>(solver.iterations());
    ok = solver.info() == Eigen::Success;
    return x;
}

} // namespace

VecXd CoupledSolver::solve(const VecXd& rhs, SolveReport* report) const
{
    SolveReport rep;
    const SpMat& A = sys_->reduced;
    const double bnorm = rhs.norm();

    VecXd x;
    bool ok = false;
    if (effective_ == SolverMethod::Direct) {
        x = direct_factorization().solve(rhs);
        rep.method = "direct";
        ok = true;
    } else if (bnorm == 0.0) {
        x = VecXd::Zero(rhs.size());
        rep.method = to_string(effective_);
        ok = true;
    } else if (effective_ == SolverMethod::BiCGSTAB) {
        Eigen::BiCGSTAB<SpMat, InterfaceBlockPreconditioner> solver;
        x = run_krylov(solver, A, rhs, precond_, cfg_, rep.iterations, ok);
        rep.method = "bicgstab";
    } else {
        Eigen::GMRES<SpMat, InterfaceBlockPreconditioner> solver;
        solver.set_restart(cfg_.restart);
        x = run_krylov(solver, A, rhs, precond_, cfg_, rep.iterations, ok);
        rep.method = "gmres";
    }

    double res = bnorm > 0.0 ? (A * x - rhs).norm() / bnorm : (A * x).norm();
    if (!ok || !std::isfinite(res) || res > 1e3 * cfg_.tol) {
        // Krylov stagnated; fall back to the direct factorization.
        x = direct_factorization().solve(rhs);
        res = bnorm > 0.0 ? (A * x - rhs).norm() / bnorm : (A * x).norm();
        rep.fallback = effective_ != SolverMethod::Direct;
        rep.method = rep.fallback ? rep.method + "+direct" : rep.method;
        if (!std::isfinite(res) || res > 1e-8)
            throw std::runtime_error("solve_coupled: direct fallback residual " +
                                     std::to_string(res) + " exceeds tolerance");
    }
    rep.residual = res;
    if (report) *report = rep;
    return x;
}

} // namespace memflow
