#pragma once

#include <memory>
#include <string>

#include <Eigen/SparseLU>

#include "memflow/assembly.hpp"
#include "memflow/types.hpp"

namespace memflow {

enum class SolverMethod { Automatic, Direct, BiCGSTAB, GMRES };

SolverMethod solver_method_from_string(const std::string& s);
std::string to_string(SolverMethod m);

struct SolverConfig {
    SolverMethod method = SolverMethod::Automatic;
    double tol = 1e-12;
    int maxit = 1000;
    int restart = 50;

    void check() const;
};

/// Sparse LU factorization that names the offending operator when singular.
class SparseFactorization {
public:
    SparseFactorization() = default;

    void factorize(const SpMat& A, const std::string& name);
    VecXd solve(const VecXd& b) const;
    bool ready() const { return ok_; }
    const std::string& name() const { return name_; }

private:
    std::shared_ptr<Eigen::SparseLU<SpMat>> lu_; // shared: factorizations are reused, not copied
    bool ok_ = false;
    std::string name_;
};

SparseFactorization factorize(const SpMat& A, const std::string& name);

/// Block preconditioner for the interface-reduced system: applies the
/// inverses of the stand-alone phase blocks (C0) or of the full block
/// operator including the junction coupling (C1), transferring residuals and
/// corrections across the interface identification by halving/averaging.
class InterfaceBlockPreconditioner {
public:
    InterfaceBlockPreconditioner() = default;

    void attach(const BlockSystem* sys, const SparseFactorization* b1,
                const SparseFactorization* b2, const SparseFactorization* full);

    template <typename MatrixType>
    InterfaceBlockPreconditioner& analyzePattern(const MatrixType&) { return *this; }
    template <typename MatrixType>
    InterfaceBlockPreconditioner& factorize(const MatrixType&) { return *this; }
    template <typename MatrixType>
    InterfaceBlockPreconditioner& compute(const MatrixType&) { return *this; }
    template <typename Rhs>
    VecXd solve(const Rhs& b) const { return apply(VecXd(b)); }
    Eigen::ComputationInfo info() const { return Eigen::Success; }

    VecXd apply(const VecXd& r) const;

private:
    const BlockSystem* sys_ = nullptr;
    const SparseFactorization* blu_[2] = {nullptr, nullptr};
    const SparseFactorization* full_ = nullptr;

    double phase_weight(int i, Index k) const;
    VecXd expand(const VecXd& r, int i) const;
    void restrict_into(const VecXd& z, int i, VecXd& u) const;
};

struct SolveReport {
    int iterations = 0;
    std::string method;
    bool fallback = false;
    double residual = 0.0;
};

/// Solves the coupled step system: preconditioned Krylov by default with a
/// sparse direct fallback, or a direct solve on request. One instance per
/// assembled system; repeated solves reuse all factorizations.
class CoupledSolver {
public:
    CoupledSolver(const BlockSystem& sys, SolverConfig cfg);

    VecXd solve(const VecXd& rhs, SolveReport* report = nullptr) const;

    SolverMethod effective_method() const { return effective_; }

private:
    const BlockSystem* sys_;
    SolverConfig cfg_;
    SolverMethod effective_;
    std::array<SparseFactorization, 2> block_lu_;
    SparseFactorization full_lu_;
    mutable SparseFactorization direct_;
    mutable bool have_direct_ = false;
    InterfaceBlockPreconditioner precond_;

    const SparseFactorization& direct_factorization() const;
};

} // namespace memflow
