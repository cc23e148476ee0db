#pragma once

#include <Eigen/Dense>
#include <memory>

#include "oseen/sparse.hpp"

namespace oseen {

struct SolveReport {
    double relative_residual = 0.0;
    long fill_nnz = 0;  // nonzeros in the L+U factors
    bool success = false;
};

/// Direct sparse LU (partial pivoting, fill-reducing column ordering).
/// The factorisation is immutable after construction; `refactorize` reuses
/// the symbolic analysis for a matrix with the same sparsity pattern, which
/// the time loop relies on.
class LuFactorisation {
  public:
    explicit LuFactorisation(const SparseMatrix& a);
    ~LuFactorisation();
    LuFactorisation(LuFactorisation&&) noexcept;
    LuFactorisation& operator=(LuFactorisation&&) noexcept;

    void refactorize(const SparseMatrix& a);

    Eigen::VectorXd solve(const Eigen::VectorXd& b, SolveReport* report = nullptr) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SparseMatrix matrix_;  // kept for residual reporting
};

Eigen::VectorXd lu_solve(const SparseMatrix& a, const Eigen::VectorXd& b,
                         SolveReport* report = nullptr);

}  // namespace oseen
