#include "oseen/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <stdexcept>

namespace oseen {

namespace {

Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> rm(a.rows, a.cols);
    rm.reserve(a.nnz());
    Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> map(
        a.rows, a.cols, a.nnz(), a.row_offsets.data(), a.col_indices.data(), a.values.data());
    return Eigen::SparseMatrix<double>(map);
}

}  // namespace

struct LuFactorisation::Impl {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
};

LuFactorisation::LuFactorisation(const SparseMatrix& a) : impl_(new Impl), matrix_(a) {
    if (a.rows != a.cols) throw std::runtime_error("lu_factor: matrix must be square");
    refactorize(a);
}

LuFactorisation::~LuFactorisation() = default;
LuFactorisation::LuFactorisation(LuFactorisation&&) noexcept = default;
LuFactorisation& LuFactorisation::operator=(LuFactorisation&&) noexcept = default;

void LuFactorisation::refactorize(const SparseMatrix& a) {
    if (a.rows != a.cols) throw std::runtime_error("lu_factor: matrix must be square");
    matrix_ = a;
    Eigen::SparseMatrix<double> m = to_eigen(a);
    if (!impl_->analyzed) {
        impl_->lu.analyzePattern(m);
        impl_->analyzed = true;
    }
    impl_->lu.factorize(m);
    if (impl_->lu.info() != Eigen::Success)
        throw std::runtime_error("SingularMatrix: " + impl_->lu.lastErrorMessage());
}

Eigen::VectorXd LuFactorisation::solve(const Eigen::VectorXd& b, SolveReport* report) const {
    if (b.size() != matrix_.rows)
        throw std::runtime_error("DimensionMismatch: rhs length does not match matrix");
    Eigen::VectorXd x = impl_->lu.solve(b);
    if (report) {
        double bnorm = b.norm();
        double rnorm = (matrix_.apply(x) - b).norm();
        report->relative_residual = bnorm > 0 ? rnorm / bnorm : rnorm;
        report->fill_nnz = static_cast<long>(impl_->lu.nnzL()) + impl_->lu.nnzU();
        report->success = impl_->lu.info() == Eigen::Success;
    }
    return x;
}

Eigen::VectorXd lu_solve(const SparseMatrix& a, const Eigen::VectorXd& b, SolveReport* report) {
    LuFactorisation lu(a);
    return lu.solve(b, report);
}

}  // namespace oseen
