// scratch: compare LU fill for DG systems under different orderings
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cstdio>

#include "oseen/dg_assembly.hpp"
#include "oseen/driver.hpp"

using namespace oseen;

int main(int argc, char** argv) {
    int k = argc > 1 ? std::atoi(argv[1]) : 2;
    int n = argc > 2 ? std::atoi(argv[2]) : 32;
    const char* which = argc > 3 ? argv[3] : "amd";
    bool sigma_variant = argc > 4;
    Scenario sc = scenario_test1();
    if (sigma_variant) sc.sigma_pred = [](const Vec2& p) { return p.y <= 1e-9; };
    if (sigma_variant)
        sc.gamma_pred = [](const Vec2& p) { return p.y > 1e-9; };
    auto mesh = sc.make_structured_mesh(n);
    auto disc = Discretisation::make(mesh, Scheme::Dg, k);
    SaddleSystem sys =
        assemble_dg_system(sc.params(), disc.spaces(), sc.gamma, !sigma_variant);
    std::printf("n=%d k=%d dofs=%d nnz=%d\n", n, k, sys.size(), sys.matrix.nnz());

    Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> map(
        sys.matrix.rows, sys.matrix.cols, sys.matrix.nnz(), sys.matrix.row_offsets.data(),
        sys.matrix.col_indices.data(), sys.matrix.values.data());
    Eigen::SparseMatrix<double> A(map);

    if (std::string(which) == "amd") {
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::AMDOrdering<int>> lu;
        lu.analyzePattern(A);
        lu.factorize(A);
        std::printf("amd: info=%d nnzL=%ld nnzU=%ld\n", (int)lu.info(), (long)lu.nnzL(),
                    (long)lu.nnzU());
    } else {
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(A);
        lu.factorize(A);
        std::printf("colamd: info=%d nnzL=%ld nnzU=%ld\n", (int)lu.info(), (long)lu.nnzL(),
                    (long)lu.nnzU());
    }
    return 0;
}
