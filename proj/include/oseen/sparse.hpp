#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

namespace oseen {

struct Triplet {
    int row = 0, col = 0;
    double value = 0.0;
};

/// Compressed-row sparse matrix with sorted, unique column indices per row.
struct SparseMatrix {
    int rows = 0, cols = 0;
    std::vector<int> row_offsets;  // size rows+1
    std::vector<int> col_indices;
    std::vector<double> values;

    int nnz() const { return static_cast<int>(values.size()); }

    /// Build from triplets; duplicate entries are summed in a fixed order
    /// (stable sort by row then column) so assembly is deterministic.
    static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> trips);

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

    /// Coordinate-format text export: one "i j value" line per entry.
    void write_coordinate(std::ostream& out) const;
};

}  // namespace oseen
