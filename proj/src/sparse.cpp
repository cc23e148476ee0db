#include "oseen/sparse.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace oseen {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> trips) {
    for (const Triplet& t : trips)
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw std::runtime_error("SparseMatrix: triplet out of range");
    std::stable_sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_offsets.assign(rows + 1, 0);
    m.col_indices.reserve(trips.size());
    m.values.reserve(trips.size());
    size_t i = 0;
    for (int r = 0; r < rows; ++r) {
        while (i < trips.size() && trips[i].row == r) {
            int c = trips[i].col;
            double v = 0.0;
            while (i < trips.size() && trips[i].row == r && trips[i].col == c) {
                v += trips[i].value;
                ++i;
            }
            m.col_indices.push_back(c);
            m.values.push_back(v);
        }
        m.row_offsets[r + 1] = static_cast<int>(m.col_indices.size());
    }
    return m;
}

Eigen::VectorXd SparseMatrix::apply(const Eigen::VectorXd& x) const {
    if (x.size() != cols) throw std::runtime_error("DimensionMismatch: matvec size");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
    for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k)
            acc += values[k] * x[col_indices[k]];
        y[r] = acc;
    }
    return y;
}

void SparseMatrix::write_coordinate(std::ostream& out) const {
    out.precision(17);
    for (int r = 0; r < rows; ++r)
        for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k)
            out << r << " " << col_indices[k] << " " << values[k] << "\n";
}

}  // namespace oseen
