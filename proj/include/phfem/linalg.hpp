#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <vector>

namespace phfem {

using SpMat = Eigen::SparseMatrix<double>;
using IntSpMat = Eigen::SparseMatrix<int>;
using Triplet = Eigen::Triplet<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline SpMat sparse_from(Eigen::Index rows, Eigen::Index cols, const std::vector<Triplet>& entries) {
    SpMat m(rows, cols);
    m.setFromTriplets(entries.begin(), entries.end());
    m.prune(0.0);
    return m;
}

inline SpMat to_real(const IntSpMat& m) { return m.cast<double>(); }

inline double max_abs(const SpMat& m) {
    double v = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) v = std::max(v, std::abs(it.value()));
    return v;
}

inline double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline SpMat identity(Eigen::Index n) {
    SpMat m(n, n);
    m.setIdentity();
    return m;
}

// Stacks sparse blocks laid out on a grid; an empty (0-size) block slot must still carry its shape.
inline SpMat block_sparse(const std::vector<std::vector<SpMat>>& blocks) {
    const std::size_t rows = blocks.size();
    const std::size_t cols = blocks.front().size();
    std::vector<Eigen::Index> row_off(rows + 1, 0), col_off(cols + 1, 0);
    for (std::size_t i = 0; i < rows; ++i) row_off[i + 1] = row_off[i] + blocks[i][0].rows();
    for (std::size_t j = 0; j < cols; ++j) col_off[j + 1] = col_off[j] + blocks[0][j].cols();
    std::vector<Triplet> entries;
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const SpMat& b = blocks[i][j];
            for (int k = 0; k < b.outerSize(); ++k)
                for (SpMat::InnerIterator it(b, k); it; ++it)
                    entries.emplace_back(row_off[i] + it.row(), col_off[j] + it.col(), it.value());
        }
    return sparse_from(row_off[rows], col_off[cols], entries);
}

inline SpMat zeros(Eigen::Index rows, Eigen::Index cols) { return SpMat(rows, cols); }

inline SpMat sub_block(const SpMat& m, Eigen::Index r0, Eigen::Index c0, Eigen::Index rows, Eigen::Index cols) {
    std::vector<Triplet> entries;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            if (it.row() >= r0 && it.row() < r0 + rows && it.col() >= c0 && it.col() < c0 + cols)
                entries.emplace_back(it.row() - r0, it.col() - c0, it.value());
    return sparse_from(rows, cols, entries);
}

// Rows of the identity selected by index, optionally scaled per row.
inline SpMat selector(const std::vector<int>& picks, Eigen::Index n, const std::vector<double>& scale = {}) {
    std::vector<Triplet> entries;
    for (std::size_t r = 0; r < picks.size(); ++r)
        entries.emplace_back(static_cast<Eigen::Index>(r), picks[r], scale.empty() ? 1.0 : scale[r]);
    return sparse_from(static_cast<Eigen::Index>(picks.size()), n, entries);
}

inline int numerical_rank(const Mat& m, double rel_tol = 1e-10) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++rank;
    return rank;
}

// True when every row and column holds exactly one entry of magnitude one.
inline bool is_signed_permutation(const SpMat& m) {
    if (m.rows() != m.cols()) return false;
    std::vector<int> row_count(m.rows(), 0), col_count(m.cols(), 0);
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) {
            if (it.value() == 0.0) continue;
            if (std::abs(it.value()) != 1.0) return false;
            ++row_count[it.row()];
            ++col_count[it.col()];
        }
    return std::all_of(row_count.begin(), row_count.end(), [](int c) { return c == 1; }) &&
           std::all_of(col_count.begin(), col_count.end(), [](int c) { return c == 1; });
}

} // namespace phfem
