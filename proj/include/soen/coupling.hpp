#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "soen/errors.hpp"

namespace soen {

/// Static flux coupling J in compressed-sparse-row form.
/// Built from (i, j, J_ij) triplets; duplicate (i, j) pairs are an error.
class CouplingMatrix {
  public:
    struct Entry {
        int row = 0;
        int col = 0;
        double weight = 0.0;
    };

    CouplingMatrix() = default;

    CouplingMatrix(int n, std::vector<Entry> entries) : n_(n) {
        for (const auto& e : entries) {
            if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
                throw InvariantViolation("coupling entry (" + std::to_string(e.row) + ", " +
                                         std::to_string(e.col) + ") outside " + std::to_string(n) +
                                         "-dendrite network");
            if (!std::isfinite(e.weight))
                throw InvariantViolation("coupling entry (" + std::to_string(e.row) + ", " +
                                         std::to_string(e.col) + ") has non-finite weight");
        }
        std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        for (std::size_t k = 0; k + 1 < entries.size(); ++k)
            if (entries[k].row == entries[k + 1].row && entries[k].col == entries[k + 1].col)
                throw InvariantViolation("duplicate coupling entry (" + std::to_string(entries[k].row) +
                                         ", " + std::to_string(entries[k].col) + ")");
        row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
        cols_.reserve(entries.size());
        weights_.reserve(entries.size());
        for (const auto& e : entries) {
            ++row_ptr_[static_cast<std::size_t>(e.row) + 1];
            cols_.push_back(e.col);
            weights_.push_back(e.weight);
        }
        for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r) row_ptr_[r + 1] += row_ptr_[r];
    }

    int n() const { return n_; }
    std::size_t nnz() const { return cols_.size(); }

    /// phi_i contribution of row i: sum_j J_ij s_j.
    double row_dot(int i, const std::vector<double>& s) const {
        double acc = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
            acc += weights_[k] * s[cols_[k]];
        return acc;
    }

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& cols() const { return cols_; }
    const std::vector<double>& weights() const { return weights_; }

  private:
    int n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> weights_;
};

}  // namespace soen
