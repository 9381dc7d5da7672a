#pragma once

#include <cstddef>
#include <vector>

#include "impedscope/common.hpp"

namespace impedscope {

/// Dense row-major matrix of doubles. Deliberately minimal: the pipeline
/// needs storage plus a handful of reductions, not a linear-algebra DSL.
class Matrix {
public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
    double operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace impedscope
