#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lgdlab {

// Dense column-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
    double at(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

    std::span<const double> column(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }
    std::span<double> column(std::size_t c) { return {data_.data() + c * rows_, rows_}; }

    // Rows picked by index, in the given order.
    Matrix select_rows(std::span<const std::size_t> rows) const {
        Matrix out(rows.size(), cols_);
        for (std::size_t c = 0; c < cols_; ++c) {
            auto src = column(c);
            auto dst = out.column(c);
            for (std::size_t i = 0; i < rows.size(); ++i) dst[i] = src[rows[i]];
        }
        return out;
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace lgdlab
