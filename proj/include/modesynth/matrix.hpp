#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "modesynth/errors.hpp"

namespace modesynth {

/// Dense row-major matrix of doubles. The universal carrier for images,
/// activations and reconstructions.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    /// Checked construction: length must be rows*cols and every value finite.
    static Matrix from_values(std::size_t rows, std::size_t cols, std::vector<double> values) {
        if (values.size() != rows * cols)
            throw ShapeMismatch("Matrix::from_values: length " + std::to_string(values.size()) +
                                " != " + std::to_string(rows) + "x" + std::to_string(cols));
        for (double v : values)
            if (!std::isfinite(v)) throw OutOfRange("Matrix::from_values: non-finite value");
        Matrix m;
        m.rows_ = rows;
        m.cols_ = cols;
        m.values_ = std::move(values);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    void set_column(std::size_t c, const std::vector<double>& col) {
        for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = col[r];
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && values_ == other.values_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* where) {
    if (!a.same_shape(b)) throw ShapeMismatch(std::string(where) + ": shape mismatch");
}

}  // namespace modesynth
