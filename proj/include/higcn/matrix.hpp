#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace higcn {

// Dense row-major double matrix. Value type: copies are deep.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix identity(std::size_t n);
    static Matrix row_vector(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    std::string shape_string() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

std::ostream& operator<<(std::ostream& os, const Matrix& m);

// Kernels. All throw ShapeError on incompatible operands.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scaled(const Matrix& a, double s);
void add_in_place(Matrix& dst, const Matrix& src);
double max_abs_diff(const Matrix& a, const Matrix& b);
bool all_finite(const Matrix& m) noexcept;

// Row-wise softmax with max subtraction. Throws NumericError naming the first
// row that holds a non-finite entry.
Matrix softmax_rows(const Matrix& m);

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

struct CrossEntropy {
    double loss = 0.0;
    bool clamped = false;  // P[gold] fell below the 1e-12 floor
};

// -log(P[gold]) for one probability vector.
CrossEntropy cross_entropy(std::span<const double> probabilities, std::size_t gold);

// Sum of per-row cross entropies; rows of `probabilities` are samples.
CrossEntropy cross_entropy(const Matrix& probabilities, std::span<const std::size_t> gold);

}  // namespace higcn
