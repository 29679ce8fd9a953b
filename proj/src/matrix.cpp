#include "higcn/matrix.hpp"

#include "higcn/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace higcn {

namespace {

constexpr double kProbabilityFloor = 1e-12;

void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
    if (!ok) {
        throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                         b.shape_string());
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw ShapeError("Matrix: data length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
        if (row.size() != c) {
            throw ShapeError("Matrix::from_rows: ragged rows");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::row_vector(std::span<const double> values) {
    return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

std::string Matrix::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

std::ostream& operator<<(std::ostream& os, const Matrix& m) {
    os << "[";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        os << (r == 0 ? "[" : ", [");
        for (std::size_t c = 0; c < m.cols(); ++c) {
            os << (c == 0 ? "" : ", ") << m(r, c);
        }
        os << "]";
    }
    return os << "]";
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matmul", a, b);
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            const auto b_row = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out_row[j] += aik * b_row[j];
            }
        }
    }
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "matmul_nt", a, b);
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto a_row = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const auto b_row = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                acc += a_row[k] * b_row[k];
            }
            out(i, j) = acc;
        }
    }
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "matmul_tn", a, b);
    Matrix out(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const auto a_row = a.row(k);
        const auto b_row = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = a_row[i];
            if (aki == 0.0) {
                continue;
            }
            auto out_row = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out_row[j] += aki * b_row[j];
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    add_in_place(out, b);
    return out;
}

Matrix scaled(const Matrix& a, double s) {
    Matrix out = a;
    for (double& v : out.data()) {
        v *= s;
    }
    return out;
}

void add_in_place(Matrix& dst, const Matrix& src) {
    require(dst.same_shape(src), "add", dst, src);
    auto d = dst.data();
    const auto s = src.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] += s[i];
    }
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "max_abs_diff", a, b);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    }
    return worst;
}

bool all_finite(const Matrix& m) noexcept {
    return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
}

Matrix softmax_rows(const Matrix& m) {
    if (m.cols() == 0) {
        throw ShapeError("softmax_rows: matrix has no columns");
    }
    Matrix out(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto in = m.row(r);
        if (!std::all_of(in.begin(), in.end(), [](double v) { return std::isfinite(v); })) {
            throw NumericError("softmax_rows: non-finite entry in row " + std::to_string(r));
        }
        const double peak = *std::max_element(in.begin(), in.end());
        auto o = out.row(r);
        double total = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) {
            o[c] = std::exp(in[c] - peak);
            total += o[c];
        }
        for (double& v : o) {
            v /= total;
        }
    }
    return out;
}

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) {
        throw ShapeError("argmax: empty input");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

CrossEntropy cross_entropy(std::span<const double> probabilities, std::size_t gold) {
    if (gold >= probabilities.size()) {
        throw ShapeError("cross_entropy: gold index " + std::to_string(gold) + " out of range for " +
                         std::to_string(probabilities.size()) + " classes");
    }
    const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
    if (!(std::abs(total - 1.0) <= 1e-9)) {
        throw NumericError("cross_entropy: probabilities sum to " + std::to_string(total));
    }
    CrossEntropy out;
    double p = probabilities[gold];
    if (p < kProbabilityFloor) {
        p = kProbabilityFloor;
        out.clamped = true;
    }
    out.loss = -std::log(p);
    return out;
}

CrossEntropy cross_entropy(const Matrix& probabilities, std::span<const std::size_t> gold) {
    if (gold.size() != probabilities.rows()) {
        throw ShapeError("cross_entropy: " + std::to_string(gold.size()) + " labels for " +
                         std::to_string(probabilities.rows()) + " rows");
    }
    CrossEntropy out;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const auto one = cross_entropy(probabilities.row(i), gold[i]);
        out.loss += one.loss;
        out.clamped = out.clamped || one.clamped;
    }
    return out;
}

}  // namespace higcn
