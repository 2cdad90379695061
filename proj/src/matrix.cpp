#include "modnet/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace modnet {

Matrix::Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {
    if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative shape " + shape_str());
}

Matrix::Matrix(int r, int c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative shape " + shape_str());
    if (data.size() != static_cast<std::size_t>(r) * c) {
        throw std::invalid_argument("Matrix: " + std::to_string(data.size()) + " values for shape " + shape_str());
    }
}

Matrix Matrix::zeros(int r, int c) { return Matrix(r, c); }

Matrix Matrix::ones(int r, int c) {
    Matrix m(r, c);
    std::fill(m.data.begin(), m.data.end(), 1.0);
    return m;
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix Matrix::row(std::vector<double> values) {
    const int n = static_cast<int>(values.size());
    return Matrix(1, n, std::move(values));
}

Matrix Matrix::column(std::vector<double> values) {
    const int n = static_cast<int>(values.size());
    return Matrix(n, 1, std::move(values));
}

bool Matrix::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

std::vector<int> topk_indices(const std::vector<double>& scores, int k) {
    if (scores.empty()) throw std::invalid_argument("topk_indices: empty scores");
    if (k < 1) throw std::invalid_argument("topk_indices: k must be >= 1, got " + std::to_string(k));
    for (double s : scores) {
        if (std::isnan(s)) throw std::invalid_argument("topk_indices: NaN score");
    }
    const int n = static_cast<int>(scores.size());
    const int m = std::min(k, n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Higher score first; equal scores keep the smaller index first.
    std::partial_sort(order.begin(), order.begin() + m, order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    std::vector<int> out(order.begin(), order.begin() + m);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace modnet
