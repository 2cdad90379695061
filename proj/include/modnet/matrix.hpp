#pragma once

#include <string>
#include <vector>

namespace modnet {

// Dense row-major matrix of doubles. Vectors are 1xN rows by convention.
struct Matrix {
    int rows{0};
    int cols{0};
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c);
    Matrix(int r, int c, std::vector<double> values);

    static Matrix zeros(int r, int c);
    static Matrix ones(int r, int c);
    static Matrix identity(int n);
    static Matrix row(std::vector<double> values);
    static Matrix column(std::vector<double> values);

    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

    int size() const { return rows * cols; }
    bool same_shape(const Matrix& other) const { return rows == other.rows && cols == other.cols; }
    bool all_finite() const;
    std::string shape_str() const;
};

bool operator==(const Matrix& a, const Matrix& b);
inline bool operator!=(const Matrix& a, const Matrix& b) { return !(a == b); }

// Indices of the min(k, n) largest scores. Ties break toward the smaller
// index; the result is emitted in ascending index order. Selection is
// discrete and never differentiated.
std::vector<int> topk_indices(const std::vector<double>& scores, int k);

}  // namespace modnet
