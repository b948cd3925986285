#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bvib/errors.hpp"

namespace bvib {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Small and deliberately plain: the
// simulator never needs views, strides or lazy evaluation.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    bool same_shape(const Matrix& other) const { return rows == other.rows && cols == other.cols; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline bool all_finite(const Matrix& m) {
    for (double v : m.data)
        if (!std::isfinite(v)) return false;
    return true;
}

inline bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
    if (m.rows != rows || m.cols != cols)
        throw ConfigError(std::string(what) + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                          ", got " + std::to_string(m.rows) + "x" + std::to_string(m.cols));
}

// y[i,j] = sum_k a[i,k] * b[j,k], i.e. A * B^T. Row-by-row dot products keep
// both operands contiguous, which is what the compiler vectorizes best.
inline Matrix matmul_abt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols)
        throw ConfigError("matmul_abt: inner dimensions differ (" + std::to_string(a.cols) + " vs " +
                          std::to_string(b.cols) + ")");
    Matrix y(a.rows, b.rows);
    const std::size_t k = a.cols;
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* yi = y.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* bj = b.row(j);
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
            yi[j] = acc;
        }
    }
    return y;
}

// out[j,:] += sum_i a[i,j] * b[i,:], i.e. out += A^T * B (accumulating).
inline void accumulate_atb(const Matrix& a, const Matrix& b, Matrix& out) {
    if (a.rows != b.rows || out.rows != a.cols || out.cols != b.cols)
        throw ConfigError("accumulate_atb: shape mismatch");
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* bi = b.row(i);
        for (std::size_t j = 0; j < a.cols; ++j) {
            const double s = a(i, j);
            if (s == 0.0) continue;
            double* oj = out.row(j);
            for (std::size_t t = 0; t < b.cols; ++t) oj[t] += s * bi[t];
        }
    }
}

// out[i,:] += sum_j a[i,j] * b[j,:], i.e. out += A * B (accumulating).
inline void accumulate_ab(const Matrix& a, const Matrix& b, Matrix& out) {
    if (a.cols != b.rows || out.rows != a.rows || out.cols != b.cols)
        throw ConfigError("accumulate_ab: shape mismatch");
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* oi = out.row(i);
        for (std::size_t j = 0; j < a.cols; ++j) {
            const double s = ai[j];
            if (s == 0.0) continue;
            const double* bj = b.row(j);
            for (std::size_t t = 0; t < b.cols; ++t) oi[t] += s * bj[t];
        }
    }
}

} // namespace bvib
