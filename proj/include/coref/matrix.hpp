#pragma once
#include <cmath>
#include <string>
#include <vector>

#include "coref/error.hpp"

namespace coref {

using Vector = std::vector<double>;

struct Matrix {
    size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& at(size_t i, size_t j) { return a[i * cols + j]; }
    double at(size_t i, size_t j) const { return a[i * cols + j]; }
    double* row(size_t i) { return a.data() + i * cols; }
    const double* row(size_t i) const { return a.data() + i * cols; }
    size_t size() const { return a.size(); }

    void fill(double v) { std::fill(a.begin(), a.end(), v); }
};

inline std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

// c = a * b
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw data_error("matmul shape mismatch: " + shape_str(a) + " * " + shape_str(b));
    Matrix c(a.rows, b.cols);
    for (size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row(i);
        double* cr = c.row(i);
        for (size_t k = 0; k < a.cols; ++k) {
            double aik = ar[k];
            if (aik == 0.0) continue;
            const double* br = b.row(k);
            for (size_t j = 0; j < b.cols; ++j) cr[j] += aik * br[j];
        }
    }
    return c;
}

// c = a * b^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols)
        throw data_error("matmul_nt shape mismatch: " + shape_str(a) + " * " + shape_str(b) + "^T");
    Matrix c(a.rows, b.rows);
    for (size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row(i);
        for (size_t j = 0; j < b.rows; ++j) {
            const double* br = b.row(j);
            double s = 0.0;
            for (size_t k = 0; k < a.cols; ++k) s += ar[k] * br[k];
            c.at(i, j) = s;
        }
    }
    return c;
}

// c = a^T * b
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows)
        throw data_error("matmul_tn shape mismatch: " + shape_str(a) + "^T * " + shape_str(b));
    Matrix c(a.cols, b.cols);
    for (size_t k = 0; k < a.rows; ++k) {
        const double* ar = a.row(k);
        const double* br = b.row(k);
        for (size_t i = 0; i < a.cols; ++i) {
            double aki = ar[i];
            if (aki == 0.0) continue;
            double* cr = c.row(i);
            for (size_t j = 0; j < b.cols; ++j) cr[j] += aki * br[j];
        }
    }
    return c;
}

// stable softmax with max subtraction, in place over a contiguous row
inline void softmax_inplace(double* x, size_t n) {
    if (n == 0) throw data_error("softmax_row on empty vector");
    double mx = x[0];
    for (size_t i = 1; i < n; ++i)
        if (x[i] > mx) mx = x[i];
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        x[i] = std::exp(x[i] - mx);
        sum += x[i];
    }
    for (size_t i = 0; i < n; ++i) x[i] /= sum;
}

inline Vector softmax_row(const Vector& scores) {
    Vector out = scores;
    softmax_inplace(out.data(), out.size());
    return out;
}

inline Vector relu(const Vector& x) {
    Vector out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

// subgradient convention: 0 at x = 0
inline Vector relu_grad(const Vector& x) {
    Vector out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? 1.0 : 0.0;
    return out;
}

inline bool all_finite(const Matrix& m) {
    for (double v : m.a)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace coref
