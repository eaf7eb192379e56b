#pragma once

#include <cstddef>
#include <vector>

namespace gasrl::nn {

// Dense row-major matrix of doubles. All network math is double precision.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double* row(std::size_t r) { return a.data() + r * cols; }
    const double* row(std::size_t r) const { return a.data() + r * cols; }
    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    void resize(std::size_t r, std::size_t c) {
        rows = r;
        cols = c;
        a.assign(r * c, 0.0);
    }
    void zero() { a.assign(a.size(), 0.0); }
};

// Batch of equally-shaped sequences, laid out [batch][step][dim].
struct SeqBatch {
    std::size_t batch = 0, steps = 0, dim = 0;
    std::vector<double> a;

    SeqBatch() = default;
    SeqBatch(std::size_t b, std::size_t t, std::size_t d)
        : batch(b), steps(t), dim(d), a(b * t * d, 0.0) {}

    double* at(std::size_t b, std::size_t t) { return a.data() + (b * steps + t) * dim; }
    const double* at(std::size_t b, std::size_t t) const {
        return a.data() + (b * steps + t) * dim;
    }
    void resize(std::size_t b, std::size_t t, std::size_t d) {
        batch = b;
        steps = t;
        dim = d;
        a.assign(b * t * d, 0.0);
    }
};

// y += W x, W is (out x in) row-major.
inline void matvec_acc(const double* w, std::size_t out, std::size_t in,
                       const double* x, double* y) {
    for (std::size_t i = 0; i < out; ++i) {
        const double* wi = w + i * in;
        double acc = 0.0;
        for (std::size_t j = 0; j < in; ++j) acc += wi[j] * x[j];
        y[i] += acc;
    }
}

// dx += W^T dy, accumulated row-wise so the inner loop stays contiguous.
inline void matvec_t_acc(const double* w, std::size_t out, std::size_t in,
                         const double* dy, double* dx) {
    for (std::size_t i = 0; i < out; ++i) {
        const double* wi = w + i * in;
        const double g = dy[i];
        if (g == 0.0) continue;
        for (std::size_t j = 0; j < in; ++j) dx[j] += g * wi[j];
    }
}

// dW += dy x^T (outer product), dW is (out x in) row-major.
inline void outer_acc(const double* dy, std::size_t out, const double* x,
                      std::size_t in, double* dw) {
    for (std::size_t i = 0; i < out; ++i) {
        double* dwi = dw + i * in;
        const double g = dy[i];
        if (g == 0.0) continue;
        for (std::size_t j = 0; j < in; ++j) dwi[j] += g * x[j];
    }
}

}  // namespace gasrl::nn
