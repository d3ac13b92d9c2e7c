#pragma once

#include <cstddef>
#include <vector>

#include "arf/errors.hpp"

namespace arf {

// Column-major dense matrix. Rows index the sample batch, columns index
// features, so a feature column is contiguous and the batched kernels below
// vectorize across samples.
template <typename T>
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t r, std::size_t c) { return data_[r + c * rows_]; }
    T operator()(std::size_t r, std::size_t c) const { return data_[r + c * rows_]; }

    T* col(std::size_t c) { return data_.data() + c * rows_; }
    const T* col(std::size_t c) const { return data_.data() + c * rows_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::size_t size() const { return data_.size(); }

    void set_zero() { std::fill(data_.begin(), data_.end(), T(0)); }

    void resize(std::size_t rows, std::size_t cols) {
        rows_ = rows;
        cols_ = cols;
        data_.assign(rows * cols, T(0));
    }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

// Batched affine kernels.
//
// Reproducibility contract: every output element is accumulated in a fixed
// order (ascending contraction index), so results are bit-identical from run
// to run. Test oracles that re-derive these products with plain loops in the
// same index order reproduce them exactly.

// Y(S×out) = X(S×in) · Wᵀ + b, with W stored (out×in).
template <typename T>
void affine_forward(Matrix<T>& y, const Matrix<T>& x, const Matrix<T>& w,
                    const std::vector<T>& b) {
    const std::size_t s_count = x.rows(), in = x.cols(), out = w.rows();
    if (w.cols() != in || b.size() != out)
        throw ConfigError("affine_forward: shape mismatch");
    y.resize(s_count, out);

    std::size_t o = 0;
    // Four output columns per pass so each X column is streamed once per block.
    for (; o + 4 <= out; o += 4) {
        T *y0 = y.col(o), *y1 = y.col(o + 1), *y2 = y.col(o + 2), *y3 = y.col(o + 3);
        for (std::size_t s = 0; s < s_count; ++s) {
            y0[s] = b[o];
            y1[s] = b[o + 1];
            y2[s] = b[o + 2];
            y3[s] = b[o + 3];
        }
        for (std::size_t k = 0; k < in; ++k) {
            const T* xk = x.col(k);
            const T w0 = w(o, k), w1 = w(o + 1, k), w2 = w(o + 2, k), w3 = w(o + 3, k);
            for (std::size_t s = 0; s < s_count; ++s) {
                y0[s] += xk[s] * w0;
                y1[s] += xk[s] * w1;
                y2[s] += xk[s] * w2;
                y3[s] += xk[s] * w3;
            }
        }
    }
    for (; o < out; ++o) {
        T* yo = y.col(o);
        for (std::size_t s = 0; s < s_count; ++s) yo[s] = b[o];
        for (std::size_t k = 0; k < in; ++k) {
            const T* xk = x.col(k);
            const T wv = w(o, k);
            for (std::size_t s = 0; s < s_count; ++s) yo[s] += xk[s] * wv;
        }
    }
}

// dX(S×in) = dY(S×out) · W, accumulating output index o in ascending order.
template <typename T>
void affine_backward_input(Matrix<T>& dx, const Matrix<T>& dy, const Matrix<T>& w) {
    const std::size_t s_count = dy.rows(), out = dy.cols(), in = w.cols();
    if (w.rows() != out) throw ConfigError("affine_backward_input: shape mismatch");
    dx.resize(s_count, in);

    std::size_t k = 0;
    for (; k + 4 <= in; k += 4) {
        T *d0 = dx.col(k), *d1 = dx.col(k + 1), *d2 = dx.col(k + 2), *d3 = dx.col(k + 3);
        for (std::size_t o = 0; o < out; ++o) {
            const T* dyo = dy.col(o);
            const T w0 = w(o, k), w1 = w(o, k + 1), w2 = w(o, k + 2), w3 = w(o, k + 3);
            for (std::size_t s = 0; s < s_count; ++s) {
                d0[s] += dyo[s] * w0;
                d1[s] += dyo[s] * w1;
                d2[s] += dyo[s] * w2;
                d3[s] += dyo[s] * w3;
            }
        }
    }
    for (; k < in; ++k) {
        T* dk = dx.col(k);
        for (std::size_t o = 0; o < out; ++o) {
            const T* dyo = dy.col(o);
            const T wv = w(o, k);
            for (std::size_t s = 0; s < s_count; ++s) dk[s] += dyo[s] * wv;
        }
    }
}

// Contiguous dot with a fixed four-lane unroll; combine order is pinned.
template <typename T>
T fixed_dot(const T* a, const T* b, std::size_t n) {
    T a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    std::size_t s = 0;
    for (; s + 4 <= n; s += 4) {
        a0 += a[s] * b[s];
        a1 += a[s + 1] * b[s + 1];
        a2 += a[s + 2] * b[s + 2];
        a3 += a[s + 3] * b[s + 3];
    }
    T acc = (a0 + a1) + (a2 + a3);
    for (; s < n; ++s) acc += a[s] * b[s];
    return acc;
}

// dW(o,k) += dot(dY.col(o), X.col(k)); db(o) += sum(dY.col(o)).
template <typename T>
void affine_backward_params(Matrix<T>& dw, std::vector<T>& db, const Matrix<T>& dy,
                            const Matrix<T>& x) {
    const std::size_t s_count = dy.rows(), out = dy.cols(), in = x.cols();
    if (dw.rows() != out || dw.cols() != in || db.size() != out)
        throw ConfigError("affine_backward_params: shape mismatch");
    for (std::size_t o = 0; o < out; ++o) {
        const T* dyo = dy.col(o);
        for (std::size_t k = 0; k < in; ++k) dw(o, k) += fixed_dot(dyo, x.col(k), s_count);
        T a0 = 0, a1 = 0, a2 = 0, a3 = 0;
        std::size_t s = 0;
        for (; s + 4 <= s_count; s += 4) {
            a0 += dyo[s];
            a1 += dyo[s + 1];
            a2 += dyo[s + 2];
            a3 += dyo[s + 3];
        }
        T acc = (a0 + a1) + (a2 + a3);
        for (; s < s_count; ++s) acc += dyo[s];
        db[o] += acc;
    }
}

}  // namespace arf
