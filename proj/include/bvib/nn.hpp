#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

#include "bvib/errors.hpp"
#include "bvib/flops.hpp"
#include "bvib/matrix.hpp"
#include "bvib/rng.hpp"

namespace bvib {

// ---------------------------------------------------------------------------
// dense layers
// ---------------------------------------------------------------------------

// Returns W x + b for W of shape out x in. Books rows*cols MACs of forward
// work against the owning node.
inline Vector dense_forward(const Matrix& w, const Vector& b, const Vector& x, FlopCounter& flops, NodeRef node) {
    if (w.cols != x.size())
        throw ConfigError("dense_forward: weight cols " + std::to_string(w.cols) + " vs input size " +
                          std::to_string(x.size()));
    if (w.rows != b.size())
        throw ConfigError("dense_forward: weight rows " + std::to_string(w.rows) + " vs bias size " +
                          std::to_string(b.size()));
    Vector y(w.rows);
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double* wi = w.row(i);
        double acc = b[i];
        for (std::size_t k = 0; k < w.cols; ++k) acc += wi[k] * x[k];
        y[i] = acc;
    }
    flops.add_forward(node, static_cast<std::uint64_t>(w.rows) * w.cols);
    return y;
}

// Batched variant: X is M x in, result is M x out.
inline Matrix dense_forward_batch(const Matrix& w, const Vector& b, const Matrix& x, FlopCounter& flops,
                                  NodeRef node) {
    if (w.cols != x.cols)
        throw ConfigError("dense_forward_batch: weight cols " + std::to_string(w.cols) + " vs input cols " +
                          std::to_string(x.cols));
    if (w.rows != b.size())
        throw ConfigError("dense_forward_batch: weight rows vs bias size mismatch");
    Matrix y = matmul_abt(x, w);
    for (std::size_t i = 0; i < y.rows; ++i) {
        double* yi = y.row(i);
        for (std::size_t j = 0; j < y.cols; ++j) yi[j] += b[j];
    }
    flops.add_forward(node, static_cast<std::uint64_t>(x.rows) * w.rows * w.cols);
    return y;
}

// Gradients for Y = X W^T + b given dY. Fills dW (out x in) and db (out) and,
// when dX is non-null, the input gradient (M x in). The layer's backward cost
// is booked at exactly twice its forward cost regardless of whether dX is
// requested.
inline void dense_backward_batch(const Matrix& w, const Matrix& x, const Matrix& dy, Matrix& dw, Vector& db,
                                 Matrix* dx, FlopCounter& flops, NodeRef node) {
    if (dy.rows != x.rows || dy.cols != w.rows || x.cols != w.cols)
        throw ConfigError("dense_backward_batch: shape mismatch");
    dw = Matrix(w.rows, w.cols);
    accumulate_atb(dy, x, dw); // dW = dY^T X
    db.assign(w.rows, 0.0);
    for (std::size_t i = 0; i < dy.rows; ++i) {
        const double* di = dy.row(i);
        for (std::size_t j = 0; j < dy.cols; ++j) db[j] += di[j];
    }
    if (dx != nullptr) {
        *dx = Matrix(x.rows, x.cols);
        accumulate_ab(dy, w, *dx); // dX = dY W
    }
    flops.add_backward(node, 2ull * x.rows * w.rows * w.cols);
}

// ---------------------------------------------------------------------------
// activations
// ---------------------------------------------------------------------------

inline Vector relu(const Vector& x) {
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return y;
}

inline Matrix relu(const Matrix& x) {
    Matrix y(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
    return y;
}

// Gates the upstream gradient by pre-activation sign.
inline Matrix relu_backward(const Matrix& pre, const Matrix& dpost) {
    if (!pre.same_shape(dpost)) throw ConfigError("relu_backward: shape mismatch");
    Matrix dx(pre.rows, pre.cols);
    for (std::size_t i = 0; i < pre.data.size(); ++i) dx.data[i] = pre.data[i] > 0.0 ? dpost.data[i] : 0.0;
    return dx;
}

// ---------------------------------------------------------------------------
// log-softmax
// ---------------------------------------------------------------------------

// Numerically stable log-softmax: the max logit is subtracted before
// exponentiation so arbitrarily large logits cannot overflow.
inline Vector softmax_log_probs(const Vector& logits) {
    if (logits.empty()) throw ConfigError("softmax_log_probs: empty logits");
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    const double log_z = m + std::log(sum);
    Vector out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
    return out;
}

inline Matrix softmax_log_probs_batch(const Matrix& logits) {
    Matrix out(logits.rows, logits.cols);
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const double* li = logits.row(i);
        double m = li[0];
        for (std::size_t j = 1; j < logits.cols; ++j) m = std::max(m, li[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols; ++j) sum += std::exp(li[j] - m);
        const double log_z = m + std::log(sum);
        double* oi = out.row(i);
        for (std::size_t j = 0; j < logits.cols; ++j) oi[j] = li[j] - log_z;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// Standard Adam with bias correction. Aborts with a numeric failure on any
// non-finite gradient component.
inline void adam_step(std::span<double> param, std::span<const double> grad, AdamState& state, double lr) {
    if (param.size() != grad.size() || param.size() != state.m.size())
        throw ConfigError("adam_step: size mismatch");
    if (lr <= 0.0) throw ConfigError("adam_step: learning rate must be positive");
    for (double g : grad)
        if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient");

    state.t += 1;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        param[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
}

// ---------------------------------------------------------------------------
// initialization
// ---------------------------------------------------------------------------

// He-style init scaled by fan-in; biases start at zero. Each simulated node
// initializes its own layers from its own stream, in a fixed order, so runs
// are reproducible node by node.
inline Matrix he_init(std::size_t out_dim, std::size_t in_dim, RngStream& rng) {
    Matrix w(out_dim, in_dim);
    const double scale = std::sqrt(2.0 / static_cast<double>(in_dim));
    for (double& v : w.data) v = scale * rng.next_gaussian();
    return w;
}

} // namespace bvib
