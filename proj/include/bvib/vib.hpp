#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "bvib/errors.hpp"
#include "bvib/flops.hpp"
#include "bvib/matrix.hpp"
#include "bvib/nn.hpp"
#include "bvib/rng.hpp"

namespace bvib {

inline constexpr double kLn2 = 0.69314718055994530942;

// ---------------------------------------------------------------------------
// model parameters
// ---------------------------------------------------------------------------

struct DenseLayer {
    Matrix w; // out x in
    Vector b; // out
};

struct LayerAdam {
    AdamState w;
    AdamState b;

    LayerAdam() = default;
    explicit LayerAdam(const DenseLayer& layer) : w(layer.w.data.size()), b(layer.b.size()) {}
};

// Encoder: trunk input->hidden with ReLU, then two parallel linear heads
// hidden->latent producing the mean and log-variance of the latent Gaussian.
struct Encoder {
    std::size_t input_dim = 784;
    std::size_t hidden_dim = 1024;
    std::size_t latent_dim = 512;
    DenseLayer trunk;
    DenseLayer mu_head;
    DenseLayer logvar_head;
};

// Decoder: latent->hidden with ReLU, then hidden->classes with log-softmax.
struct Decoder {
    std::size_t latent_dim = 512;
    std::size_t hidden_dim = 784;
    std::size_t num_classes = 10;
    DenseLayer hidden;
    DenseLayer out;
};

struct EncoderAdam {
    LayerAdam trunk, mu_head, logvar_head;

    EncoderAdam() = default;
    explicit EncoderAdam(const Encoder& e) : trunk(e.trunk), mu_head(e.mu_head), logvar_head(e.logvar_head) {}
};

struct DecoderAdam {
    LayerAdam hidden, out;

    DecoderAdam() = default;
    explicit DecoderAdam(const Decoder& d) : hidden(d.hidden), out(d.out) {}
};

inline Encoder make_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t latent_dim, RngStream& init) {
    Encoder e;
    e.input_dim = input_dim;
    e.hidden_dim = hidden_dim;
    e.latent_dim = latent_dim;
    e.trunk = {he_init(hidden_dim, input_dim, init), Vector(hidden_dim, 0.0)};
    e.mu_head = {he_init(latent_dim, hidden_dim, init), Vector(latent_dim, 0.0)};
    e.logvar_head = {he_init(latent_dim, hidden_dim, init), Vector(latent_dim, 0.0)};
    return e;
}

inline Decoder make_decoder(std::size_t latent_dim, std::size_t hidden_dim, std::size_t num_classes,
                            RngStream& init) {
    Decoder d;
    d.latent_dim = latent_dim;
    d.hidden_dim = hidden_dim;
    d.num_classes = num_classes;
    d.hidden = {he_init(hidden_dim, latent_dim, init), Vector(hidden_dim, 0.0)};
    d.out = {he_init(num_classes, hidden_dim, init), Vector(num_classes, 0.0)};
    return d;
}

// ---------------------------------------------------------------------------
// latent statistics and encoding
// ---------------------------------------------------------------------------

// Per-batch mean and log-variance rows, one row per sample.
struct LatentStats {
    Matrix mu;     // M x K
    Matrix logvar; // M x K

    std::size_t batch_size() const { return mu.rows; }
    std::size_t latent_dim() const { return mu.cols; }
};

// Activations retained on the device between forward and backward.
struct EncoderCache {
    Matrix x;     // M x in
    Matrix h_pre; // M x hidden
    Matrix h;     // M x hidden
};

inline LatentStats encode(const Encoder& enc, const Matrix& x, FlopCounter& flops, NodeRef device,
                          EncoderCache* cache = nullptr) {
    if (x.cols != enc.input_dim)
        throw ConfigError("encode: input width " + std::to_string(x.cols) + " vs encoder input dim " +
                          std::to_string(enc.input_dim));
    Matrix h_pre = dense_forward_batch(enc.trunk.w, enc.trunk.b, x, flops, device);
    Matrix h = relu(h_pre);
    LatentStats stats;
    stats.mu = dense_forward_batch(enc.mu_head.w, enc.mu_head.b, h, flops, device);
    stats.logvar = dense_forward_batch(enc.logvar_head.w, enc.logvar_head.b, h, flops, device);
    if (!all_finite(stats.mu) || !all_finite(stats.logvar))
        throw NumericError("encode: non-finite latent statistics");
    if (cache != nullptr) {
        cache->x = x;
        cache->h_pre = std::move(h_pre);
        cache->h = std::move(h);
    }
    return stats;
}

// ---------------------------------------------------------------------------
// reparameterization
// ---------------------------------------------------------------------------

// Default mode multiplies the noise by the standard deviation, so the
// reparameterized sample has exactly the encoded Gaussian distribution.
// paper_literal multiplies by the variance instead, preserved for audits of
// the alternate published formula.
enum class ReparamMode { stddev, paper_literal };

inline Matrix draw_eps(RngStream& rng, std::size_t rows, std::size_t cols) {
    Matrix eps(rows, cols);
    for (double& v : eps.data) v = rng.next_gaussian();
    return eps;
}

inline Matrix reparameterize(const LatentStats& stats, const Matrix& eps, ReparamMode mode = ReparamMode::stddev) {
    if (!eps.same_shape(stats.mu)) throw ConfigError("reparameterize: eps shape mismatch");
    Matrix z(stats.mu.rows, stats.mu.cols);
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        const double scale = mode == ReparamMode::stddev ? std::exp(0.5 * stats.logvar.data[i])
                                                         : std::exp(stats.logvar.data[i]);
        z.data[i] = stats.mu.data[i] + eps.data[i] * scale;
    }
    return z;
}

// ---------------------------------------------------------------------------
// mutual-information bounds
// ---------------------------------------------------------------------------

// Upper bound on I(Z;X) in bits: mean over the batch of
// KL(N(mu, diag sigma^2) || N(0, I)) = 1/2 sum_k (mu^2 + sigma^2 - 1 - log sigma^2),
// converted from nats by dividing by ln 2.
inline double mi_upper_bits(const LatentStats& stats) {
    if (stats.mu.rows == 0) throw ConfigError("mi_upper_bits: empty batch");
    double total_nats = 0.0;
    for (std::size_t i = 0; i < stats.mu.data.size(); ++i) {
        const double mu = stats.mu.data[i];
        const double lv = stats.logvar.data[i];
        total_nats += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
    }
    return total_nats / (kLn2 * static_cast<double>(stats.mu.rows));
}

// Lower-bound term for I(Z;Y) in bits: mean log2-likelihood of the true
// label. Always <= 0; zero only for a perfect predictor.
inline double mi_lower_bits(const Matrix& log_q, const std::vector<int>& labels) {
    if (log_q.rows != labels.size()) throw ConfigError("mi_lower_bits: rows vs labels mismatch");
    if (log_q.rows == 0) throw ConfigError("mi_lower_bits: empty batch");
    double total = 0.0;
    for (std::size_t i = 0; i < log_q.rows; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= log_q.cols)
            throw ConfigError("mi_lower_bits: label " + std::to_string(y) + " out of range [0, " +
                              std::to_string(log_q.cols - 1) + "]");
        total += log_q(i, static_cast<std::size_t>(y));
    }
    return total / (kLn2 * static_cast<double>(log_q.rows));
}

// ---------------------------------------------------------------------------
// loss
// ---------------------------------------------------------------------------

struct LossBreakdown {
    double mi_lower_bits = 0.0; // raw likelihood term, <= 0
    double mi_upper_bits = 0.0; // KL term, >= 0
    double loss = 0.0;          // -(mi_lower - beta * mi_upper), minimized
    double beta = 0.0;
};

inline LossBreakdown vib_loss(double mi_lower, double mi_upper, double beta) {
    if (beta < 0.0) throw ConfigError("vib_loss: beta must be >= 0");
    return {mi_lower, mi_upper, -(mi_lower - beta * mi_upper), beta};
}

// ---------------------------------------------------------------------------
// decoding and backward passes
// ---------------------------------------------------------------------------

struct DecoderCache {
    Matrix zhat;  // M x K
    Matrix u_pre; // M x hidden
    Matrix u;     // M x hidden
    Matrix log_q; // M x classes
};

inline Matrix decode(const Decoder& dec, const Matrix& zhat, FlopCounter& flops, NodeRef server,
                     DecoderCache* cache = nullptr) {
    if (zhat.cols != dec.latent_dim)
        throw ConfigError("decode: latent width " + std::to_string(zhat.cols) + " vs decoder input dim " +
                          std::to_string(dec.latent_dim));
    Matrix u_pre = dense_forward_batch(dec.hidden.w, dec.hidden.b, zhat, flops, server);
    Matrix u = relu(u_pre);
    Matrix logits = dense_forward_batch(dec.out.w, dec.out.b, u, flops, server);
    Matrix log_q = softmax_log_probs_batch(logits);
    if (!all_finite(log_q)) throw NumericError("decode: non-finite class log-probabilities");
    if (cache != nullptr) {
        cache->zhat = zhat;
        cache->u_pre = std::move(u_pre);
        cache->u = std::move(u);
        cache->log_q = log_q;
    }
    return log_q;
}

struct DecoderGrads {
    Matrix dw_hidden;
    Vector db_hidden;
    Matrix dw_out;
    Vector db_out;
};

struct LatentGrads {
    Matrix d_mu;     // M x K
    Matrix d_logvar; // M x K
};

struct EncoderGrads {
    Matrix dw_trunk;
    Vector db_trunk;
    Matrix dw_mu;
    Vector db_mu;
    Matrix dw_logvar;
    Vector db_logvar;
};

// Differentiates the scalar loss -(mi_lower_bits - beta * mi_upper_bits)
// with respect to the decoder parameters and to the latent statistics the
// stats producer must receive back. eps must be the same draws used to form
// zhat.
inline void vib_backward(const Decoder& dec, const DecoderCache& cache, const LatentStats& stats, const Matrix& eps,
                         const std::vector<int>& labels, double beta, ReparamMode mode, FlopCounter& flops,
                         NodeRef server, DecoderGrads& dgrads, LatentGrads& lgrads) {
    const std::size_t m = cache.log_q.rows;
    if (m == 0 || labels.size() != m) throw ConfigError("vib_backward: batch/labels mismatch");
    const double inv_scale = 1.0 / (kLn2 * static_cast<double>(m));

    // d loss / d logits = (softmax - onehot) / (M ln 2)
    Matrix dlogits(m, cache.log_q.cols);
    for (std::size_t i = 0; i < m; ++i) {
        const double* lq = cache.log_q.row(i);
        double* d = dlogits.row(i);
        for (std::size_t j = 0; j < cache.log_q.cols; ++j) d[j] = std::exp(lq[j]) * inv_scale;
        d[static_cast<std::size_t>(labels[i])] -= inv_scale;
    }

    Matrix du;
    dense_backward_batch(dec.out.w, cache.u, dlogits, dgrads.dw_out, dgrads.db_out, &du, flops, server);
    Matrix du_pre = relu_backward(cache.u_pre, du);
    Matrix dz;
    dense_backward_batch(dec.hidden.w, cache.zhat, du_pre, dgrads.dw_hidden, dgrads.db_hidden, &dz, flops, server);

    // Latent gradients: chain through the reparameterization plus the KL
    // term of the loss (beta-weighted, also in bits).
    lgrads.d_mu = Matrix(m, stats.mu.cols);
    lgrads.d_logvar = Matrix(m, stats.mu.cols);
    for (std::size_t i = 0; i < stats.mu.data.size(); ++i) {
        const double lv = stats.logvar.data[i];
        const double var = std::exp(lv);
        const double dzhat = dz.data[i];
        const double reparam_dlv =
            mode == ReparamMode::stddev ? dzhat * eps.data[i] * 0.5 * std::exp(0.5 * lv) : dzhat * eps.data[i] * var;
        lgrads.d_mu.data[i] = dzhat + beta * inv_scale * stats.mu.data[i];
        lgrads.d_logvar.data[i] = reparam_dlv + beta * inv_scale * 0.5 * (var - 1.0);
    }
}

// Backpropagates the latent gradients through the encoder heads and trunk.
inline EncoderGrads encoder_backward(const Encoder& enc, const EncoderCache& cache, const LatentGrads& lgrads,
                                     FlopCounter& flops, NodeRef device) {
    EncoderGrads g;
    Matrix dh(cache.h.rows, cache.h.cols);
    Matrix dh_mu;
    dense_backward_batch(enc.mu_head.w, cache.h, lgrads.d_mu, g.dw_mu, g.db_mu, &dh_mu, flops, device);
    Matrix dh_lv;
    dense_backward_batch(enc.logvar_head.w, cache.h, lgrads.d_logvar, g.dw_logvar, g.db_logvar, &dh_lv, flops,
                         device);
    for (std::size_t i = 0; i < dh.data.size(); ++i) dh.data[i] = dh_mu.data[i] + dh_lv.data[i];
    Matrix dh_pre = relu_backward(cache.h_pre, dh);
    dense_backward_batch(enc.trunk.w, cache.x, dh_pre, g.dw_trunk, g.db_trunk, nullptr, flops, device);
    return g;
}

inline void apply_adam(DenseLayer& layer, LayerAdam& adam, const Matrix& dw, const Vector& db, double lr) {
    adam_step(std::span<double>(layer.w.data), std::span<const double>(dw.data), adam.w, lr);
    adam_step(std::span<double>(layer.b), std::span<const double>(db), adam.b, lr);
}

inline void apply_adam(Encoder& enc, EncoderAdam& adam, const EncoderGrads& g, double lr) {
    apply_adam(enc.trunk, adam.trunk, g.dw_trunk, g.db_trunk, lr);
    apply_adam(enc.mu_head, adam.mu_head, g.dw_mu, g.db_mu, lr);
    apply_adam(enc.logvar_head, adam.logvar_head, g.dw_logvar, g.db_logvar, lr);
}

inline void apply_adam(Decoder& dec, DecoderAdam& adam, const DecoderGrads& g, double lr) {
    apply_adam(dec.hidden, adam.hidden, g.dw_hidden, g.db_hidden, lr);
    apply_adam(dec.out, adam.out, g.dw_out, g.db_out, lr);
}

// ---------------------------------------------------------------------------
// monolithic training step
// ---------------------------------------------------------------------------

// Runs encoder and decoder as one model on one host: forward, loss, full
// backward, Adam on everything. This is the single-node training route; the
// split protocol must produce identical results for the same eps.
inline LossBreakdown monolithic_step(Encoder& enc, EncoderAdam& enc_adam, Decoder& dec, DecoderAdam& dec_adam,
                                     const Matrix& x, const std::vector<int>& labels, const Matrix& eps, double beta,
                                     double lr, ReparamMode mode, FlopCounter& flops, NodeRef host) {
    EncoderCache ecache;
    LatentStats stats = encode(enc, x, flops, host, &ecache);
    Matrix zhat = reparameterize(stats, eps, mode);
    DecoderCache dcache;
    Matrix log_q = decode(dec, zhat, flops, host, &dcache);
    LossBreakdown loss = vib_loss(mi_lower_bits(log_q, labels), mi_upper_bits(stats), beta);

    DecoderGrads dgrads;
    LatentGrads lgrads;
    vib_backward(dec, dcache, stats, eps, labels, beta, mode, flops, host, dgrads, lgrads);
    EncoderGrads egrads = encoder_backward(enc, ecache, lgrads, flops, host);
    apply_adam(dec, dec_adam, dgrads, lr);
    apply_adam(enc, enc_adam, egrads, lr);
    return loss;
}

} // namespace bvib
