#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bvib/errors.hpp"
#include "bvib/flops.hpp"
#include "bvib/ledger.hpp"
#include "bvib/rng.hpp"
#include "bvib/vib.hpp"

namespace bvib {

// ---------------------------------------------------------------------------
// protocol state and messages
// ---------------------------------------------------------------------------

// One device-server pairing, fixed for a whole run. Each pair trains an
// independent model replica on its own data shard. The channel between the
// endpoints is ideal: a sent message always arrives intact.
struct PairState {
    int pair_id = 0;
    NodeRef device;
    NodeRef server;

    Encoder encoder;
    EncoderAdam enc_adam;
    Decoder decoder;
    DecoderAdam dec_adam;

    // The server owns the reparameterization noise stream.
    RngStream eps_stream{0};

    // Device-side bookkeeping for the forward batch awaiting its gradients.
    EncoderCache pending_cache;
    std::optional<std::uint64_t> awaiting_batch;
    std::uint64_t awaiting_epoch = 0;
};

inline PairState make_pair(int pair_id, std::size_t input_dim, std::size_t trunk_dim, std::size_t latent_dim,
                           std::size_t decoder_hidden, std::size_t num_classes, std::uint64_t seed) {
    PairState p;
    p.pair_id = pair_id;
    p.device = device_node(pair_id);
    p.server = server_node(pair_id);
    RngStream dev_init = derive_stream(seed, StreamPurpose::device_init, static_cast<std::uint64_t>(pair_id));
    p.encoder = make_encoder(input_dim, trunk_dim, latent_dim, dev_init);
    p.enc_adam = EncoderAdam(p.encoder);
    RngStream srv_init = derive_stream(seed, StreamPurpose::server_init, static_cast<std::uint64_t>(pair_id));
    p.decoder = make_decoder(latent_dim, decoder_hidden, num_classes, srv_init);
    p.dec_adam = DecoderAdam(p.decoder);
    p.eps_stream = derive_stream(seed, StreamPurpose::reparam_eps, static_cast<std::uint64_t>(pair_id));
    return p;
}

// Forward message device -> server. Labels ride along so the server can
// compute the likelihood term.
struct LatentMessage {
    int pair_id = 0;
    std::uint64_t epoch = 0;
    std::uint64_t batch = 0;
    LatentStats stats;
    std::vector<int> labels;
};

// Gradient message server -> device: the loss gradients with respect to the
// latent statistics of one specific forward batch.
struct SplitGradMessage {
    int pair_id = 0;
    std::uint64_t epoch = 0;
    std::uint64_t batch = 0;
    Matrix d_mu;     // M x K
    Matrix d_logvar; // M x K
};

// ---------------------------------------------------------------------------
// protocol steps
// ---------------------------------------------------------------------------

// Device half of the forward split. A paralyzed device produces nothing and
// the pair skips the round.
inline std::optional<LatentMessage> device_forward(PairState& pair, const Matrix& x_batch,
                                                   const std::vector<int>& labels, std::uint64_t epoch,
                                                   std::uint64_t batch, bool device_alive, FlopCounter& flops) {
    if (!device_alive) return std::nullopt;
    if (x_batch.rows != labels.size()) throw ConfigError("device_forward: batch/labels size mismatch");
    LatentMessage msg;
    msg.pair_id = pair.pair_id;
    msg.epoch = epoch;
    msg.batch = batch;
    msg.stats = encode(pair.encoder, x_batch, flops, pair.device, &pair.pending_cache);
    msg.labels = labels;
    pair.awaiting_batch = batch;
    pair.awaiting_epoch = epoch;
    return msg;
}

struct ServerStepResult {
    LossBreakdown loss;
    SplitGradMessage grads;
    LedgerEntry entry;
};

// Server half: reparameterize with fresh noise, decode, compute the loss,
// update the decoder, hand the latent gradients back, and record the MI
// bounds of this step in the server's ledger.
inline std::optional<ServerStepResult> server_step(PairState& pair, const LatentMessage& msg, double beta, double lr,
                                                   ReparamMode mode, bool server_alive, std::uint64_t round,
                                                   std::vector<LedgerEntry>& server_ledger, FlopCounter& flops) {
    if (!server_alive) return std::nullopt;
    Matrix eps = draw_eps(pair.eps_stream, msg.stats.batch_size(), msg.stats.latent_dim());
    Matrix zhat = reparameterize(msg.stats, eps, mode);
    DecoderCache cache;
    Matrix log_q = decode(pair.decoder, zhat, flops, pair.server, &cache);

    ServerStepResult result;
    result.loss = vib_loss(mi_lower_bits(log_q, msg.labels), mi_upper_bits(msg.stats), beta);

    DecoderGrads dgrads;
    LatentGrads lgrads;
    vib_backward(pair.decoder, cache, msg.stats, eps, msg.labels, beta, mode, flops, pair.server, dgrads, lgrads);
    apply_adam(pair.decoder, pair.dec_adam, dgrads, lr);

    result.grads.pair_id = pair.pair_id;
    result.grads.epoch = msg.epoch;
    result.grads.batch = msg.batch;
    result.grads.d_mu = std::move(lgrads.d_mu);
    result.grads.d_logvar = std::move(lgrads.d_logvar);

    result.entry = LedgerEntry{msg.epoch, msg.batch, pair.pair_id, result.loss.mi_upper_bits,
                               result.loss.mi_lower_bits, round};
    server_ledger.push_back(result.entry);
    return result;
}

// Device applies the received gradients to its encoder. The message must
// answer the device's most recent forward batch; anything stale is a
// protocol violation and the round is aborted for this pair.
inline void device_backward(PairState& pair, const SplitGradMessage& msg, double lr, FlopCounter& flops) {
    if (!pair.awaiting_batch.has_value() || *pair.awaiting_batch != msg.batch || pair.awaiting_epoch != msg.epoch)
        throw ProtocolError("device_backward: gradient message for epoch " + std::to_string(msg.epoch) + " batch " +
                            std::to_string(msg.batch) + " does not match the pending forward batch");
    if (msg.pair_id != pair.pair_id) throw ProtocolError("device_backward: message addressed to another pair");
    LatentGrads lgrads;
    lgrads.d_mu = msg.d_mu;
    lgrads.d_logvar = msg.d_logvar;
    EncoderGrads egrads = encoder_backward(pair.encoder, pair.pending_cache, lgrads, flops, pair.device);
    apply_adam(pair.encoder, pair.enc_adam, egrads, lr);
    pair.awaiting_batch.reset();
}

} // namespace bvib
