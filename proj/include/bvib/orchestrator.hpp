#pragma once

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "bvib/attack.hpp"
#include "bvib/checkpoint.hpp"
#include "bvib/config.hpp"
#include "bvib/consensus.hpp"
#include "bvib/data.hpp"
#include "bvib/errors.hpp"
#include "bvib/ledger.hpp"
#include "bvib/split.hpp"
#include "bvib/vib.hpp"

namespace bvib {

// ---------------------------------------------------------------------------
// standalone metric operations
// ---------------------------------------------------------------------------

// Fraction of matching argmax predictions, as a percentage.
inline double compute_accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.empty()) throw ConfigError("compute_accuracy: empty input");
    if (predictions.size() != labels.size()) throw ConfigError("compute_accuracy: size mismatch");
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] != labels[i]) ++mismatches;
    return (1.0 - static_cast<double>(mismatches) / static_cast<double>(predictions.size())) * 100.0;
}

inline int argmax_row(const Matrix& m, std::size_t row) {
    const double* r = m.row(row);
    int best = 0;
    for (std::size_t j = 1; j < m.cols; ++j)
        if (r[j] > r[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
    return best;
}

// Device share of the forward MACs implied by the configured layer sizes.
inline double analytic_device_share(const ExperimentConfig& cfg, bool two_heads) {
    const double heads = two_heads ? 2.0 : 1.0;
    const double f_dev = static_cast<double>(cfg.input_dim) * static_cast<double>(cfg.trunk_dim) +
                         heads * static_cast<double>(cfg.trunk_dim) * static_cast<double>(cfg.latent_dim);
    const double f_srv = static_cast<double>(cfg.latent_dim) * static_cast<double>(cfg.decoder_hidden) +
                         static_cast<double>(cfg.decoder_hidden) * static_cast<double>(cfg.num_classes);
    return f_dev / (f_dev + f_srv);
}

inline FlopReport flop_report(const FlopCounter& flops, const ExperimentConfig& cfg) {
    FlopReport r;
    r.device_macs = flops.device_total();
    r.server_macs = flops.server_total();
    r.total_macs = r.device_macs + r.server_macs;
    if (r.total_macs > 0) {
        r.device_share = static_cast<double>(r.device_macs) / static_cast<double>(r.total_macs);
        r.server_share = static_cast<double>(r.server_macs) / static_cast<double>(r.total_macs);
    }
    r.analytic_device_share = analytic_device_share(cfg, true);
    r.single_head_device_share = analytic_device_share(cfg, false);
    r.device_cycles = static_cast<double>(r.device_macs) * cfg.cycles_per_mac;
    r.server_cycles = static_cast<double>(r.server_macs) * cfg.cycles_per_mac;
    return r;
}

// ---------------------------------------------------------------------------
// experiment driver
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_line(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
inline std::string format_line(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return buf;
}

} // namespace detail

class Simulation {
public:
    explicit Simulation(ExperimentConfig cfg)
        : cfg_(std::move(cfg)),
          election_rng_(derive_stream(cfg_.seed, StreamPurpose::election)),
          attack_rng_(derive_stream(cfg_.seed, StreamPurpose::attack)),
          attack_state_(cfg_.attack) {
        cfg_.validate();
    }

    MetricsReport run() {
        load_data();
        init_pairs();

        const int num_pairs = cfg_.effective_pairs();
        const bool consensus_on = cfg_.mode == Mode::bvib;
        roster_ = Roster(num_pairs, consensus_on ? num_pairs : 0);
        flops_ = FlopCounter(num_pairs, consensus_on ? num_pairs : 0);

        if (consensus_on) {
            cluster_.emplace(num_pairs, cfg_.term, &events_);
            cluster_->start_election(election_rng_, round_);
            cluster_->create_genesis(round_);
        }

        int restarts = 0;
        bool done = false;
        while (!done) {
            restart_requested_ = false;
            done = run_training();
            if (restart_requested_) {
                if (++restarts > 50) {
                    fail("too many full restarts");
                    break;
                }
                report_.epochs.clear();
                epoch_losses_.clear();
                init_pairs();
                events_.emit("RESTART count=%d", restarts);
                done = false;
            }
        }

        finalize_report();
        if (!cfg_.out_dir.empty() || !cfg_.chain_out.empty()) write_outputs();
        if (!cfg_.model_out_dir.empty()) write_models();
        return report_;
    }

    const EventLog& events() const { return events_; }
    const FlopCounter& flops() const { return flops_; }

private:
    // ------------------------------------------------------------------ setup

    void load_data() {
        if (cfg_.dataset == DatasetKind::mnist) {
            namespace fs = std::filesystem;
            const fs::path dir(cfg_.mnist_dir);
            train_ = load_idx((dir / "train-images-idx3-ubyte").string(), (dir / "train-labels-idx1-ubyte").string());
            test_ = load_idx((dir / "t10k-images-idx3-ubyte").string(), (dir / "t10k-labels-idx1-ubyte").string());
            train_.num_classes = cfg_.num_classes;
            test_.num_classes = cfg_.num_classes;
        } else {
            auto [train, test] = make_synthetic_split(cfg_.num_classes, cfg_.input_dim, cfg_.synthetic_per_class,
                                                      cfg_.synthetic_test_per_class, cfg_.synthetic_noise, cfg_.seed);
            train_ = std::move(train);
            test_ = std::move(test);
        }
        if (cfg_.train_limit > 0 && cfg_.train_limit < train_.size()) {
            Dataset trimmed;
            trimmed.num_classes = train_.num_classes;
            trimmed.images = Matrix(cfg_.train_limit, train_.images.cols);
            trimmed.labels.assign(train_.labels.begin(),
                                  train_.labels.begin() + static_cast<std::ptrdiff_t>(cfg_.train_limit));
            std::copy(train_.images.data.begin(),
                      train_.images.data.begin() + static_cast<std::ptrdiff_t>(cfg_.train_limit * train_.images.cols),
                      trimmed.images.data.begin());
            train_ = std::move(trimmed);
        }
        if (train_.images.cols != cfg_.input_dim)
            throw ConfigError("dataset sample width " + std::to_string(train_.images.cols) +
                              " does not match configured input dim " + std::to_string(cfg_.input_dim));

        const int num_pairs = cfg_.effective_pairs();
        train_shards_ = shard_dataset(train_, num_pairs, cfg_.seed);
        test_shards_ = shard_dataset(test_, num_pairs, cfg_.seed + 1);
        batch_size_ = train_shards_[0].indices.size() / cfg_.batches;
        if (batch_size_ == 0)
            throw ConfigError("config: " + std::to_string(cfg_.batches) + " batches over a shard of " +
                              std::to_string(train_shards_[0].indices.size()) + " samples leaves empty batches");
    }

    void init_pairs() {
        const int num_pairs = cfg_.effective_pairs();
        pairs_.clear();
        shuffle_streams_.clear();
        for (int p = 0; p < num_pairs; ++p) {
            PairState pair = make_pair(p, cfg_.input_dim, cfg_.trunk_dim, cfg_.latent_dim, cfg_.decoder_hidden,
                                       static_cast<std::size_t>(cfg_.num_classes), cfg_.seed);
            if (cfg_.mode == Mode::vib_monolithic) pair.server = pair.device; // one host does everything
            pairs_.push_back(std::move(pair));
            shuffle_streams_.push_back(derive_stream(cfg_.seed, StreamPurpose::shuffle, static_cast<std::uint64_t>(p)));
        }
    }

    // --------------------------------------------------------------- training

    // Returns true when training ran to completion (or failed hard); false is
    // never returned directly -- a requested full restart sets the flag and
    // returns true so the caller can loop.
    bool run_training() {
        const int num_pairs = cfg_.effective_pairs();
        for (std::uint64_t e = 1; e <= cfg_.epochs; ++e) {
            epoch_elections_ = 0;
            epoch_aborts_ = 0;
            inject_attacks(e);
            const int paralyzed_dev = roster_.paralyzed_devices(round_ + 1);
            const int paralyzed_srv = roster_.paralyzed_servers(round_ + 1);

            // fresh data order for every pair
            std::vector<std::vector<std::size_t>> orders(static_cast<std::size_t>(num_pairs));
            for (int p = 0; p < num_pairs; ++p) {
                auto& order = orders[static_cast<std::size_t>(p)];
                order.resize(train_shards_[static_cast<std::size_t>(p)].indices.size());
                std::iota(order.begin(), order.end(), std::size_t{0});
                auto& rng = shuffle_streams_[static_cast<std::size_t>(p)];
                for (std::size_t i = order.size(); i > 1; --i)
                    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.next_below(i))]);
            }

            double loss_sum = 0.0;
            std::size_t loss_count = 0;
            for (std::uint64_t bi = 0; bi < cfg_.batches; ++bi) {
                std::vector<Batch> batches;
                batches.reserve(static_cast<std::size_t>(num_pairs));
                for (int p = 0; p < num_pairs; ++p)
                    batches.push_back(take_batch(train_, train_shards_[static_cast<std::size_t>(p)],
                                                 orders[static_cast<std::size_t>(p)], bi, batch_size_));
                const bool ok = cfg_.mode == Mode::bvib ? run_batch_bvib(e, bi, batches, loss_sum, loss_count)
                                                        : run_batch_monolithic(batches[0], loss_sum, loss_count);
                if (report_.failed || restart_requested_) return true;
                (void)ok;
            }

            epoch_losses_.push_back(loss_count > 0 ? loss_sum / static_cast<double>(loss_count)
                                                   : (epoch_losses_.empty() ? 0.0 : epoch_losses_.back()));

            if (!cfg_.test_final_epoch_only || e == cfg_.epochs) {
                EpochMetrics row = test_epoch(e);
                row.elections = epoch_elections_;
                row.aborts = epoch_aborts_;
                row.paralyzed_devices = paralyzed_dev;
                row.paralyzed_servers = paralyzed_srv;
                report_.epochs.push_back(row);
            }

            if (early_stop_triggered()) {
                report_.early_stopped = true;
                events_.emit("EARLY_STOP epoch=%llu", static_cast<unsigned long long>(e));
                break;
            }
        }
        return true;
    }

    void inject_attacks(std::uint64_t epoch) {
        std::optional<int> leader;
        if (cluster_.has_value()) leader = cluster_->leader_id();
        const auto targets = attack_state_.inject(epoch, attack_rng_, roster_, leader, round_, cfg_.batches);
        for (NodeRef t : targets)
            events_.emit("ATTACK epoch=%llu node=%s:%d", static_cast<unsigned long long>(epoch),
                         t.kind == NodeKind::device ? "device" : "server", t.index);
    }

    bool run_batch_bvib(std::uint64_t epoch, std::uint64_t batch, const std::vector<Batch>& batches, double& loss_sum,
                        std::size_t& loss_count) {
        const int num_pairs = cfg_.effective_pairs();
        const std::uint64_t retry_guard =
            3 * cfg_.attack.paralysis_epochs * cfg_.batches + cfg_.term.term_length_rounds + 1000;
        std::uint64_t attempts = 0;

        for (;;) {
            ++round_;
            sync_device_events();
            cluster_->sync_alive(roster_.server_alive_flags(round_), round_);
            if (cluster_->total_failure()) return fail("every server is paralyzed");

            if (cluster_->leader_alive() && cluster_->term_expired(round_)) {
                cluster_->start_election(election_rng_, round_);
                ++epoch_elections_;
            }
            if (!cluster_->leader_alive()) {
                if (cluster_->heartbeat_tick(election_rng_, round_)) ++epoch_elections_;
                if (cluster_->total_failure()) return fail("every server is paralyzed");
                if (!cluster_->leader_alive()) { // still leaderless: idle round
                    if (++attempts > retry_guard) return fail("no leader could be elected");
                    continue;
                }
            } else {
                cluster_->heartbeat_tick(election_rng_, round_);
            }

            // Anything paralyzed this round can sink the quorum, so keep a
            // copy of the model state to honor abort-and-retry semantics.
            const bool at_risk =
                roster_.paralyzed_devices(round_) > 0 || roster_.paralyzed_servers(round_) > 0;
            std::vector<PairState> snapshot;
            if (at_risk) snapshot = pairs_;

            double round_loss = 0.0;
            std::size_t round_n = 0;
            for (int p = 0; p < num_pairs; ++p) {
                const bool dev_alive = roster_.device_alive(p, round_);
                const bool srv_alive = roster_.server_alive(p, round_);
                if (!dev_alive || !srv_alive) {
                    events_.emit("PAIR_SKIP round=%llu pair=%d", static_cast<unsigned long long>(round_), p);
                    continue;
                }
                PairState& pair = pairs_[static_cast<std::size_t>(p)];
                const Batch& b = batches[static_cast<std::size_t>(p)];
                auto msg = device_forward(pair, b.x, b.y, epoch, batch, dev_alive, flops_);
                auto result = server_step(pair, *msg, cfg_.beta, cfg_.lr, reparam_mode(), srv_alive, round_,
                                          cluster_->node(p).pending, flops_);
                device_backward(pair, result->grads, cfg_.lr, flops_);
                round_loss += result->loss.loss;
                ++round_n;
            }

            const CommitResult cr = cluster_->collect_and_commit(round_);
            if (cr.committed) {
                loss_sum += round_loss;
                loss_count += round_n;
                return true;
            }

            ++epoch_aborts_;
            if (at_risk) pairs_ = std::move(snapshot); // weights back to last committed state
            if (cfg_.full_restart_on_abort) {
                restart_requested_ = true;
                cluster_->start_election(election_rng_, round_);
                ++epoch_elections_;
                return true;
            }
            cluster_->start_election(election_rng_, round_);
            ++epoch_elections_;
            if (cluster_->total_failure()) return fail("every server is paralyzed");
            if (++attempts > retry_guard) return fail("batch could not be committed");
        }
    }

    bool run_batch_monolithic(const Batch& batch, double& loss_sum, std::size_t& loss_count) {
        ++round_;
        sync_device_events();
        if (!roster_.device_alive(0, round_)) return true; // host down: training suspended
        PairState& pair = pairs_[0];
        Matrix eps = draw_eps(pair.eps_stream, batch.x.rows, cfg_.latent_dim);
        const LossBreakdown loss =
            monolithic_step(pair.encoder, pair.enc_adam, pair.decoder, pair.dec_adam, batch.x, batch.y, eps,
                            cfg_.beta, cfg_.lr, reparam_mode(), flops_, pair.device);
        loss_sum += loss.loss;
        ++loss_count;
        return true;
    }

    // ---------------------------------------------------------------- testing

    // Evaluation pass with frozen parameters: no updates, deterministic
    // latents (zhat = mu). Runs for every pair regardless of paralysis; the
    // attack surface of testing is the training deficit it left behind.
    EpochMetrics test_epoch(std::uint64_t epoch) {
        const int num_pairs = cfg_.effective_pairs();
        EpochMetrics row;
        row.epoch = epoch;
        double acc_sum = 0.0, mi_u_sum = 0.0, mi_l_sum = 0.0;
        for (int p = 0; p < num_pairs; ++p) {
            const Shard& shard = test_shards_[static_cast<std::size_t>(p)];
            PairState& pair = pairs_[static_cast<std::size_t>(p)];
            const std::size_t bs = std::min(batch_size_, shard.indices.size());
            const std::size_t nb = std::max<std::size_t>(1, shard.indices.size() / bs);
            std::vector<std::size_t> identity(shard.indices.size());
            std::iota(identity.begin(), identity.end(), std::size_t{0});

            std::size_t correct = 0, total = 0;
            double mi_u = 0.0, mi_l = 0.0;
            std::size_t mi_batches = 0;
            for (std::size_t b = 0; b < nb; ++b) {
                Batch tb = take_batch(test_, shard, identity, b, bs);
                LatentStats stats = encode(pair.encoder, tb.x, flops_, pair.device, nullptr);
                Matrix log_q = decode(pair.decoder, stats.mu, flops_, pair.server, nullptr);
                for (std::size_t i = 0; i < log_q.rows; ++i) {
                    if (argmax_row(log_q, i) == tb.y[i]) ++correct;
                    ++total;
                }
                if (cfg_.mi_average_test_batches || b + 1 == nb) {
                    mi_u += mi_upper_bits(stats);
                    mi_l += mi_lower_bits(log_q, tb.y);
                    ++mi_batches;
                }
            }
            acc_sum += 100.0 * static_cast<double>(correct) / static_cast<double>(total);
            mi_u_sum += mi_u / static_cast<double>(mi_batches);
            mi_l_sum += mi_l / static_cast<double>(mi_batches);
        }
        row.accuracy_pct = acc_sum / num_pairs;
        row.mi_upper_bits = mi_u_sum / num_pairs;
        // reported with the +log2(classes) offset: an MI-style estimate in
        // [0, log2(classes)] rather than a raw (negative) log-likelihood
        row.mi_lower_bits = mi_l_sum / num_pairs + std::log2(static_cast<double>(cfg_.num_classes));
        return row;
    }

    bool early_stop_triggered() const {
        const int w = cfg_.early_stop_window;
        const std::size_t n = epoch_losses_.size();
        if (n < static_cast<std::size_t>(w) + 1) return false;
        auto mean_of = [&](std::size_t from, std::size_t count) {
            double s = 0.0;
            for (std::size_t i = from; i < from + count; ++i) s += epoch_losses_[i];
            return s / static_cast<double>(count);
        };
        const double prev = mean_of(n - static_cast<std::size_t>(w) - 1, static_cast<std::size_t>(w));
        const double curr = mean_of(n - static_cast<std::size_t>(w), static_cast<std::size_t>(w));
        const double denom = std::max(std::abs(prev), 1e-12);
        return std::abs(curr - prev) / denom < cfg_.early_stop_tol;
    }

    // ----------------------------------------------------------------- output

    ReparamMode reparam_mode() const {
        return cfg_.paper_literal_reparam ? ReparamMode::paper_literal : ReparamMode::stddev;
    }

    bool fail(const std::string& reason) {
        report_.failed = true;
        report_.failure_reason = reason;
        events_.emit("RUN_FAILED reason=%s", reason.c_str());
        return false;
    }

    void sync_device_events() {
        if (device_was_alive_.empty()) device_was_alive_.assign(roster_.device_until.size(), true);
        for (std::size_t i = 0; i < roster_.device_until.size(); ++i) {
            const bool now = roster_.device_alive(static_cast<int>(i), round_);
            if (device_was_alive_[i] && !now)
                events_.emit("PARALYZE round=%llu node=device:%zu", static_cast<unsigned long long>(round_), i);
            else if (!device_was_alive_[i] && now)
                events_.emit("REVIVE round=%llu node=device:%zu", static_cast<unsigned long long>(round_), i);
            device_was_alive_[i] = now;
        }
    }

    const Chain* final_chain() const {
        if (!cluster_.has_value()) return nullptr;
        if (cluster_->leader_alive()) return &cluster_->replica(*cluster_->leader_id());
        std::vector<const Chain*> replicas;
        for (int i = 0; i < cluster_->size(); ++i) replicas.push_back(&cluster_->replica(i));
        if (auto majority = majority_replica(replicas)) return replicas[*majority];
        return &cluster_->replica(0);
    }

    void finalize_report() {
        if (!report_.epochs.empty()) {
            double s = 0.0;
            for (const auto& row : report_.epochs) s += row.accuracy_pct;
            report_.average_accuracy_pct = s / static_cast<double>(report_.epochs.size());
        }
        report_.flops = flop_report(flops_, cfg_);
        report_.rounds_total = round_;
        for (const auto& row : report_.epochs) {
            report_.elections_total += static_cast<std::uint64_t>(row.elections);
            report_.aborts_total += static_cast<std::uint64_t>(row.aborts);
        }
        if (const Chain* chain = final_chain()) report_.chain_height = chain->height();
    }

    void write_outputs() const {
        namespace fs = std::filesystem;
        const fs::path dir(cfg_.out_dir.empty() ? "." : cfg_.out_dir);
        if (!cfg_.out_dir.empty()) {
            fs::create_directories(dir);

            std::ofstream csv(dir / "metrics.csv");
            csv << "epoch,mi_upper_bits,mi_lower_bits,accuracy_pct,elections,aborts,paralyzed_devices,"
                   "paralyzed_servers\n";
            for (const auto& r : report_.epochs)
                csv << detail::format_line("%llu,%.10g,%.10g,%.10g,%d,%d,%d,%d\n",
                                           static_cast<unsigned long long>(r.epoch), r.mi_upper_bits, r.mi_lower_bits,
                                           r.accuracy_pct, r.elections, r.aborts, r.paralyzed_devices,
                                           r.paralyzed_servers);

            std::ofstream ev(dir / "events.log");
            for (const auto& line : events_.lines) ev << line << "\n";

            std::ofstream summary(dir / "run_summary.txt");
            write_summary(summary);
        }

        const fs::path chain_path = cfg_.chain_out.empty() ? dir / "chain.txt" : fs::path(cfg_.chain_out);
        if (chain_path.has_parent_path()) fs::create_directories(chain_path.parent_path());
        std::ofstream chain_os(chain_path);
        if (const Chain* chain = final_chain()) export_chain(*chain, chain_os);
    }

    void write_models() const {
        namespace fs = std::filesystem;
        fs::create_directories(cfg_.model_out_dir);
        for (const PairState& pair : pairs_) {
            const fs::path path = fs::path(cfg_.model_out_dir) / ("pair" + std::to_string(pair.pair_id) + ".ckpt");
            save_model(path.string(), pair.encoder, pair.decoder);
        }
    }

    void write_summary(std::ostream& os) const {
        const FlopReport& f = report_.flops;
        os << "mode=" << mode_name(cfg_.mode) << "\n"
           << "dataset=" << dataset_name(cfg_.dataset) << "\n";
        os << detail::format_line("epochs=%llu batches=%llu pairs=%d\n",
                                  static_cast<unsigned long long>(cfg_.epochs),
                                  static_cast<unsigned long long>(cfg_.batches), cfg_.effective_pairs());
        os << detail::format_line("lr=%.10g beta=%.10g latent_dim=%zu trunk_dim=%zu decoder_hidden=%zu\n", cfg_.lr,
                                  cfg_.beta, cfg_.latent_dim, cfg_.trunk_dim, cfg_.decoder_hidden);
        os << detail::format_line("seed=%llu term_rounds=%llu malicious=%d policy=%s\n",
                                  static_cast<unsigned long long>(cfg_.seed),
                                  static_cast<unsigned long long>(cfg_.term.term_length_rounds),
                                  cfg_.attack.num_malicious, target_policy_name(cfg_.attack.policy));
        os << detail::format_line("status=%s%s%s\n", report_.failed ? "failed" : "ok",
                                  report_.failed ? " reason=" : "", report_.failed ? report_.failure_reason.c_str() : "");
        os << detail::format_line("epochs_run=%zu early_stopped=%d\n", report_.epochs.size(),
                                  report_.early_stopped ? 1 : 0);
        os << detail::format_line("average_accuracy_pct=%.10g\n", report_.average_accuracy_pct);
        os << detail::format_line("chain_height=%llu elections=%llu aborts=%llu rounds=%llu\n",
                                  static_cast<unsigned long long>(report_.chain_height),
                                  static_cast<unsigned long long>(report_.elections_total),
                                  static_cast<unsigned long long>(report_.aborts_total),
                                  static_cast<unsigned long long>(report_.rounds_total));
        os << detail::format_line("device_macs=%llu server_macs=%llu device_share=%.6f server_share=%.6f\n",
                                  static_cast<unsigned long long>(f.device_macs),
                                  static_cast<unsigned long long>(f.server_macs), f.device_share, f.server_share);
        os << detail::format_line("analytic_device_share=%.6f single_head_device_share=%.6f\n",
                                  f.analytic_device_share, f.single_head_device_share);
        os << detail::format_line("device_cycles=%.6g server_cycles=%.6g cycles_per_mac=%.6g\n", f.device_cycles,
                                  f.server_cycles, cfg_.cycles_per_mac);
    }

    // ----------------------------------------------------------------- fields

    ExperimentConfig cfg_;
    Dataset train_, test_;
    std::vector<Shard> train_shards_, test_shards_;
    std::size_t batch_size_ = 0;
    std::vector<PairState> pairs_;
    std::vector<RngStream> shuffle_streams_;
    Roster roster_;
    std::optional<ServerCluster> cluster_;
    RngStream election_rng_;
    RngStream attack_rng_;
    AttackState attack_state_;
    FlopCounter flops_;
    EventLog events_;
    MetricsReport report_;
    std::vector<double> epoch_losses_;
    std::vector<bool> device_was_alive_;
    std::uint64_t round_ = 0;
    int epoch_elections_ = 0;
    int epoch_aborts_ = 0;
    bool restart_requested_ = false;
};

inline MetricsReport run_experiment(const ExperimentConfig& cfg) { return Simulation(cfg).run(); }

} // namespace bvib
