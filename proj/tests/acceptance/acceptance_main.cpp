// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line. Run with no arguments for everything, or pass
// criterion numbers to run a subset (the ctest entries do the latter).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>
#include <unistd.h>

#include "bvib/bvib.hpp"

using namespace bvib;

namespace {

namespace fs = std::filesystem;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double elapsed_s(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

// ---------------------------------------------------------------------------
// criterion 1: split-vs-monolithic gradient oracle + finite differences
// ---------------------------------------------------------------------------

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

Outcome criterion1() {
    const auto start = std::chrono::steady_clock::now();

    // (a) one full split step against the monolithic route, K = 8
    {
        const std::uint64_t seed = 4242;
        PairState pair = make_pair(0, 10, 6, 8, 5, 4, seed);
        Encoder enc = pair.encoder;
        Decoder dec = pair.decoder;
        EncoderAdam enc_adam(enc);
        DecoderAdam dec_adam(dec);
        RngStream twin_eps = derive_stream(seed, StreamPurpose::reparam_eps, 0);

        FlopCounter fs_(1, 1), fm(1, 1);
        std::vector<LedgerEntry> ledger;
        RngStream rng(7);
        Matrix x(4, 10);
        for (double& v : x.data) v = rng.next_unit();
        std::vector<int> y{0, 1, 2, 3};

        auto msg = device_forward(pair, x, y, 1, 0, true, fs_);
        auto res = server_step(pair, *msg, 1e-3, 1e-3, ReparamMode::stddev, true, 1, ledger, fs_);
        device_backward(pair, res->grads, 1e-3, fs_);

        const Matrix eps = draw_eps(twin_eps, 4, 8);
        monolithic_step(enc, enc_adam, dec, dec_adam, x, y, eps, 1e-3, 1e-3, ReparamMode::stddev, fm, device_node(0));

        double worst = 0.0;
        worst = std::max(worst, rel_diff(pair.encoder.trunk.w.data, enc.trunk.w.data));
        worst = std::max(worst, rel_diff(pair.encoder.mu_head.w.data, enc.mu_head.w.data));
        worst = std::max(worst, rel_diff(pair.encoder.logvar_head.w.data, enc.logvar_head.w.data));
        worst = std::max(worst, rel_diff(pair.decoder.hidden.w.data, dec.hidden.w.data));
        worst = std::max(worst, rel_diff(pair.decoder.out.w.data, dec.out.w.data));
        if (worst > 1e-10) return {false, fmt("split vs monolithic weight diff %.3g > 1e-10", worst)};
    }

    // (b) finite differences across every layer type via the full loss
    {
        RngStream init(11);
        Encoder enc = make_encoder(6, 5, 3, init);
        Decoder dec = make_decoder(3, 4, 3, init);
        RngStream rng(12);
        Matrix x(3, 6);
        for (double& v : x.data) v = rng.next_unit();
        std::vector<int> y{0, 1, 2};
        const Matrix eps = draw_eps(rng, 3, 3);
        const double beta = 1e-2;

        auto loss_value = [&]() {
            FlopCounter f(1, 1);
            const LatentStats stats = encode(enc, x, f, device_node(0));
            const Matrix log_q = decode(dec, reparameterize(stats, eps), f, server_node(0));
            return vib_loss(mi_lower_bits(log_q, y), mi_upper_bits(stats), beta).loss;
        };
        auto finite_diff = [&](std::vector<double>& params) {
            std::vector<double> g(params.size());
            const double h = 1e-4;
            for (std::size_t i = 0; i < params.size(); ++i) {
                const double saved = params[i];
                params[i] = saved + h;
                const double up = loss_value();
                params[i] = saved - h;
                const double down = loss_value();
                params[i] = saved;
                g[i] = (up - down) / (2.0 * h);
            }
            return g;
        };

        FlopCounter f(1, 1);
        EncoderCache ecache;
        const LatentStats stats = encode(enc, x, f, device_node(0), &ecache);
        DecoderCache dcache;
        decode(dec, reparameterize(stats, eps), f, server_node(0), &dcache);
        DecoderGrads dg;
        LatentGrads lg;
        vib_backward(dec, dcache, stats, eps, y, beta, ReparamMode::stddev, f, server_node(0), dg, lg);
        const EncoderGrads eg = encoder_backward(enc, ecache, lg, f, device_node(0));

        double worst = 0.0;
        worst = std::max(worst, rel_diff(eg.dw_trunk.data, finite_diff(enc.trunk.w.data)));
        worst = std::max(worst, rel_diff(eg.db_trunk, finite_diff(enc.trunk.b)));
        worst = std::max(worst, rel_diff(eg.dw_mu.data, finite_diff(enc.mu_head.w.data)));
        worst = std::max(worst, rel_diff(eg.dw_logvar.data, finite_diff(enc.logvar_head.w.data)));
        worst = std::max(worst, rel_diff(dg.dw_hidden.data, finite_diff(dec.hidden.w.data)));
        worst = std::max(worst, rel_diff(dg.db_hidden, finite_diff(dec.hidden.b)));
        worst = std::max(worst, rel_diff(dg.dw_out.data, finite_diff(dec.out.w.data)));
        worst = std::max(worst, rel_diff(dg.db_out, finite_diff(dec.out.b)));
        if (worst > 1e-4) return {false, fmt("finite-difference error %.3g > 1e-4", worst)};
    }

    const double t = elapsed_s(start);
    if (t > 10.0) return {false, fmt("took %.1f s > 10 s", t)};
    return {true, fmt("gradient oracles agree (%.1f s)", t)};
}

// ---------------------------------------------------------------------------
// criterion 2: closed-form and Monte-Carlo MI oracles
// ---------------------------------------------------------------------------

Outcome criterion2() {
    const auto start = std::chrono::steady_clock::now();
    RngStream rng(20250202);

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 1 + rng.next_below(4);
        const std::size_t k = 1 + rng.next_below(6);
        LatentStats s;
        s.mu = Matrix(m, k);
        s.logvar = Matrix(m, k);
        for (double& v : s.mu.data) v = 2.0 * rng.next_gaussian();
        for (double& v : s.logvar.data) v = rng.next_gaussian();

        // independent evaluation: reversed order, long double accumulation
        long double total = 0.0L;
        for (std::size_t i = s.mu.data.size(); i > 0; --i) {
            const long double mu = s.mu.data[i - 1];
            const long double lv = s.logvar.data[i - 1];
            total += 0.5L * (mu * mu + std::exp((double)lv) - 1.0L - lv);
        }
        const double expected = static_cast<double>(total) / (kLn2 * static_cast<double>(m));
        if (!close_rel(mi_upper_bits(s), expected, 1e-12))
            return {false, fmt("closed-form mismatch %.17g vs %.17g", mi_upper_bits(s), expected)};
    }

    // Monte-Carlo estimate over 1e5 draws within 1%
    LatentStats s;
    s.mu = Matrix(1, 3);
    s.logvar = Matrix(1, 3);
    s.mu.data = {1.5, -1.2, 0.8};
    s.logvar.data = {0.3, -0.4, 0.1};
    const double analytic = mi_upper_bits(s);
    const double half_log_two_pi = 0.5 * std::log(2.0 * 3.14159265358979323846);
    RngStream mc(987654);
    long double acc = 0.0L;
    const int draws = 100000;
    for (int d = 0; d < draws; ++d) {
        for (std::size_t k = 0; k < 3; ++k) {
            const double lv = s.logvar(0, k);
            const double sd = std::exp(0.5 * lv);
            const double z = s.mu(0, k) + sd * mc.next_gaussian();
            const double centered = (z - s.mu(0, k)) / sd;
            const double log_p = -0.5 * centered * centered - 0.5 * lv - half_log_two_pi;
            const double log_r = -0.5 * z * z - half_log_two_pi;
            acc += log_p - log_r;
        }
    }
    const double mc_bits = static_cast<double>(acc) / (draws * kLn2);
    if (std::abs(mc_bits - analytic) / analytic > 0.01)
        return {false, fmt("Monte-Carlo %.5f vs analytic %.5f beyond 1%%", mc_bits, analytic)};

    const double t = elapsed_s(start);
    if (t > 30.0) return {false, fmt("took %.1f s > 30 s", t)};
    return {true, fmt("closed-form within 1e-12, Monte-Carlo within 1%% (%.1f s)", t)};
}

// ---------------------------------------------------------------------------
// criterion 3/4: desk-scale learning and the MI trend on the same run
// ---------------------------------------------------------------------------

ExperimentConfig synthetic_desk_config() {
    ExperimentConfig cfg;
    cfg.mode = Mode::bvib;
    cfg.pairs = 1;
    cfg.epochs = 30;
    cfg.batches = 50; // 5000 training samples, batches of 100
    cfg.latent_dim = 16;
    cfg.trunk_dim = 64;
    cfg.beta = 1e-3;
    cfg.synthetic_per_class = 500;
    cfg.synthetic_test_per_class = 100;
    cfg.seed = 1;
    return cfg;
}

std::string mnist_directory() {
    if (const char* env = std::getenv("BVIB_MNIST_DIR"); env != nullptr && *env != '\0') return env;
    for (const char* candidate : {"data/mnist", "../data/mnist", "/root/data/mnist"})
        if (fs::exists(fs::path(candidate) / "train-images-idx3-ubyte")) return candidate;
    return "";
}

const MetricsReport& synthetic_desk_run() {
    static const MetricsReport report = run_experiment(synthetic_desk_config());
    return report;
}

Outcome criterion3() {
    const auto start = std::chrono::steady_clock::now();

    const MetricsReport& synth = synthetic_desk_run();
    if (synth.failed) return {false, "synthetic run failed: " + synth.failure_reason};
    const double synth_acc = synth.epochs.back().accuracy_pct;
    if (synth_acc < 95.0) return {false, fmt("synthetic accuracy %.2f%% < 95%%", synth_acc)};

    std::string mnist_note;
    const std::string mnist_dir = mnist_directory();
    if (!mnist_dir.empty()) {
        ExperimentConfig cfg;
        cfg.mode = Mode::bvib;
        cfg.pairs = 1;
        cfg.epochs = 20;
        cfg.batches = 200; // 10k subset, batches of 50
        cfg.latent_dim = 64;
        cfg.trunk_dim = 256;
        cfg.dataset = DatasetKind::mnist;
        cfg.mnist_dir = mnist_dir;
        cfg.train_limit = 10000;
        cfg.seed = 1;
        const MetricsReport report = run_experiment(cfg);
        if (report.failed) return {false, "mnist run failed: " + report.failure_reason};
        const double acc = report.epochs.back().accuracy_pct;
        if (acc < 90.0) return {false, fmt("mnist accuracy %.2f%% < 90%%", acc)};
        mnist_note = fmt(", mnist %.2f%%", acc);
    } else {
        mnist_note = ", mnist SKIPPED (no IDX files found; set BVIB_MNIST_DIR)";
    }

    const double t = elapsed_s(start);
    if (t > 600.0) return {false, fmt("took %.1f s > 600 s", t)};
    return {true, fmt("synthetic %.2f%%%s (%.1f s)", synth_acc, mnist_note.c_str(), t)};
}

Outcome criterion4() {
    const auto start = std::chrono::steady_clock::now();
    const MetricsReport& report = synthetic_desk_run();
    if (report.failed) return {false, "underlying run failed"};
    const std::size_t n = report.epochs.size();
    if (n < 8) return {false, "too few epochs for quartile means"};
    const std::size_t q = n / 4;

    auto quartile_mean = [&](bool first, auto getter) {
        double s = 0.0;
        for (std::size_t i = 0; i < q; ++i) s += getter(report.epochs[first ? i : n - q + i]);
        return s / static_cast<double>(q);
    };

    const double upper_first = quartile_mean(true, [](const EpochMetrics& e) { return e.mi_upper_bits; });
    const double upper_last = quartile_mean(false, [](const EpochMetrics& e) { return e.mi_upper_bits; });
    const double lower_first = quartile_mean(true, [](const EpochMetrics& e) { return e.mi_lower_bits; });
    const double lower_last = quartile_mean(false, [](const EpochMetrics& e) { return e.mi_lower_bits; });

    if (!(upper_last < upper_first))
        return {false, fmt("mi_upper quartile means %.4f -> %.4f not decreasing", upper_first, upper_last)};
    if (!(lower_last > lower_first))
        return {false, fmt("mi_lower quartile means %.4f -> %.4f not increasing", lower_first, lower_last)};

    const double t = elapsed_s(start);
    return {true, fmt("mi_upper %.3f->%.3f bits, mi_lower %.3f->%.3f bits (%.1f s)", upper_first, upper_last,
                      lower_first, lower_last, t)};
}

// ---------------------------------------------------------------------------
// criterion 5: accuracy degradation under attack, and recovery by election
// ---------------------------------------------------------------------------

ExperimentConfig attack_sweep_config(std::uint64_t seed, int malicious, TargetPolicy policy, Mode mode) {
    ExperimentConfig cfg;
    cfg.mode = mode;
    cfg.pairs = 10;
    cfg.epochs = 15;
    cfg.batches = 10; // shards of 200, batches of 20
    cfg.latent_dim = 16;
    cfg.trunk_dim = 64;
    cfg.synthetic_per_class = 200;
    cfg.synthetic_test_per_class = 40;
    cfg.seed = seed;
    cfg.attack.num_malicious = malicious;
    cfg.attack.policy = policy;
    return cfg;
}

Outcome criterion5() {
    const auto start = std::chrono::steady_clock::now();
    const int seeds = 10;

    // run everything through a two-worker pool (runs are independent)
    std::vector<std::function<double()>> jobs;
    std::vector<double> results;

    auto mean_accuracy = [](const ExperimentConfig& cfg) {
        const MetricsReport r = run_experiment(cfg);
        return r.failed ? 0.0 : r.average_accuracy_pct;
    };

    // jobs 0..59: uniform-any sweep over malicious counts 0..5
    for (int m = 0; m <= 5; ++m)
        for (int s = 0; s < seeds; ++s)
            jobs.emplace_back([=]() {
                return mean_accuracy(attack_sweep_config(100 + static_cast<std::uint64_t>(s), m,
                                                         TargetPolicy::uniform_any, Mode::bvib));
            });
    // jobs 60..69: bvib under leader-focused attack
    for (int s = 0; s < seeds; ++s)
        jobs.emplace_back([=]() {
            return mean_accuracy(attack_sweep_config(100 + static_cast<std::uint64_t>(s), 1,
                                                     TargetPolicy::leader_focused, Mode::bvib));
        });
    // jobs 70..79: monolithic host under the same single attacker
    for (int s = 0; s < seeds; ++s)
        jobs.emplace_back([=]() {
            return mean_accuracy(attack_sweep_config(100 + static_cast<std::uint64_t>(s), 1,
                                                     TargetPolicy::uniform_any, Mode::vib_monolithic));
        });

    results.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            results[i] = jobs[i]();
        }
    };
    std::thread t1(worker), t2(worker);
    t1.join();
    t2.join();

    std::vector<double> sweep_mean(6, 0.0);
    for (int m = 0; m <= 5; ++m) {
        for (int s = 0; s < seeds; ++s) sweep_mean[m] += results[static_cast<std::size_t>(m * seeds + s)];
        sweep_mean[m] /= seeds;
    }
    double bvib_attacked = 0.0, mono_attacked = 0.0;
    for (int s = 0; s < seeds; ++s) {
        bvib_attacked += results[static_cast<std::size_t>(60 + s)];
        mono_attacked += results[static_cast<std::size_t>(70 + s)];
    }
    bvib_attacked /= seeds;
    mono_attacked /= seeds;

    std::string curve;
    for (int m = 0; m <= 5; ++m) curve += fmt("%s%.2f", m == 0 ? "" : " ", sweep_mean[m]);

    for (int m = 1; m <= 5; ++m)
        if (sweep_mean[m] > sweep_mean[m - 1] + 0.5)
            return {false, fmt("accuracy not non-increasing at m=%d (curve: %s)", m, curve.c_str())};

    if (bvib_attacked < mono_attacked + 5.0)
        return {false, fmt("bvib %.2f%% vs monolithic %.2f%% under attack: gap < 5pp", bvib_attacked, mono_attacked)};

    const double t = elapsed_s(start);
    if (t > 900.0) return {false, fmt("took %.1f s > 900 s", t)};
    return {true, fmt("curve [%s], bvib %.1f%% vs monolithic %.1f%% (%.1f s)", curve.c_str(), bvib_attacked,
                      mono_attacked, t)};
}

// ---------------------------------------------------------------------------
// criterion 6: scripted consensus scenarios
// ---------------------------------------------------------------------------

Outcome criterion6() {
    const auto start = std::chrono::steady_clock::now();

    // (a) paralyzed leader: one election within the miss threshold, then
    // committing resumes
    {
        EventLog log;
        TermConfig term;
        ServerCluster cluster(5, term, &log);
        RngStream rng(61);
        cluster.start_election(rng, 0);
        cluster.create_genesis(0);
        const int old_leader = *cluster.leader_id();

        std::vector<bool> alive(5, true);
        alive[static_cast<std::size_t>(old_leader)] = false;
        std::uint64_t round = 1;
        cluster.sync_alive(alive, round);
        std::uint64_t elections = 0;
        for (; round <= static_cast<std::uint64_t>(term.missed_heartbeat_threshold); ++round)
            if (cluster.heartbeat_tick(rng, round)) ++elections;
        if (elections != 1) return {false, fmt("scenario a: %llu elections, expected 1", (unsigned long long)elections)};
        if (!cluster.leader_alive() || *cluster.leader_id() == old_leader)
            return {false, "scenario a: no fresh leader"};
        for (int i = 0; i < 5; ++i)
            if (cluster.node(i).alive) cluster.node(i).pending.push_back({1, 0, i, 1.0, -1.0, round});
        if (!cluster.collect_and_commit(round).committed) return {false, "scenario a: training did not resume"};
    }

    // (b) quorum: 4 of 9 followers aborts and the aborted entries are gone
    // for good; 5 of 9 commits
    {
        EventLog log;
        ServerCluster cluster(10, TermConfig{}, &log);
        RngStream rng(62);
        cluster.start_election(rng, 0);
        cluster.create_genesis(0);
        const int leader = *cluster.leader_id();

        auto with_down_followers = [&](int down, std::uint64_t round) {
            std::vector<bool> alive(10, true);
            int n = 0;
            for (int i = 0; i < 10 && n < down; ++i) {
                if (i == leader) continue;
                alive[static_cast<std::size_t>(i)] = false;
                ++n;
            }
            cluster.sync_alive(alive, round);
        };

        with_down_followers(5, 1); // 4 respond
        std::vector<LedgerEntry> aborted;
        for (int i = 0; i < 10; ++i)
            if (cluster.node(i).alive) {
                cluster.node(i).pending.push_back({1, 7, i, 2.0, -2.0, 1});
                aborted.push_back(cluster.node(i).pending.back());
            }
        const CommitResult abort_result = cluster.collect_and_commit(1);
        if (abort_result.committed || abort_result.received != 4)
            return {false, fmt("scenario b: expected abort with 4 received, got committed=%d received=%d",
                               abort_result.committed ? 1 : 0, abort_result.received)};

        with_down_followers(4, 2); // 5 respond
        for (int i = 0; i < 10; ++i)
            if (cluster.node(i).alive) cluster.node(i).pending.push_back({1, 8, i, 3.0, -3.0, 2});
        const CommitResult commit_result = cluster.collect_and_commit(2);
        if (!commit_result.committed || commit_result.received != 5)
            return {false, fmt("scenario b: expected commit with 5 received, got committed=%d received=%d",
                               commit_result.committed ? 1 : 0, commit_result.received)};

        for (const Block& b : cluster.replica(leader).blocks)
            for (const LedgerEntry& e : b.entries)
                for (const LedgerEntry& lost : aborted)
                    if (e == lost) return {false, "scenario b: aborted entry reached the chain"};
    }

    // (c) term expiry with a healthy leader forces a re-election
    {
        EventLog log;
        TermConfig term;
        term.term_length_rounds = 8;
        ServerCluster cluster(3, term, &log);
        RngStream rng(63);
        cluster.start_election(rng, 0);
        std::uint64_t round = 1;
        std::uint64_t elections = 0;
        for (; round <= 8; ++round) {
            if (cluster.term_expired(round)) {
                cluster.start_election(rng, round);
                ++elections;
            }
            cluster.heartbeat_tick(rng, round);
        }
        if (elections != 1) return {false, fmt("scenario c: %llu re-elections in one term window", (unsigned long long)elections)};
        if (cluster.term() != 2) return {false, "scenario c: term did not advance"};
    }

    const double t = elapsed_s(start);
    if (t > 3.0) return {false, fmt("took %.2f s, expected well under a second per scenario", t)};
    return {true, fmt("leader failover, quorum abort/commit, term expiry all as scripted (%.2f s)", t)};
}

// ---------------------------------------------------------------------------
// criterion 7: chain tamper detection and majority reconciliation
// ---------------------------------------------------------------------------

Outcome criterion7() {
    const auto start = std::chrono::steady_clock::now();

    Chain chain;
    make_genesis(chain, 1, 0);
    RngStream rng(71);
    for (int b = 1; b <= 40; ++b) {
        std::vector<LedgerEntry> entries;
        for (int e = 0; e < 4; ++e)
            entries.push_back({static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(e), e,
                               rng.next_unit() * 3.0 + 0.01, -rng.next_unit() * 3.0 - 0.01,
                               static_cast<std::uint64_t>(b)});
        append_block(chain, std::move(entries), 1, static_cast<std::uint64_t>(b), Role::leader);
    }
    if (validate_chain(chain).has_value()) return {false, "pristine chain failed validation"};

    int detected = 0;
    const int trials = 1000;
    for (int trial = 0; trial < trials; ++trial) {
        Chain tampered = chain;
        const std::size_t target = rng.next_below(tampered.height());
        Block& b = tampered.blocks[target];
        switch (rng.next_below(7)) {
            case 0: b.height += 1 + rng.next_below(5); break;
            case 1: b.round += 1 + rng.next_below(5); break;
            case 2: b.term += 1 + rng.next_below(5); break;
            case 3: b.prev_hash[rng.next_below(32)] ^= static_cast<std::uint8_t>(1 + rng.next_below(255)); break;
            case 4: b.hash[rng.next_below(32)] ^= static_cast<std::uint8_t>(1 + rng.next_below(255)); break;
            case 5:
                if (b.entries.empty()) {
                    b.term += 1;
                } else {
                    b.entries[rng.next_below(b.entries.size())].mi_upper_bits += 1e-9;
                }
                break;
            default:
                if (b.entries.empty()) {
                    b.round += 1;
                } else {
                    b.entries[rng.next_below(b.entries.size())].pair_id += 1;
                }
                break;
        }
        if (validate_chain(tampered).has_value()) ++detected;
    }
    if (detected != trials) return {false, fmt("only %d/%d mutations detected", detected, trials)};

    // majority reconciliation across ten replicas, four of them relinked
    std::vector<Chain> replicas(10, chain);
    for (int i = 0; i < 4; ++i) {
        Chain& c = replicas[static_cast<std::size_t>(i)];
        c.blocks[5].entries[0].mi_upper_bits = 123.0;
        for (std::size_t h = 5; h < c.blocks.size(); ++h) {
            if (h > 5) c.blocks[h].prev_hash = c.blocks[h - 1].hash;
            c.blocks[h].hash = hash_block(c.blocks[h]);
        }
        if (validate_chain(c).has_value()) return {false, "relinked copy should self-validate"};
    }
    std::vector<const Chain*> ptrs;
    for (const Chain& c : replicas) ptrs.push_back(&c);
    const auto winner = majority_replica(ptrs);
    if (!winner.has_value()) return {false, "no majority found"};
    if (!(replicas[*winner] == chain)) return {false, "majority version is not the untampered chain"};

    const double t = elapsed_s(start);
    if (t > 30.0) return {false, fmt("took %.1f s > 30 s", t)};
    return {true, fmt("1000/1000 mutations detected, majority restored the chain (%.1f s)", t)};
}

// ---------------------------------------------------------------------------
// criterion 8: resource split
// ---------------------------------------------------------------------------

Outcome criterion8() {
    const auto start = std::chrono::steady_clock::now();

    ExperimentConfig cfg;
    cfg.mode = Mode::bvib;
    cfg.pairs = 2;
    cfg.epochs = 2;
    cfg.batches = 10; // shards of 300, batches of 30
    cfg.latent_dim = 16;
    cfg.trunk_dim = 64;
    cfg.synthetic_per_class = 60;
    cfg.synthetic_test_per_class = 10;
    cfg.seed = 5;

    const MetricsReport bvib_report = run_experiment(cfg);
    if (bvib_report.failed) return {false, "bvib run failed"};
    const FlopReport& f = bvib_report.flops;

    if (std::abs(f.device_share - f.analytic_device_share) > 0.01)
        return {false, fmt("device share %.4f vs analytic %.4f differs by more than 1%%", f.device_share,
                           f.analytic_device_share)};
    if (!(f.device_share < 1.0)) return {false, "device share is not below 100%"};
    if (!(f.server_share > 0.0)) return {false, "server share is not positive"};

    ExperimentConfig mono = cfg;
    mono.mode = Mode::vib_monolithic;
    const MetricsReport mono_report = run_experiment(mono);
    if (mono_report.failed) return {false, "monolithic run failed"};
    const std::uint64_t mono_total = mono_report.flops.total_macs;
    if (!(f.device_macs < mono_total))
        return {false, fmt("device macs %llu not below monolithic %llu", (unsigned long long)f.device_macs,
                           (unsigned long long)mono_total)};

    const double t = elapsed_s(start);
    return {true, fmt("device share %.2f%% (analytic %.2f%%), device %llu < monolithic %llu MACs (%.1f s)",
                      f.device_share * 100.0, f.analytic_device_share * 100.0, (unsigned long long)f.device_macs,
                      (unsigned long long)mono_total, t)};
}

// ---------------------------------------------------------------------------
// criterion 9: determinism
// ---------------------------------------------------------------------------

Outcome criterion9() {
    const auto start = std::chrono::steady_clock::now();

    const fs::path base = fs::temp_directory_path() / ("bvib_accept9_" + std::to_string(::getpid()));
    fs::remove_all(base);

    ExperimentConfig cfg;
    cfg.mode = Mode::bvib;
    cfg.pairs = 4;
    cfg.epochs = 4;
    cfg.batches = 5; // shards of 100, batches of 20
    cfg.latent_dim = 8;
    cfg.trunk_dim = 32;
    cfg.input_dim = 64;
    cfg.synthetic_per_class = 40;
    cfg.synthetic_test_per_class = 10;
    cfg.attack.num_malicious = 2;
    cfg.seed = 99;

    cfg.out_dir = (base / "run1").string();
    run_experiment(cfg);
    cfg.out_dir = (base / "run2").string();
    run_experiment(cfg);

    for (const char* name : {"metrics.csv", "chain.txt"}) {
        const std::string a = slurp(base / "run1" / name);
        const std::string b = slurp(base / "run2" / name);
        if (a.empty()) return {false, fmt("%s is empty", name)};
        if (a != b) return {false, fmt("%s differs between identical runs", name)};
    }
    fs::remove_all(base);

    const double t = elapsed_s(start);
    return {true, fmt("metrics.csv and chain export byte-identical across reruns (%.1f s)", t)};
}

} // namespace

int main(int argc, char** argv) {
    struct Entry {
        int id;
        const char* name;
        Outcome (*fn)();
    };
    const Entry entries[] = {
        {1, "gradient oracle (split = monolithic, finite differences)", criterion1},
        {2, "closed-form and Monte-Carlo MI oracles", criterion2},
        {3, "desk-scale learning accuracy", criterion3},
        {4, "MI trends across epochs", criterion4},
        {5, "accuracy degradation under attack and recovery by election", criterion5},
        {6, "scripted consensus scenarios", criterion6},
        {7, "chain tamper detection and reconciliation", criterion7},
        {8, "device/server resource split", criterion8},
        {9, "byte-identical reruns", criterion9},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const Entry& e : entries) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), e.id) == selected.end()) continue;
        const Outcome r = e.fn();
        std::printf("%s criterion %d: %s -- %s\n", r.pass ? "PASS" : "FAIL", e.id, e.name, r.detail.c_str());
        std::fflush(stdout);
        if (!r.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
