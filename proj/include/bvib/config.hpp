#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bvib/attack.hpp"
#include "bvib/consensus.hpp"
#include "bvib/errors.hpp"

namespace bvib {

enum class Mode { bvib, vib_monolithic };

inline const char* mode_name(Mode m) { return m == Mode::bvib ? "bvib" : "vib-monolithic"; }

inline Mode parse_mode(const std::string& s) {
    if (s == "bvib") return Mode::bvib;
    if (s == "vib-monolithic") return Mode::vib_monolithic;
    throw ConfigError("unknown mode: " + s);
}

enum class DatasetKind { synthetic, mnist };

inline const char* dataset_name(DatasetKind d) { return d == DatasetKind::synthetic ? "synthetic" : "mnist"; }

inline DatasetKind parse_dataset(const std::string& s) {
    if (s == "synthetic") return DatasetKind::synthetic;
    if (s == "mnist") return DatasetKind::mnist;
    throw ConfigError("unknown dataset: " + s);
}

// Full parameterization of one experiment run. Defaults follow the reference
// setup: 300 epochs of 200 batches across 10 device-server pairs, learning
// rate 1e-3, encoder 784-1024-512 (two parallel heads), decoder 512-784-10,
// 600-round terms.
struct ExperimentConfig {
    Mode mode = Mode::bvib;
    std::uint64_t epochs = 300; // E
    std::uint64_t batches = 200; // B
    int pairs = 10;
    double lr = 1e-3;
    double beta = 1e-3;
    std::size_t input_dim = 784;
    std::size_t trunk_dim = 1024;
    std::size_t latent_dim = 512;
    std::size_t decoder_hidden = 784;
    int num_classes = 10;

    DatasetKind dataset = DatasetKind::synthetic;
    std::string mnist_dir;
    std::size_t train_limit = 0; // cap on training samples, 0 = all
    int synthetic_per_class = 500;
    int synthetic_test_per_class = 100;
    double synthetic_noise = 0.1;

    AttackConfig attack;
    TermConfig term;

    std::uint64_t seed = 42;
    std::string out_dir;        // empty: nothing written to disk
    std::string chain_out;      // overrides <out_dir>/chain.txt
    std::string model_out_dir;  // when set, final per-pair checkpoints land here

    bool paper_literal_reparam = false;
    bool full_restart_on_abort = false;
    double early_stop_tol = 1e-4;
    int early_stop_window = 10;
    bool mi_average_test_batches = false;
    bool test_final_epoch_only = false;
    double cycles_per_mac = 1.0;

    int effective_pairs() const { return mode == Mode::vib_monolithic ? 1 : pairs; }

    void validate() const {
        if (epochs == 0 || batches == 0) throw ConfigError("config: epochs and batches must be positive");
        if (pairs < 1) throw ConfigError("config: pairs must be >= 1");
        if (lr <= 0.0) throw ConfigError("config: learning rate must be positive");
        if (beta < 0.0) throw ConfigError("config: beta must be >= 0");
        if (latent_dim == 0 || trunk_dim == 0 || decoder_hidden == 0 || input_dim == 0)
            throw ConfigError("config: layer widths must be positive");
        if (num_classes < 2) throw ConfigError("config: need at least two classes");
        if (dataset == DatasetKind::mnist && mnist_dir.empty())
            throw ConfigError("config: mnist dataset selected but no --mnist-dir given");
        term.validate();
        const int total_nodes = effective_pairs() * (mode == Mode::bvib ? 2 : 1);
        attack.validate(total_nodes);
        if (early_stop_window < 1) throw ConfigError("config: early-stop window must be >= 1");
    }
};

struct EpochMetrics {
    std::uint64_t epoch = 0;
    double mi_upper_bits = 0.0; // test-set KL bound
    double mi_lower_bits = 0.0; // test-set likelihood bound, reported with +log2(classes)
    double accuracy_pct = 0.0;
    int elections = 0;
    int aborts = 0;
    int paralyzed_devices = 0;
    int paralyzed_servers = 0;
};

struct FlopReport {
    std::uint64_t device_macs = 0;
    std::uint64_t server_macs = 0;
    std::uint64_t total_macs = 0;
    double device_share = 0.0;
    double server_share = 0.0;
    double analytic_device_share = 0.0;    // from configured layer sizes
    double single_head_device_share = 0.0; // share if the encoder had one head
    double device_cycles = 0.0;
    double server_cycles = 0.0;
};

struct MetricsReport {
    std::vector<EpochMetrics> epochs;
    double average_accuracy_pct = 0.0; // mean of the per-epoch accuracies
    FlopReport flops;
    std::uint64_t chain_height = 0;
    std::uint64_t elections_total = 0;
    std::uint64_t aborts_total = 0;
    std::uint64_t rounds_total = 0;
    bool early_stopped = false;
    bool failed = false;
    std::string failure_reason;
};

} // namespace bvib
