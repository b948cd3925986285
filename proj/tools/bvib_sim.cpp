// Command-line front end for the BVIB split-training simulator.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bvib/bvib.hpp"

int main(int argc, char** argv) {
    CLI::App app{"BVIB: split variational-information-bottleneck training over a consensus ledger"};

    bvib::ExperimentConfig cfg;
    std::string mode = "bvib";
    std::string dataset = "synthetic";
    std::string policy = "uniform-any";
    unsigned long long paralysis_epochs = 1;
    bool no_reselect = false;

    app.add_option("--mode", mode, "bvib | vib-monolithic")->capture_default_str();
    app.add_option("--epochs", cfg.epochs, "training epochs (E)")->capture_default_str();
    app.add_option("--batches", cfg.batches, "batches per epoch (B)")->capture_default_str();
    app.add_option("--pairs", cfg.pairs, "device-server pairs")->capture_default_str();
    app.add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
    app.add_option("--beta", cfg.beta, "compression weight in the loss")->capture_default_str();
    app.add_option("--latent-dim", cfg.latent_dim, "latent width K")->capture_default_str();
    app.add_option("--trunk-dim", cfg.trunk_dim, "encoder hidden width")->capture_default_str();
    app.add_option("--dataset", dataset, "synthetic | mnist")->capture_default_str();
    app.add_option("--mnist-dir", cfg.mnist_dir, "directory with the four standard IDX files");
    app.add_option("--train-limit", cfg.train_limit, "cap on training samples (0 = all)")->capture_default_str();
    app.add_option("--per-class", cfg.synthetic_per_class, "synthetic training samples per class")
        ->capture_default_str();
    app.add_option("--test-per-class", cfg.synthetic_test_per_class, "synthetic test samples per class")
        ->capture_default_str();
    app.add_option("--noise", cfg.synthetic_noise, "synthetic blob noise")->capture_default_str();
    app.add_option("--malicious", cfg.attack.num_malicious, "number of malicious nodes")->capture_default_str();
    app.add_option("--target-policy", policy, "uniform-any | leader-focused | devices-only | servers-only")
        ->capture_default_str();
    app.add_option("--paralysis-epochs", paralysis_epochs, "epochs a hit node stays down")->capture_default_str();
    app.add_flag("--no-reselect", no_reselect, "malicious nodes keep their first targets");
    app.add_option("--term-rounds", cfg.term.term_length_rounds, "rounds per leadership term")
        ->capture_default_str();
    app.add_option("--heartbeat-interval", cfg.term.heartbeat_interval, "rounds between heartbeats")
        ->capture_default_str();
    app.add_option("--miss-threshold", cfg.term.missed_heartbeat_threshold,
                   "missed heartbeats before an election")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "master seed")->capture_default_str();
    app.add_option("--out", cfg.out_dir, "output directory (metrics.csv, run_summary.txt, chain.txt, events.log)");
    app.add_option("--chain-out", cfg.chain_out, "chain export path (default <out>/chain.txt)");
    app.add_option("--save-model", cfg.model_out_dir, "directory for final per-pair model checkpoints");
    app.add_flag("--paper-literal", cfg.paper_literal_reparam,
                 "reparameterize with the variance as the noise multiplier");
    app.add_flag("--full-restart-on-abort", cfg.full_restart_on_abort,
                 "restart training from scratch when a round aborts");
    app.add_option("--early-stop-tol", cfg.early_stop_tol, "relative loss change that counts as converged")
        ->capture_default_str();
    app.add_flag("--mi-average-test-batches", cfg.mi_average_test_batches,
                 "average MI over all test batches instead of the last one");
    app.add_flag("--test-final-only", cfg.test_final_epoch_only, "run the test pass only after the final epoch");
    app.add_option("--cycles-per-mac", cfg.cycles_per_mac, "cycle-cost proxy per multiply-accumulate")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.mode = bvib::parse_mode(mode);
        cfg.dataset = bvib::parse_dataset(dataset);
        cfg.attack.policy = bvib::parse_target_policy(policy);
        cfg.attack.paralysis_epochs = paralysis_epochs;
        cfg.attack.reselect_each_epoch = !no_reselect;

        const bvib::MetricsReport report = bvib::run_experiment(cfg);

        std::printf("status: %s\n", report.failed ? ("FAILED (" + report.failure_reason + ")").c_str() : "ok");
        std::printf("epochs run: %zu%s\n", report.epochs.size(), report.early_stopped ? " (early stop)" : "");
        std::printf("average accuracy: %.2f%%\n", report.average_accuracy_pct);
        if (!report.epochs.empty()) {
            const auto& last = report.epochs.back();
            std::printf("final epoch: accuracy %.2f%%, mi_upper %.4f bits, mi_lower %.4f bits\n", last.accuracy_pct,
                        last.mi_upper_bits, last.mi_lower_bits);
        }
        std::printf("chain height: %llu, elections: %llu, aborts: %llu, rounds: %llu\n",
                    static_cast<unsigned long long>(report.chain_height),
                    static_cast<unsigned long long>(report.elections_total),
                    static_cast<unsigned long long>(report.aborts_total),
                    static_cast<unsigned long long>(report.rounds_total));
        std::printf("device/server MACs: %llu / %llu (device share %.1f%%)\n",
                    static_cast<unsigned long long>(report.flops.device_macs),
                    static_cast<unsigned long long>(report.flops.server_macs), report.flops.device_share * 100.0);
        if (!cfg.out_dir.empty()) std::printf("outputs written to %s\n", cfg.out_dir.c_str());
        return report.failed ? 2 : 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
