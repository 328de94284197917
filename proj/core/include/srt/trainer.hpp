#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "srt/dataset.hpp"
#include "srt/mlp.hpp"
#include "srt/schedule.hpp"
#include "srt/selection.hpp"
#include "srt/transform.hpp"

namespace srt {

// What to do before the first snapshot exists (cycle 1, P = 0):
// `none` trains on full batches; `current_model` filters with the live
// parameters as a one-member ensemble (classic small-loss selection).
enum class WarmupFilterMode { none, current_model };

struct TrainConfig {
    int num_cycles = 10;        // K
    int cycle_epochs = 20;      // C; total epochs = K * C
    int ensemble_capacity = 2;  // P'
    double lambda = 0.9;
    int batch_size = 128;
    double eps_max = 1e-3;      // cyclical lr peak
    double eps_min = 0.0;       // cyclical lr floor
    double noise_rate = 0.0;    // eta (percent) driving the keep-rate ramp
    int ramp_epochs = 10;       // T_k
    int hidden_width = 256;

    std::uint64_t init_seed = 1;
    std::uint64_t data_seed = 1;
    std::uint64_t augment_seed = 1;

    WarmupFilterMode warmup_filter_mode = WarmupFilterMode::none;
    bool filter_enabled = true;          // false trains on every sample
    bool use_js_train = true;            // false drops the training consistency term
    bool use_js_acq = true;              // false scores batches by ensemble CE alone
    bool use_snapshot_ensemble = true;   // false ignores snapshots when scoring
    bool include_current_model = false;  // append live params as an extra member
    bool warmup_constant_lr = false;     // hold eps_max through the first cycle

    AdamConfig adam;
    TransformSpec transform;

    std::string snapshot_dir;    // when set, each cycle's snapshot is saved here
    std::string score_dump_dir;  // when set, per-epoch acquisition scores are dumped
};

struct EpochMetrics {
    int epoch = 0;
    double test_accuracy = 0.0;
    double label_precision = 0.0;  // mean per-batch clean fraction of the kept set
    double mean_js_clean = 0.0;    // mean acquisition js_part over clean samples
    double mean_js_noisy = 0.0;    // same over corrupted samples; 0 if none scored
    double lr_start = 0.0;         // lr applied at the first and last iteration
    double lr_end = 0.0;
    double keep_rate = 1.0;        // effective rate; 1 while filtering is inactive
    std::int64_t kept_count = 0;
    std::int64_t dropped_count = 0;
};

struct RunResult {
    ModelParams model;
    std::vector<EpochMetrics> metrics;
};

struct Summary {
    double mean_accuracy = 0.0;  // over the final `window` epochs
    double std_accuracy = 0.0;   // population standard deviation
    double best_accuracy = 0.0;
    int best_epoch = 0;
    int window = 0;
};

// Executes the full K * C epoch loop: per iteration, set the cyclical lr,
// score the mini-batch against the snapshot ensemble, keep the
// ceil(r(t) * |B|) lowest-scoring samples, and take one Adam step on the
// filtered batch; snapshots are pushed at every cycle boundary. Metrics are
// recorded on the live model after each epoch. Deterministic in the config.
RunResult run(const LabeledDataset& train_set, const LabeledDataset& test_set,
              const TrainConfig& cfg);

// Fraction of test samples whose argmax prediction (ties broken by lowest
// class index) matches the clean label.
double evaluate(const ModelParams& params, const LabeledDataset& test_set,
                const TransformSpec& transform);

// Fraction of the kept samples whose noisy label is the clean label.
double label_precision(const MiniBatch& kept, const LabeledDataset& dataset);

Summary summarize(const std::vector<EpochMetrics>& metrics, int window = 10);

// Header: epoch,test_accuracy,label_precision,mean_js_clean,mean_js_noisy,
// lr_start,lr_end,keep_rate,kept,dropped.
void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& metrics);

} // namespace srt
