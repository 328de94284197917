#pragma once

#include <string>
#include <utility>
#include <vector>

#include "srt/dataset.hpp"
#include "srt/trainer.hpp"

namespace srt {

enum class DatasetKind { mnist, blobs };

struct BlobsParams {
    int num_classes = 4;
    int per_class = 400;       // training samples per class
    int test_per_class = 100;  // held-out samples per class, same means
    int dim = 16;              // signal dims, a square grid when pad_px > 0
    double separation = 6.0;
    std::uint64_t seed = 7;
    // Zero border added around the sqrt(dim) x sqrt(dim) grid, so 1-px
    // translations permute coordinates instead of truncating them.
    int pad_px = 0;
};

// ---------------------------------------------------------------------------
// ExperimentSpec: one fully resolved experiment.
//
// `noise.rate` drives both the corruption and the keep-rate ramp. Per repeat
// seed r, each role seed is derived as mix(configured base, r, role key), so
// repeats differ everywhere and roles never collide even with equal bases.
// ---------------------------------------------------------------------------
struct ExperimentSpec {
    DatasetKind dataset = DatasetKind::blobs;
    std::string mnist_dir;  // directory holding the four canonical idx files
    BlobsParams blobs;
    NoiseSpec noise;
    TrainConfig train;
    std::vector<std::uint64_t> repeat_seeds = {1, 2, 3, 4, 5};
    std::string output_dir = "out";
};

enum class Mode { standard, srt, srt_ce_only, srt_ce_train, srt_no_ensemble, srt_with_current };

struct SeedRun {
    std::uint64_t seed = 0;
    Summary summary;
    std::vector<EpochMetrics> metrics;
};

struct AggregateReport {
    std::vector<SeedRun> seeds;
    double mean_accuracy = 0.0;  // mean over per-seed last-window means
    double std_accuracy = 0.0;   // population std over per-seed means
};

struct ModeRow {
    Mode mode;
    AggregateReport report;
};

// Known presets: mnist-sym20, mnist-sym50, mnist-sym80, mnist-asym40,
// blobs-sym40. Unknown names raise with the list of valid ones.
ExperimentSpec preset_spec(const std::string& name);
std::vector<std::string> preset_names();

// Applies one flat `key=value` setting; unknown keys and out-of-range values
// raise errors naming the key.
void apply_key(ExperimentSpec& spec, const std::string& key, const std::string& value);

// Flat key=value file; '#' starts a comment. Later lines win.
ExperimentSpec parse_config_file(const std::string& path, ExperimentSpec base);

// Every constant affecting a run, one `key=value` per line; valid input for
// parse_config_file.
std::string echo_config(const ExperimentSpec& spec);

Mode mode_from_string(const std::string& name);
std::string mode_name(Mode mode);
TrainConfig apply_mode(TrainConfig cfg, Mode mode);

// (train with noisy labels, clean test set); for blobs both halves share the
// class means. Raises if mnist files are missing.
std::pair<LabeledDataset, LabeledDataset> load_experiment_data(const ExperimentSpec& spec);

// Runs train.run once per repeat seed; writes per-seed metrics CSVs, the
// resolved config, summary.json, and an SVG chart under spec.output_dir.
AggregateReport run_experiment(const ExperimentSpec& spec);

// Shared-seed ablation grid; per-mode outputs land in output_dir/<mode> and
// a comparison table in output_dir/comparison.csv.
std::vector<ModeRow> compare_modes(const ExperimentSpec& spec, const std::vector<Mode>& modes);

// Test accuracy and label precision versus epoch, one polyline per seed.
std::string render_chart_svg(const std::vector<SeedRun>& seeds);

std::string aggregate_json(const ExperimentSpec& spec, const AggregateReport& report);

} // namespace srt
