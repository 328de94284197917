#include "srt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace srt {

namespace {

void validate(const LabeledDataset& train_set, const LabeledDataset& test_set,
              const TrainConfig& cfg) {
    if (train_set.size() == 0 || test_set.size() == 0) {
        throw std::invalid_argument("datasets must be non-empty");
    }
    if (train_set.num_classes != test_set.num_classes) {
        throw std::invalid_argument("class count mismatch: train " +
                                    std::to_string(train_set.num_classes) + " vs test " +
                                    std::to_string(test_set.num_classes));
    }
    if (train_set.feature_dim() != test_set.feature_dim()) {
        throw std::invalid_argument("feature dim mismatch: train " +
                                    std::to_string(train_set.feature_dim()) + " vs test " +
                                    std::to_string(test_set.feature_dim()));
    }
    if (cfg.num_cycles < 1) throw std::invalid_argument("num_cycles must be >= 1");
    if (cfg.cycle_epochs < 1) throw std::invalid_argument("cycle_epochs must be >= 1");
    if (cfg.ensemble_capacity < 1) throw std::invalid_argument("ensemble_capacity must be >= 1");
    if (cfg.lambda < 0.0 || cfg.lambda > 1.0) throw std::invalid_argument("lambda must be in [0,1]");
    if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (cfg.eps_max <= 0.0) throw std::invalid_argument("eps_max must be > 0");
    if (cfg.eps_min < 0.0 || cfg.eps_min > cfg.eps_max) {
        throw std::invalid_argument("eps_min must be in [0, eps_max]");
    }
    if (cfg.noise_rate < 0.0 || cfg.noise_rate >= 100.0) {
        throw std::invalid_argument("noise_rate must be in [0, 100)");
    }
    if (cfg.ramp_epochs < 1) throw std::invalid_argument("ramp_epochs must be >= 1");
    if (cfg.hidden_width < 1) throw std::invalid_argument("hidden_width must be >= 1");
}

} // namespace

double evaluate(const ModelParams& params, const LabeledDataset& test_set,
                const TransformSpec& transform) {
    if (params.input_dim() != test_set.feature_dim() ||
        params.output_dim() != test_set.num_classes) {
        throw std::invalid_argument("model shape does not match the test set");
    }
    const Eigen::Index n = test_set.size();
    const Eigen::Index chunk = 512;
    Eigen::Index correct = 0;
    for (Eigen::Index lo = 0; lo < n; lo += chunk) {
        const Eigen::Index len = std::min(chunk, n - lo);
        const SampleMatrix x = normalize(test_set.features.middleRows(lo, len), transform);
        const Eigen::MatrixXd logits = forward_logits(params, x);
        for (Eigen::Index i = 0; i < len; ++i) {
            Eigen::Index pred = 0;
            for (Eigen::Index c = 1; c < logits.cols(); ++c) {
                if (logits(i, c) > logits(i, pred)) pred = c; // ties keep the lower class
            }
            if (int(pred) == test_set.clean_labels[std::size_t(lo + i)]) ++correct;
        }
    }
    return double(correct) / double(n);
}

double label_precision(const MiniBatch& kept, const LabeledDataset& dataset) {
    if (kept.size() == 0) throw std::invalid_argument("label precision of an empty selection");
    Eigen::Index clean = 0;
    for (Eigen::Index i : kept.indices) {
        if (dataset.is_clean(i)) ++clean;
    }
    return double(clean) / double(kept.size());
}

RunResult run(const LabeledDataset& train_set, const LabeledDataset& test_set,
              const TrainConfig& cfg) {
    validate(train_set, test_set, cfg);

    const Eigen::Index n = train_set.size();
    ModelParams params = init_params(train_set.feature_dim(), cfg.hidden_width,
                                     train_set.num_classes, cfg.init_seed);
    AdamState adam = init_adam_state(params);

    LrSchedule sched;
    sched.eps_max = cfg.eps_max;
    sched.eps_min = cfg.eps_min;
    sched.cycle_epochs = cfg.cycle_epochs;
    sched.batch_fraction = std::min(1.0, double(cfg.batch_size) / double(n));
    const KeepRate ramp{cfg.noise_rate, cfg.ramp_epochs};

    SnapshotBuffer buffer(cfg.ensemble_capacity);
    const SnapshotBuffer no_snapshots(cfg.ensemble_capacity);

    AcquisitionConfig acq;
    acq.lambda = cfg.lambda;
    acq.use_ce = true;
    acq.use_js = cfg.use_js_acq;

    const double lambda_train = cfg.use_js_train ? cfg.lambda : 1.0;
    const int total_epochs = cfg.num_cycles * cfg.cycle_epochs;

    if (!cfg.snapshot_dir.empty()) std::filesystem::create_directories(cfg.snapshot_dir);
    if (!cfg.score_dump_dir.empty()) std::filesystem::create_directories(cfg.score_dump_dir);

    RunResult result;
    result.metrics.reserve(std::size_t(total_epochs));
    Gradients grads;

    for (int t = 1; t <= total_epochs; ++t) {
        const BatchSequence seq(train_set, cfg.batch_size,
                                mix_seed(cfg.data_seed, std::uint64_t(t)));
        const std::size_t num_batches = seq.size();

        const SnapshotBuffer& acq_buffer = cfg.use_snapshot_ensemble ? buffer : no_snapshots;
        const bool warmup_live = acq_buffer.empty() &&
                                 cfg.warmup_filter_mode == WarmupFilterMode::current_model;
        AcquisitionConfig acq_epoch = acq;
        acq_epoch.include_current_model = cfg.include_current_model || warmup_live;
        const bool do_filter =
            cfg.filter_enabled && (!acq_buffer.empty() || acq_epoch.include_current_model);
        const double rate = do_filter ? keep_rate_at(ramp, t) : 1.0;

        double lr_start = 0.0;
        double lr_end = 0.0;
        std::int64_t kept_count = 0;
        std::int64_t dropped_count = 0;
        double precision_sum = 0.0;
        double js_clean_sum = 0.0, js_noisy_sum = 0.0;
        std::int64_t js_clean_n = 0, js_noisy_n = 0;
        std::vector<AcquisitionScore> epoch_scores;

        for (std::size_t b = 0; b < num_batches; ++b) {
            const int j = int(b) + 1;
            const double lr = (cfg.warmup_constant_lr && t <= cfg.cycle_epochs)
                                  ? cfg.eps_max
                                  : lr_at(sched, t, j);
            if (j == 1) lr_start = lr;
            lr_end = lr;

            MiniBatch batch = seq.batch(b);
            // Keyed per-iteration streams: whether one consumer draws never
            // shifts what another sees.
            RngStream acq_stream(
                mix_seed(cfg.augment_seed, std::uint64_t(t), std::uint64_t(j), 0));
            RngStream train_stream(
                mix_seed(cfg.augment_seed, std::uint64_t(t), std::uint64_t(j), 1));

            MiniBatch selected;
            if (do_filter) {
                const std::vector<AcquisitionScore> scores =
                    acquisition(batch, acq_buffer, acq_epoch, cfg.transform, acq_stream, &params);
                for (const AcquisitionScore& s : scores) {
                    if (train_set.is_clean(s.sample_index)) {
                        js_clean_sum += s.js_part;
                        ++js_clean_n;
                    } else {
                        js_noisy_sum += s.js_part;
                        ++js_noisy_n;
                    }
                }
                if (!cfg.score_dump_dir.empty()) {
                    epoch_scores.insert(epoch_scores.end(), scores.begin(), scores.end());
                }
                FilterResult fr = filter_batch(batch, scores, rate);
                selected = std::move(fr.kept);
                dropped_count += std::int64_t(fr.dropped_indices.size());
            } else {
                selected = std::move(batch);
            }
            kept_count += selected.size();
            precision_sum += label_precision(selected, train_set);

            ViewPair views;
            if (lambda_train < 1.0) {
                views = make_view_pair(selected.features, cfg.transform, train_stream);
            }
            const SampleMatrix plain = normalize(selected.features, cfg.transform);
            const LossParts parts =
                loss_and_grad(params, plain, views, selected.labels, lambda_train, grads);
            if (!std::isfinite(parts.total)) {
                throw std::runtime_error("non-finite training loss at epoch " + std::to_string(t) +
                                         " iteration " + std::to_string(j));
            }
            adam_step(params, grads, adam, cfg.adam, lr);
        }

        if (is_cycle_boundary(sched, t)) {
            ParameterSnapshot snap{params, cycle_index_at_boundary(sched, t)};
            if (!cfg.snapshot_dir.empty()) {
                save_snapshot(snap, cfg.snapshot_dir + "/snapshot_cycle_" +
                                        std::to_string(snap.cycle_index) + ".bin");
            }
            buffer.push(std::move(snap));
        }
        if (!cfg.score_dump_dir.empty() && !epoch_scores.empty()) {
            write_scores_csv(cfg.score_dump_dir + "/scores_epoch_" + std::to_string(t) + ".csv",
                             epoch_scores, train_set);
        }

        EpochMetrics m;
        m.epoch = t;
        m.test_accuracy = evaluate(params, test_set, cfg.transform);
        m.label_precision = precision_sum / double(num_batches);
        m.mean_js_clean = js_clean_n > 0 ? js_clean_sum / double(js_clean_n) : 0.0;
        m.mean_js_noisy = js_noisy_n > 0 ? js_noisy_sum / double(js_noisy_n) : 0.0;
        m.lr_start = lr_start;
        m.lr_end = lr_end;
        m.keep_rate = rate;
        m.kept_count = kept_count;
        m.dropped_count = dropped_count;
        result.metrics.push_back(m);
    }

    result.model = std::move(params);
    return result;
}

Summary summarize(const std::vector<EpochMetrics>& metrics, int window) {
    if (window < 1) throw std::invalid_argument("summary window must be >= 1");
    if (std::size_t(window) > metrics.size()) {
        throw std::invalid_argument("summary window " + std::to_string(window) +
                                    " exceeds epoch count " + std::to_string(metrics.size()));
    }
    Summary s;
    s.window = window;
    const std::size_t lo = metrics.size() - std::size_t(window);
    double sum = 0.0;
    for (std::size_t i = lo; i < metrics.size(); ++i) sum += metrics[i].test_accuracy;
    s.mean_accuracy = sum / double(window);
    double sq = 0.0;
    for (std::size_t i = lo; i < metrics.size(); ++i) {
        const double d = metrics[i].test_accuracy - s.mean_accuracy;
        sq += d * d;
    }
    s.std_accuracy = std::sqrt(sq / double(window)); // population convention
    s.best_accuracy = metrics.front().test_accuracy;
    s.best_epoch = metrics.front().epoch;
    for (const EpochMetrics& m : metrics) {
        if (m.test_accuracy > s.best_accuracy) {
            s.best_accuracy = m.test_accuracy;
            s.best_epoch = m.epoch;
        }
    }
    return s;
}

void write_metrics_csv(const std::string& path, const std::vector<EpochMetrics>& metrics) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "epoch,test_accuracy,label_precision,mean_js_clean,mean_js_noisy,"
           "lr_start,lr_end,keep_rate,kept,dropped\n";
    out.precision(10);
    for (const EpochMetrics& m : metrics) {
        out << m.epoch << ',' << m.test_accuracy << ',' << m.label_precision << ','
            << m.mean_js_clean << ',' << m.mean_js_noisy << ',' << m.lr_start << ',' << m.lr_end
            << ',' << m.keep_rate << ',' << m.kept_count << ',' << m.dropped_count << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

} // namespace srt
