#pragma once

#include <string>
#include <vector>

#include "srt/dataset.hpp"
#include "srt/mlp.hpp"
#include "srt/transform.hpp"

namespace srt {

// ---------------------------------------------------------------------------
// SnapshotBuffer: the last P' parameter snapshots, newest last.
// ---------------------------------------------------------------------------
class SnapshotBuffer {
public:
    explicit SnapshotBuffer(int capacity);

    // Appends a snapshot; the oldest is evicted once the buffer is full.
    // Cycle indices must be strictly increasing across pushes.
    void push(ParameterSnapshot snap);

    int capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<ParameterSnapshot>& entries() const { return entries_; }

private:
    int capacity_;
    std::vector<ParameterSnapshot> entries_;
};

struct AcquisitionScore {
    Eigen::Index sample_index = 0;
    double value = 0.0;
    double ce_part = 0.0;  // sum of per-member cross-entropies
    double js_part = 0.0;  // sum of per-member symmetric KLs
};

struct AcquisitionConfig {
    double lambda = 0.9;
    bool use_ce = true;
    bool use_js = true;
    bool include_current_model = false;
};

struct FilterResult {
    MiniBatch kept;                            // retains the batch's sample order
    std::vector<Eigen::Index> dropped_indices; // dataset positions, batch order
};

// D_KL(p||q) + D_KL(q||p) with entries clamped to [1e-12, 1] before the logs.
double symmetric_kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Eq.-style per-sample acquisition scores: for every ensemble member,
// cross-entropy of the member on the normalized (untransformed) input plus
// symmetric KL between the member's predictions on a fresh view pair;
// value = lambda * ce_part + (1 - lambda) * js_part. Members are the buffer
// entries oldest to newest, plus the live parameters when
// include_current_model is set. A zero-weight term is skipped and its part
// reads exactly 0. Each member draws views from its own sub-stream keyed by
// cycle index, so a member's contribution does not depend on which other
// members are present. With no members every score is 0.
std::vector<AcquisitionScore> acquisition(const MiniBatch& batch, const SnapshotBuffer& buffer,
                                          const AcquisitionConfig& cfg,
                                          const TransformSpec& transform, RngStream& rng,
                                          const ModelParams* live_params = nullptr);

// Keeps the ceil(keep_rate * |batch|) samples with the smallest values,
// ties broken by lower sample_index. The kept set is never empty.
FilterResult filter_batch(const MiniBatch& batch, const std::vector<AcquisitionScore>& scores,
                          double keep_rate);

// One row per score: sample_index,value,ce_part,js_part,is_clean.
void write_scores_csv(const std::string& path, const std::vector<AcquisitionScore>& scores,
                      const LabeledDataset& dataset);

} // namespace srt
