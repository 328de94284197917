#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "srt/rng.hpp"
#include "srt/transform.hpp"

namespace srt {

// ---------------------------------------------------------------------------
// Two-layer MLP: x -> relu(x W1 + b1) -> logits = h W2 + b2.
//
// Batches are row matrices, so weights are stored input-major (W1 is
// in x hidden, W2 is hidden x classes).
// ---------------------------------------------------------------------------
struct ModelParams {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;

    Eigen::Index input_dim() const { return w1.rows(); }
    Eigen::Index hidden_dim() const { return w1.cols(); }
    Eigen::Index output_dim() const { return w2.cols(); }
};

struct Gradients {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
};

// A frozen copy of the parameters tagged with the cycle that produced it.
struct ParameterSnapshot {
    ModelParams params;
    int cycle_index = 0;
};

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Eigen::MatrixXd m_w1, v_w1;
    Eigen::VectorXd m_b1, v_b1;
    Eigen::MatrixXd m_w2, v_w2;
    Eigen::VectorXd m_b2, v_b2;
    std::int64_t step = 0;
};

struct LossParts {
    double total = 0.0;
    double ce = 0.0;
    double js = 0.0;
};

// Glorot uniform weights (limit sqrt(6 / (fan_in + fan_out))), zero biases.
ModelParams init_params(Eigen::Index input_dim, Eigen::Index hidden_dim,
                        Eigen::Index output_dim, std::uint64_t seed);

AdamState init_adam_state(const ModelParams& params);

Eigen::MatrixXd forward_logits(const ModelParams& params, const SampleMatrix& x);

// Row-wise log-softmax via the log-sum-exp shift; exp of it is softmax.
Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits);
Eigen::MatrixXd predict_log_proba(const ModelParams& params, const SampleMatrix& x);
Eigen::MatrixXd predict_proba(const ModelParams& params, const SampleMatrix& x);

// Batch-mean cross-entropy of one-hot `labels` under the model on `plain`
// plus batch-mean symmetric KL between the model's outputs on the two
// views, weighted lambda and 1 - lambda. Gradients flow through the plain
// branch and through both view branches. A branch whose weight is zero is
// skipped entirely (its term reads exactly 0).
LossParts loss_and_grad(const ModelParams& params, const SampleMatrix& plain,
                        const ViewPair& views, const Eigen::MatrixXd& labels, double lambda,
                        Gradients& out);

// One bias-corrected Adam update in place. `lr` varies per iteration under
// the cyclical schedule, so it is a step argument rather than config.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const AdamConfig& config, double lr);

// Binary snapshot format: 8-byte magic "SRTSNP01", four little-endian
// int32 fields (cycle_index, input_dim, hidden_dim, output_dim), then the
// parameters as little-endian 64-bit floats in the order w1 (column-major),
// b1, w2 (column-major), b2.
void save_snapshot(const ParameterSnapshot& snap, const std::string& path);
ParameterSnapshot load_snapshot(const std::string& path);

} // namespace srt
