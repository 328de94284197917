#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "srt/rng.hpp"

namespace srt {

// Samples are rows; row-major storage keeps each sample contiguous.
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// LabeledDataset: features plus two label arrays.
//
// noisy_labels are what training sees; clean_labels are the ground truth and
// are read only by evaluation metrics. After construction a dataset is
// immutable and safe to share across threads.
// ---------------------------------------------------------------------------
struct LabeledDataset {
    SampleMatrix features;           // N x feature_dim
    std::vector<int> noisy_labels;   // class indices in [0, num_classes)
    std::vector<int> clean_labels;   // ground truth, metrics only
    int num_classes = 0;
    int image_height = 1;            // geometry for spatial transforms;
    int image_width = 0;             // defaults to 1 x feature_dim x 1
    int channels = 1;

    Eigen::Index size() const { return features.rows(); }
    Eigen::Index feature_dim() const { return features.cols(); }
    bool is_clean(Eigen::Index i) const { return noisy_labels[i] == clean_labels[i]; }
};

enum class NoiseKind { symmetric, asymmetric };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::symmetric;
    double rate = 0.0;       // eta, percent in [0, 100)
    std::uint64_t seed = 0;
};

struct MiniBatch {
    std::vector<Eigen::Index> indices;  // dataset positions
    SampleMatrix features;              // |B| x feature_dim
    Eigen::MatrixXd labels;             // |B| x M one-hot rows

    Eigen::Index size() const { return features.rows(); }
};

// Reads a pair of idx files (magic 0x00000803 images / 0x00000801 labels,
// big-endian dimensions, raw uint8 payload). Pixels are scaled to [0,1] by
// division by 255; clean and noisy labels both start as the file labels and
// num_classes is max label + 1.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Writes the dataset back out in the same idx format (bytes are
// round(255 * v); requires features in [0,1]). Noisy labels are written.
void write_idx(const LabeledDataset& dataset, const std::string& images_path,
               const std::string& labels_path);

// Synthetic isotropic Gaussian clusters (unit variance). Class means are
// placed so the closest pair of means is exactly `separation` apart:
// random unit directions for dim >= 2, an evenly spaced line for dim == 1.
// Geometry is 1 x dim x 1. Labels are clean.
LabeledDataset make_blobs(int num_classes, int per_class, int dim, double separation,
                          std::uint64_t seed);

// Corrupts exactly round(N * rate / 100) labels at positions chosen uniformly
// without replacement. Symmetric noise replaces the label with one of the
// M - 1 other classes uniformly; asymmetric noise pair-flips to
// (clean + 1) mod M. clean_labels are preserved.
[[nodiscard]] LabeledDataset inject_noise(LabeledDataset dataset, const NoiseSpec& spec);

// Gathers rows `indices` of the dataset into a mini-batch with one-hot
// noisy labels.
MiniBatch gather(const LabeledDataset& dataset, const std::vector<Eigen::Index>& indices);

// ---------------------------------------------------------------------------
// BatchSequence: one epoch's mini-batches.
//
// A seeded permutation of all N indices split into ceil(N / batch_size)
// batches (the last one may be short). Random-access; a batch is
// materialized on demand.
// ---------------------------------------------------------------------------
class BatchSequence {
public:
    BatchSequence(const LabeledDataset& dataset, int batch_size, std::uint64_t epoch_seed);

    std::size_t size() const { return num_batches_; }
    MiniBatch batch(std::size_t b) const;
    const std::vector<Eigen::Index>& permutation() const { return perm_; }

private:
    const LabeledDataset* dataset_;
    std::vector<Eigen::Index> perm_;
    int batch_size_;
    std::size_t num_batches_;
};

} // namespace srt
