#include "srt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace srt {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_be_u32(std::istream& in, const std::string& path, const char* field) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4)) {
        throw std::runtime_error(path + ": truncated while reading " + field);
    }
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be_u32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return in;
}

} // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img = open_input(images_path);
    const std::uint32_t img_magic = read_be_u32(img, images_path, "magic");
    if (img_magic != kImagesMagic) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "bad image magic 0x%08x (want 0x%08x)", img_magic,
                      kImagesMagic);
        throw std::runtime_error(images_path + ": " + msg);
    }
    const std::uint32_t n = read_be_u32(img, images_path, "count");
    const std::uint32_t rows = read_be_u32(img, images_path, "rows");
    const std::uint32_t cols = read_be_u32(img, images_path, "cols");

    std::ifstream lab = open_input(labels_path);
    const std::uint32_t lab_magic = read_be_u32(lab, labels_path, "magic");
    if (lab_magic != kLabelsMagic) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "bad label magic 0x%08x (want 0x%08x)", lab_magic,
                      kLabelsMagic);
        throw std::runtime_error(labels_path + ": " + msg);
    }
    const std::uint32_t n_labels = read_be_u32(lab, labels_path, "count");
    if (n_labels != n) {
        throw std::runtime_error(labels_path + ": label count " + std::to_string(n_labels) +
                                 " does not match image count " + std::to_string(n));
    }

    const std::size_t dim = std::size_t(rows) * cols;
    std::vector<unsigned char> pixels(std::size_t(n) * dim);
    if (!img.read(reinterpret_cast<char*>(pixels.data()), std::streamsize(pixels.size()))) {
        throw std::runtime_error(images_path + ": truncated pixel payload");
    }
    std::vector<unsigned char> labels(n);
    if (!lab.read(reinterpret_cast<char*>(labels.data()), std::streamsize(labels.size()))) {
        throw std::runtime_error(labels_path + ": truncated label payload");
    }

    LabeledDataset ds;
    ds.features.resize(Eigen::Index(n), Eigen::Index(dim));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            ds.features(Eigen::Index(i), Eigen::Index(j)) = pixels[i * dim + j] / 255.0;
        }
    }
    ds.clean_labels.assign(labels.begin(), labels.end());
    ds.noisy_labels = ds.clean_labels;
    const int max_label =
        ds.clean_labels.empty() ? -1 : *std::max_element(ds.clean_labels.begin(), ds.clean_labels.end());
    ds.num_classes = max_label + 1;
    ds.image_height = int(rows);
    ds.image_width = int(cols);
    ds.channels = 1;
    return ds;
}

void write_idx(const LabeledDataset& dataset, const std::string& images_path,
               const std::string& labels_path) {
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open " + images_path + " for writing");
    write_be_u32(img, kImagesMagic);
    write_be_u32(img, std::uint32_t(dataset.size()));
    write_be_u32(img, std::uint32_t(dataset.image_height));
    write_be_u32(img, std::uint32_t(dataset.image_width));
    std::vector<unsigned char> buf(std::size_t(dataset.feature_dim()));
    for (Eigen::Index i = 0; i < dataset.size(); ++i) {
        for (Eigen::Index j = 0; j < dataset.feature_dim(); ++j) {
            const double v = dataset.features(i, j);
            if (v < 0.0 || v > 1.0) {
                throw std::runtime_error("feature value " + std::to_string(v) +
                                         " outside [0,1], cannot encode as uint8");
            }
            buf[std::size_t(j)] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        img.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    }

    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open " + labels_path + " for writing");
    write_be_u32(lab, kLabelsMagic);
    write_be_u32(lab, std::uint32_t(dataset.size()));
    for (int y : dataset.noisy_labels) {
        const unsigned char b = static_cast<unsigned char>(y);
        lab.write(reinterpret_cast<const char*>(&b), 1);
    }
}

LabeledDataset make_blobs(int num_classes, int per_class, int dim, double separation,
                          std::uint64_t seed) {
    if (num_classes < 2) throw std::invalid_argument("make_blobs: need at least 2 classes");
    if (per_class < 1) throw std::invalid_argument("make_blobs: per_class must be positive");
    if (dim < 1) throw std::invalid_argument("make_blobs: dim must be positive");
    if (separation <= 0.0) throw std::invalid_argument("make_blobs: separation must be positive");

    RngStream rng(mix_seed(seed, 0x626c6f62)); // "blob"

    // Means: random unit directions, then scale everything so the closest
    // pair sits exactly `separation` apart. dim == 1 uses an evenly spaced
    // line because random unit "directions" collapse to +-1.
    Eigen::MatrixXd means(num_classes, dim);
    if (dim == 1) {
        for (int c = 0; c < num_classes; ++c) means(c, 0) = double(c);
    } else {
        for (int c = 0; c < num_classes; ++c) {
            Eigen::VectorXd v(dim);
            double norm = 0.0;
            do {
                for (int d = 0; d < dim; ++d) v(d) = rng.normal();
                norm = v.norm();
            } while (norm < 1e-9);
            means.row(c) = v.transpose() / norm;
        }
    }
    double min_dist = std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_classes; ++a) {
        for (int b = a + 1; b < num_classes; ++b) {
            min_dist = std::min(min_dist, (means.row(a) - means.row(b)).norm());
        }
    }
    if (min_dist < 1e-9) {
        // Coincident directions; nudge onto a simplex-like ladder instead.
        for (int c = 0; c < num_classes; ++c) {
            means.row(c).setZero();
            means(c, c % dim) = double(1 + c / dim);
        }
        min_dist = std::numeric_limits<double>::infinity();
        for (int a = 0; a < num_classes; ++a) {
            for (int b = a + 1; b < num_classes; ++b) {
                min_dist = std::min(min_dist, (means.row(a) - means.row(b)).norm());
            }
        }
    }
    means *= separation / min_dist;

    const Eigen::Index n = Eigen::Index(num_classes) * per_class;
    LabeledDataset ds;
    ds.features.resize(n, dim);
    ds.clean_labels.resize(std::size_t(n));
    for (int c = 0; c < num_classes; ++c) {
        for (int i = 0; i < per_class; ++i) {
            const Eigen::Index row = Eigen::Index(c) * per_class + i;
            for (int d = 0; d < dim; ++d) ds.features(row, d) = means(c, d) + rng.normal();
            ds.clean_labels[std::size_t(row)] = c;
        }
    }
    ds.noisy_labels = ds.clean_labels;
    ds.num_classes = num_classes;
    ds.image_height = 1;
    ds.image_width = dim;
    ds.channels = 1;
    return ds;
}

LabeledDataset inject_noise(LabeledDataset dataset, const NoiseSpec& spec) {
    if (spec.rate < 0.0 || spec.rate >= 100.0) {
        throw std::invalid_argument("noise rate must be in [0, 100), got " +
                                    std::to_string(spec.rate));
    }
    const Eigen::Index n = dataset.size();
    const int m = dataset.num_classes;
    const auto num_corrupt = Eigen::Index(std::llround(double(n) * spec.rate / 100.0));
    if (num_corrupt == 0) return dataset;
    if (m < 2) throw std::invalid_argument("noise injection needs at least 2 classes");

    RngStream rng(mix_seed(spec.seed, 0x6e6f6973)); // "nois"

    // Partial Fisher-Yates: first num_corrupt entries are a uniform draw
    // without replacement.
    std::vector<Eigen::Index> pos(static_cast<std::size_t>(n));
    std::iota(pos.begin(), pos.end(), Eigen::Index(0));
    for (Eigen::Index i = 0; i < num_corrupt; ++i) {
        const auto j = Eigen::Index(rng.uniform_int(std::int64_t(i), std::int64_t(n - 1)));
        std::swap(pos[std::size_t(i)], pos[std::size_t(j)]);
    }

    for (Eigen::Index i = 0; i < num_corrupt; ++i) {
        const auto p = std::size_t(pos[std::size_t(i)]);
        const int clean = dataset.clean_labels[p];
        int corrupted;
        if (spec.kind == NoiseKind::symmetric) {
            // Uniform over the m - 1 other classes.
            const auto u = int(rng.uniform_int(0, m - 2));
            corrupted = u < clean ? u : u + 1;
        } else {
            corrupted = (clean + 1) % m;
        }
        dataset.noisy_labels[p] = corrupted;
    }
    return dataset;
}

MiniBatch gather(const LabeledDataset& dataset, const std::vector<Eigen::Index>& indices) {
    MiniBatch b;
    b.indices = indices;
    b.features.resize(Eigen::Index(indices.size()), dataset.feature_dim());
    b.labels = Eigen::MatrixXd::Zero(Eigen::Index(indices.size()), dataset.num_classes);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        b.features.row(Eigen::Index(r)) = dataset.features.row(indices[r]);
        b.labels(Eigen::Index(r), dataset.noisy_labels[std::size_t(indices[r])]) = 1.0;
    }
    return b;
}

BatchSequence::BatchSequence(const LabeledDataset& dataset, int batch_size,
                             std::uint64_t epoch_seed)
    : dataset_(&dataset), batch_size_(batch_size) {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
    perm_.resize(std::size_t(dataset.size()));
    std::iota(perm_.begin(), perm_.end(), Eigen::Index(0));
    RngStream rng(mix_seed(epoch_seed, 0x73687566)); // "shuf"
    for (std::size_t i = perm_.size(); i > 1; --i) {
        const auto j = std::size_t(rng.uniform_int(0, std::int64_t(i - 1)));
        std::swap(perm_[i - 1], perm_[j]);
    }
    num_batches_ = (perm_.size() + std::size_t(batch_size) - 1) / std::size_t(batch_size);
}

MiniBatch BatchSequence::batch(std::size_t b) const {
    if (b >= num_batches_) throw std::out_of_range("batch index out of range");
    const std::size_t lo = b * std::size_t(batch_size_);
    const std::size_t hi = std::min(lo + std::size_t(batch_size_), perm_.size());
    return gather(*dataset_, std::vector<Eigen::Index>(perm_.begin() + std::ptrdiff_t(lo),
                                                       perm_.begin() + std::ptrdiff_t(hi)));
}

} // namespace srt
