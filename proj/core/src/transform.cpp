#include "srt/transform.hpp"

#include <algorithm>
#include <stdexcept>

namespace srt {

TransformSpec TransformSpec::mnist() {
    TransformSpec t;
    t.max_translate_px = 1;
    t.horizontal_flip = false;
    t.normalize_mean = {0.1307};
    t.normalize_std = {0.3081};
    t.image_height = 28;
    t.image_width = 28;
    t.channels = 1;
    return t;
}

TransformSpec TransformSpec::eval_only() const {
    TransformSpec t = *this;
    t.max_translate_px = 0;
    t.horizontal_flip = false;
    return t;
}

namespace {

void check_geometry(const SampleMatrix& batch, const TransformSpec& spec) {
    const Eigen::Index dim =
        Eigen::Index(spec.image_height) * spec.image_width * spec.channels;
    if (batch.cols() != dim) {
        throw std::invalid_argument("transform geometry " + std::to_string(spec.image_height) +
                                    "x" + std::to_string(spec.image_width) + "x" +
                                    std::to_string(spec.channels) + " does not match feature dim " +
                                    std::to_string(batch.cols()));
    }
    if (!spec.normalize_mean.empty() && int(spec.normalize_mean.size()) != spec.channels) {
        throw std::invalid_argument("normalize_mean size does not match channel count");
    }
    if (!spec.normalize_std.empty() && int(spec.normalize_std.size()) != spec.channels) {
        throw std::invalid_argument("normalize_std size does not match channel count");
    }
}

// Layout is row-major HWC within each sample row.
inline Eigen::Index pix(const TransformSpec& s, int r, int c, int ch) {
    return (Eigen::Index(r) * s.image_width + c) * s.channels + ch;
}

} // namespace

SampleMatrix apply_transform(const SampleMatrix& batch, const TransformSpec& spec,
                             RngStream& rng) {
    check_geometry(batch, spec);
    const int h = spec.image_height;
    const int w = spec.image_width;
    const int ch = spec.channels;
    // A shift can never exceed the image extent on its axis.
    const int ty = std::min(spec.max_translate_px, h - 1);
    const int tx = std::min(spec.max_translate_px, w - 1);

    SampleMatrix out(batch.rows(), batch.cols());
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
        int dy = 0, dx = 0;
        if (spec.max_translate_px > 0) {
            if (ty > 0) dy = int(rng.uniform_int(-ty, ty));
            if (tx > 0) dx = int(rng.uniform_int(-tx, tx));
        }
        bool flip = false;
        if (spec.horizontal_flip && w > 1) flip = rng.bernoulli(0.5);

        for (int r = 0; r < h; ++r) {
            const int src_r = r - dy;
            for (int c = 0; c < w; ++c) {
                // Translate then flip: the mirror applies to the output
                // column before the shift is undone.
                int src_c = (flip ? w - 1 - c : c) - dx;
                const bool inside = src_r >= 0 && src_r < h && src_c >= 0 && src_c < w;
                for (int k = 0; k < ch; ++k) {
                    out(i, pix(spec, r, c, k)) = inside ? batch(i, pix(spec, src_r, src_c, k)) : 0.0;
                }
            }
        }
    }

    if (!spec.normalize_mean.empty() || !spec.normalize_std.empty()) {
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            for (int r = 0; r < h; ++r) {
                for (int c = 0; c < w; ++c) {
                    for (int k = 0; k < ch; ++k) {
                        const double mean = spec.normalize_mean.empty() ? 0.0 : spec.normalize_mean[std::size_t(k)];
                        const double sd = spec.normalize_std.empty() ? 1.0 : spec.normalize_std[std::size_t(k)];
                        const Eigen::Index p = pix(spec, r, c, k);
                        out(i, p) = (out(i, p) - mean) / sd;
                    }
                }
            }
        }
    }
    return out;
}

SampleMatrix normalize(const SampleMatrix& batch, const TransformSpec& spec) {
    TransformSpec plain = spec.eval_only();
    check_geometry(batch, plain);
    RngStream unused(0); // eval transform draws nothing
    return apply_transform(batch, plain, unused);
}

ViewPair make_view_pair(const SampleMatrix& batch, const TransformSpec& spec, RngStream& rng) {
    ViewPair v;
    RngStream first = rng.fork();
    RngStream second = rng.fork();
    v.first = apply_transform(batch, spec, first);
    v.second = apply_transform(batch, spec, second);
    return v;
}

} // namespace srt
