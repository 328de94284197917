#pragma once

#include <vector>

#include "srt/dataset.hpp"
#include "srt/rng.hpp"

namespace srt {

// ---------------------------------------------------------------------------
// TransformSpec: the stochastic augmentation g(.) plus normalization.
//
// Augmentation order per sample: random integer translation (zero padding),
// optional horizontal flip with p = 0.5, then per-channel (v - mean) / std.
// Normalization always applies; the random parts are skipped by eval_only().
// ---------------------------------------------------------------------------
struct TransformSpec {
    int max_translate_px = 0;          // shifts drawn from [-T, T] per axis
    bool horizontal_flip = false;
    std::vector<double> normalize_mean;   // one entry per channel; empty = 0
    std::vector<double> normalize_std;    // one entry per channel; empty = 1
    int image_height = 1;
    int image_width = 0;
    int channels = 1;

    static TransformSpec mnist();      // translate <= 1px, mean .1307 / std .3081
    TransformSpec eval_only() const;   // normalization only, no randomness
    bool has_randomness() const { return max_translate_px > 0 || horizontal_flip; }
};

struct ViewPair {
    SampleMatrix first;
    SampleMatrix second;
};

// Applies the transform to every row of `batch`. Draws (in order, per
// sample) dy then dx when translation is enabled, then a flip coin when
// flipping is enabled; axes whose geometry admits no movement draw nothing.
SampleMatrix apply_transform(const SampleMatrix& batch, const TransformSpec& spec,
                             RngStream& rng);

// Normalization alone; pure function of the input.
SampleMatrix normalize(const SampleMatrix& batch, const TransformSpec& spec);

// Two independently augmented copies of the batch (g and g'). Each view
// consumes its own forked stream so the pair is a function of `rng` state.
ViewPair make_view_pair(const SampleMatrix& batch, const TransformSpec& spec, RngStream& rng);

} // namespace srt
