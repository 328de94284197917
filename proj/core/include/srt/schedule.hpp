#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace srt {

// ---------------------------------------------------------------------------
// Cyclical cosine learning rate.
//
// The rate for epoch t >= 1 and iteration j >= 1 is
//
//   lr(t, j) = eps_min + (eps_max - eps_min)/2 * (1 + cos(pi * s / C))
//   s(t, j)  = mod(t - 1, C) + batch_fraction * (j - 1)
//
// so each cycle of C epochs starts at eps_max and decays to eps_min. The
// cycle position s runs over [0, C); the limiting value s = C corresponds to
// the cosine minimum reached at the end of the cycle.
// ---------------------------------------------------------------------------
struct LrSchedule {
    double eps_max = 1e-3;        // peak learning rate
    double eps_min = 0.0;         // floor reached at the end of each cycle
    int cycle_epochs = 20;        // C
    double batch_fraction = 0.0;  // |B| / N
};

inline double lr_from_position(const LrSchedule& sched, double s) {
    const double half = 0.5 * (sched.eps_max - sched.eps_min);
    return sched.eps_min + half * (1.0 + std::cos(std::numbers::pi * s / sched.cycle_epochs));
}

inline double cycle_position(const LrSchedule& sched, int epoch, int iter) {
    return static_cast<double>((epoch - 1) % sched.cycle_epochs) +
           sched.batch_fraction * (iter - 1);
}

inline double lr_at(const LrSchedule& sched, int epoch, int iter) {
    return lr_from_position(sched, cycle_position(sched, epoch, iter));
}

// True at the last epoch of a cycle, where the rate bottoms out at eps_min
// and a parameter snapshot is due.
inline bool is_cycle_boundary(const LrSchedule& sched, int epoch) {
    return epoch % sched.cycle_epochs == 0;
}

// Cycle index k at a boundary epoch (k = t / C).
inline int cycle_index_at_boundary(const LrSchedule& sched, int epoch) {
    if (!is_cycle_boundary(sched, epoch))
        throw std::logic_error("cycle_index_at_boundary: epoch is not a cycle boundary");
    return epoch / sched.cycle_epochs;
}

// ---------------------------------------------------------------------------
// Keep rate r(t) = 1 - (eta/100) * min{t / T_k, 1}.
//
// Ramps from just under 1 down to 1 - eta/100 over the first T_k epochs and
// stays there. eta is the assumed label-noise percentage.
// ---------------------------------------------------------------------------
struct KeepRate {
    double noise_rate = 0.0;  // eta, in percent
    int ramp_epochs = 10;     // T_k
};

inline double keep_rate_at(const KeepRate& kr, int epoch) {
    const double ramp = std::min(static_cast<double>(epoch) / kr.ramp_epochs, 1.0);
    return 1.0 - (kr.noise_rate / 100.0) * ramp;
}

} // namespace srt
