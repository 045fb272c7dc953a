#pragma once

#include <random>

#include "rflab/grid.hpp"

namespace rflab {

using Rng = std::mt19937_64;

/// Sum of Fourier modes with |k_a| <= max_mode and uniform random amplitudes in
/// [-amp, amp], scaled so the result stays within [-amp, amp].
ScalarField random_smooth_scalar(const Grid& grid, Rng& rng, int max_mode = 2, double amp = 1.0);

/// Fills every component of f with an independent random smooth scalar.
void fill_random_smooth(ComponentArray& f, Rng& rng, int max_mode = 2, double amp = 1.0);

/// Independent uniform values in [-amp, amp] at every grid point.
void fill_random_noise(ComponentArray& f, Rng& rng, double amp = 1.0);

}  // namespace rflab
