#include "rflab/random_fields.hpp"

#include <cmath>
#include <numbers>

namespace rflab {

ScalarField random_smooth_scalar(const Grid& grid, Rng& rng, int max_mode, double amp) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = grid.dim();
  ScalarField f(grid);
  int nmodes = 0;
  int k[3] = {0, 0, 0};
  const int lo = -max_mode, hi = max_mode;
  for (k[0] = lo; k[0] <= hi; ++k[0])
    for (k[1] = (n > 1 ? lo : 0); k[1] <= (n > 1 ? hi : 0); ++k[1])
      for (k[2] = (n > 2 ? lo : 0); k[2] <= (n > 2 ? hi : 0); ++k[2]) {
        const double a = u(rng), phase = std::numbers::pi * u(rng);
        for (std::size_t p = 0; p < grid.size(); ++p) {
          double arg = phase;
          for (int d = 0; d < n; ++d)
            arg += 2.0 * std::numbers::pi * k[d] * grid.coordinate(p, d) / grid.period(d);
          f[p] += a * std::cos(arg);
        }
        ++nmodes;
      }
  f *= amp / nmodes;
  return f;
}

void fill_random_smooth(ComponentArray& f, Rng& rng, int max_mode, double amp) {
  for (int c = 0; c < f.components(); ++c) {
    const ScalarField s = random_smooth_scalar(f.grid(), rng, max_mode, amp);
    std::copy(s.raw().begin(), s.raw().end(), f.comp(c));
  }
}

void fill_random_noise(ComponentArray& f, Rng& rng, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  for (double& v : f.raw()) v = u(rng);
}

}  // namespace rflab
