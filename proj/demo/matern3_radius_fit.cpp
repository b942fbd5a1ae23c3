// Worked composition: posterior over the Matern III interaction radius R
// from observed locations and times, using the closed-form marginal density
// on a grid of radii with a gamma prior. The library ships the densities;
// this is the few-line fit loop they make possible.
//
//   ./demo_matern3_fit [seed]

#include <cmath>
#include <cstdio>
#include <vector>

#include "coxthin/matern3.hpp"

using namespace coxthin;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;
  Rng rng(seed);
  Domain dom = Domain::unit_square();
  const double lambda = 60.0;
  const double true_radius = 0.07;

  matern3::SimulationResult data =
      simulate_matern3(rng, dom, lambda, matern3::Shadow::deterministic(true_radius));
  std::printf("simulated: %d observed, %d thinned (true R = %.3f)\n",
              data.observed.size(), data.thinned.size(), true_radius);

  // grid posterior: p(R | data) ~ marginal(data | R) * gamma(2, 20) prior
  const int grid = 80;
  const double r_max = 0.2;
  std::vector<double> radii(grid), log_post(grid);
  double best = -1e300;
  for (int i = 0; i < grid; ++i) {
    radii[i] = r_max * (i + 1) / grid;
    double lp = log_marginal_density_m3(data.observed, dom, lambda,
                                        matern3::Shadow::deterministic(radii[i]));
    lp += std::log(radii[i]) - 20.0 * radii[i];  // gamma(2, 20) prior
    log_post[i] = lp;
    best = std::max(best, lp);
  }
  double total = 0.0, mean = 0.0;
  for (int i = 0; i < grid; ++i) {
    double w = std::exp(log_post[i] - best);
    total += w;
    mean += w * radii[i];
  }
  mean /= total;

  // central 90% interval from the normalized grid weights
  double lo = radii.front(), hi = radii.back(), acc = 0.0;
  for (int i = 0; i < grid; ++i) {
    double w = std::exp(log_post[i] - best) / total;
    if (acc < 0.05 && acc + w >= 0.05) lo = radii[i];
    if (acc < 0.95 && acc + w >= 0.95) hi = radii[i];
    acc += w;
  }
  std::printf("posterior over R: mean %.4f, central 90%% [%.4f, %.4f]\n", mean,
              lo, hi);
  return 0;
}
