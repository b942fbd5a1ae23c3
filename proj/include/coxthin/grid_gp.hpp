#pragma once

#include <memory>

#include "coxthin/kernel.hpp"
#include "coxthin/pattern.hpp"
#include "coxthin/rng.hpp"

namespace coxthin {

// Exact stationary-GP sampler on a regular grid of cell centers, by circulant
// embedding on a torus of twice the grid size (doubled again if the embedding
// comes out indefinite). Each FFT yields two independent fields; draws are
// thread-safe against each other.
//
// Serves as the simulation oracle for grid-based Cox computations; it shares
// no code path with the Cholesky-based samplers it is used to check.
class GridGpSampler {
 public:
  GridGpSampler(const Domain& dom, int res, const Kernel& kernel);
  ~GridGpSampler();
  GridGpSampler(const GridGpSampler&) = delete;
  GridGpSampler& operator=(const GridGpSampler&) = delete;

  int res() const { return res_; }
  long n_cells() const { return n_cells_; }
  double cell_measure() const { return cell_measure_; }
  const Eigen::MatrixXd& cell_centers() const { return centers_; }

  // Two independent zero-mean draws over the cells.
  void draw_pair(Rng& rng, Eigen::VectorXd& a, Eigen::VectorXd& b) const;
  Eigen::VectorXd draw(Rng& rng) const;

  // Relative spectral mass clipped to keep the embedding nonnegative;
  // zero means the sampler is exact.
  double clipped_mass() const { return clipped_mass_; }

 private:
  struct Impl;
  void build(const Domain& dom, const Kernel& kernel, int embed_factor);

  int dim_ = 2;
  int res_ = 0;
  long n_cells_ = 0;
  long embed_ = 0;  // torus size per axis
  double cell_measure_ = 0.0;
  double clipped_mass_ = 0.0;
  Eigen::MatrixXd centers_;
  Eigen::VectorXd amplitude_;  // sqrt(lambda_k / N) over the torus
  std::unique_ptr<Impl> impl_;
};

}  // namespace coxthin
