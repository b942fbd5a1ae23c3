#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace coxthin {

// Counter-based generator: output i is a fixed mix of (seed, i), so a given
// seed plus a given call sequence reproduces bit-identically, and independent
// substreams are cheap to derive for parallel replication loops.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), counter_(0) {}

  std::uint64_t next_u64();

  // Uniform on the open interval (0,1); never returns an endpoint.
  double uniform();
  double uniform(double lo, double hi);

  double normal();  // standard normal, Box-Muller
  double exponential();

  // Exact Poisson draw for any mean >= 0.
  int poisson(double mean);

  // Gamma(shape, rate), Marsaglia-Tsang.
  double gamma(double shape, double rate);

  // Index draw from unnormalized nonnegative weights.
  int categorical(const Eigen::VectorXd& weights);

  Eigen::VectorXd normal_vector(int n);

  // Independent stream derived from (seed, key); does not disturb this
  // stream's counter.
  Rng substream(std::uint64_t key) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace coxthin
