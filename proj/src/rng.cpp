#include "coxthin/rng.hpp"

#include <cmath>
#include <numbers>

#include "coxthin/common.hpp"

namespace coxthin {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

std::uint64_t Rng::next_u64() {
  counter_ += 1;
  return mix(seed_ + counter_ * kGamma);
}

double Rng::uniform() {
  // 53-bit mantissa, offset by half an ulp so 0 and 1 are excluded
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (have_spare_normal_) {
    have_spare_normal_ = false;
    return spare_normal_;
  }
  // Marsaglia polar method
  for (;;) {
    double u = 2.0 * uniform() - 1.0;
    double v = 2.0 * uniform() - 1.0;
    double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * factor;
    have_spare_normal_ = true;
    return u * factor;
  }
}

double Rng::exponential() { return -std::log(uniform()); }

int Rng::poisson(double mean) {
  require(mean >= 0.0 && std::isfinite(mean), ErrorKind::kParameter,
          "poisson mean must be finite and nonnegative");
  // Halve until the product-of-uniforms method is safe from underflow;
  // a Poisson mean splits exactly into a sum of independent halves.
  if (mean > 30.0) return poisson(mean / 2.0) + poisson(mean - mean / 2.0);
  if (mean == 0.0) return 0;
  double limit = std::exp(-mean);
  double prod = uniform();
  int n = 0;
  while (prod > limit) {
    prod *= uniform();
    ++n;
  }
  return n;
}

double Rng::gamma(double shape, double rate) {
  require(shape > 0.0 && rate > 0.0, ErrorKind::kParameter,
          "gamma shape and rate must be positive");
  if (shape < 1.0) {
    // boost via Gamma(shape+1) and a uniform power
    double g = gamma(shape + 1.0, 1.0);
    return g * std::pow(uniform(), 1.0 / shape) / rate;
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

int Rng::categorical(const Eigen::VectorXd& weights) {
  require(weights.size() > 0, ErrorKind::kParameter, "empty weight vector");
  double total = 0.0;
  for (int i = 0; i < weights.size(); ++i) {
    require(weights[i] >= 0.0, ErrorKind::kParameter, "negative weight");
    total += weights[i];
  }
  require(total > 0.0, ErrorKind::kParameter, "all-zero weights");
  double u = uniform() * total;
  double acc = 0.0;
  for (int i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u <= acc) return i;
  }
  return static_cast<int>(weights.size()) - 1;
}

Eigen::VectorXd Rng::normal_vector(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal();
  return v;
}

Rng Rng::substream(std::uint64_t key) const {
  return Rng(mix(mix(seed_ ^ 0x5851F42D4C957F2DULL) + (key + 1) * kGamma));
}

}  // namespace coxthin
