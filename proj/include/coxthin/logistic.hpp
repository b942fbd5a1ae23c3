#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace coxthin {

inline double expit(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double log_expit(double x) { return -softplus(-x); }      // log sigma(x)
inline double log_one_minus_expit(double x) { return -softplus(x); }

// Multinomial-logistic class probabilities with a baseline class:
// sigma_0 = 1/(1+sum exp g_j), sigma_j = exp(g_j)/(1+sum exp g_i), j=1..p.
// Stable for |g| up to ~700; components sum to exactly 1 after
// renormalization.
Eigen::VectorXd sigma_probs(const Eigen::VectorXd& g);

// log sigma_k(g) evaluated stably without forming the probabilities.
double log_sigma(const Eigen::VectorXd& g, int k);

}  // namespace coxthin
