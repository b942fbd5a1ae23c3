#pragma once

#include <utility>

#include "coxthin/cholesky.hpp"
#include "coxthin/rng.hpp"

namespace coxthin {

struct ConditionalGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// GP posterior of the model's values at new_points given known_values at
// state.locations(). An empty state returns the prior. The state's jitter is
// included on the returned covariance diagonal so that conditioning composes
// exactly with CholeskyState::extend.
ConditionalGaussian conditional_gaussian(const CholeskyState& state,
                                         const Eigen::VectorXd& known_values,
                                         const Eigen::MatrixXd& new_points);

// Exact multivariate normal log density via triangular solves on the
// factored covariance.
double mvn_logpdf(const Eigen::VectorXd& values, const Eigen::VectorXd& mean,
                  const CholeskyState& chol);

// Draw from N(mean, cov); cov gets a tiny diagonal bump only if its own
// factorization fails.
Eigen::VectorXd sample_mvn(Rng& rng, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov);

}  // namespace coxthin
