#include "coxthin/gaussian.hpp"

#include <cmath>
#include <numbers>

namespace coxthin {

ConditionalGaussian conditional_gaussian(const CholeskyState& state,
                                         const Eigen::VectorXd& known_values,
                                         const Eigen::MatrixXd& new_points) {
  const CovarianceModel& model = state.model();
  const int n_new = static_cast<int>(new_points.rows());
  ConditionalGaussian out;
  out.cov = model.cov(new_points);
  out.cov.diagonal().array() += state.jitter();
  out.mean = model.mean(n_new);
  if (state.empty()) return out;

  require(known_values.size() == state.dim(), ErrorKind::kParameter,
          "known_values length must equal state dimension");
  Eigen::MatrixXd cross = model.cross_cov(state.locations(), new_points);
  Eigen::MatrixXd b = state.solve_lower_mat(cross);
  Eigen::VectorXd z =
      state.solve_lower(known_values - model.mean(state.n_locations()));
  out.mean += b.transpose() * z;
  out.cov -= b.transpose() * b;
  return out;
}

double mvn_logpdf(const Eigen::VectorXd& values, const Eigen::VectorXd& mean,
                  const CholeskyState& chol) {
  require(values.size() == chol.dim() && mean.size() == chol.dim(),
          ErrorKind::kParameter, "mvn_logpdf dimension mismatch");
  if (chol.dim() == 0) return 0.0;
  Eigen::VectorXd z = chol.solve_lower(values - mean);
  return -0.5 * chol.dim() * std::log(2.0 * std::numbers::pi) -
         chol.log_det_half() - 0.5 * z.squaredNorm();
}

Eigen::VectorXd sample_mvn(Rng& rng, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov) {
  const long n = mean.size();
  if (n == 0) return Eigen::VectorXd(0);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd bumped = cov;
    bumped.diagonal().array() += 1e-10 * (cov.diagonal().maxCoeff() + 1e-30);
    llt.compute(bumped);
    require(llt.info() == Eigen::Success, ErrorKind::kNumeric,
            "sample_mvn: covariance not positive definite");
  }
  return mean + Eigen::MatrixXd(llt.matrixL()) * rng.normal_vector(static_cast<int>(n));
}

}  // namespace coxthin
