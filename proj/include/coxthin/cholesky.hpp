#pragma once

#include <memory>

#include <Eigen/Dense>

#include "coxthin/kernel.hpp"

namespace coxthin {

// Lower Cholesky factor of Sigma(locations) + jitter*I for a covariance
// model, supporting O(n^2) extension by one location and removal of any
// location. Immutable: updates return new states. A location contributes
// model->channels() consecutive rows (point-major layout).
//
// A removal that loses positive definiteness falls back to a from-scratch
// factorization; the fallback count is exposed for logging.
class CholeskyState {
 public:
  CholeskyState() = default;

  static CholeskyState build(std::shared_ptr<const CovarianceModel> model,
                             Eigen::MatrixXd locations);
  static CholeskyState build(std::shared_ptr<const CovarianceModel> model,
                             Eigen::MatrixXd locations, double jitter);

  // Default diagonal jitter for a marginal variance: 1e-8 relative plus an
  // absolute floor so zero-variance kernels stay factorizable.
  static double default_jitter(double marginal_variance) {
    return 1e-8 * marginal_variance + 1e-12;
  }

  int n_locations() const { return static_cast<int>(locations_.rows()); }
  int channels() const { return model_ ? model_->channels() : 1; }
  int dim() const { return n_locations() * channels(); }
  bool empty() const { return n_locations() == 0; }

  const Eigen::MatrixXd& locations() const { return locations_; }
  const Eigen::MatrixXd& lower() const { return lower_; }
  double jitter() const { return jitter_; }
  const CovarianceModel& model() const;
  std::shared_ptr<const CovarianceModel> model_ptr() const { return model_; }

  CholeskyState extend(const Eigen::VectorXd& new_location) const;
  CholeskyState remove(int location_index) const;

  Eigen::VectorXd solve_lower(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve_lower_mat(const Eigen::MatrixXd& rhs) const;
  double log_det_half() const;  // sum log diag(L)

  static long refactorizations();  // process-wide fallback counter

 private:
  std::shared_ptr<const CovarianceModel> model_;
  Eigen::MatrixXd locations_;  // n x d
  Eigen::MatrixXd lower_;      // (n*ch) x (n*ch)
  double jitter_ = 0.0;
};

// In-place rank-one Cholesky update: L <- chol(L L^T + v v^T).
void chol_rank_one_update(Eigen::MatrixXd& lower, Eigen::VectorXd v);

// Free-function aliases for the update operations.
inline CholeskyState chol_extend(const CholeskyState& state,
                                 const Eigen::VectorXd& new_location) {
  return state.extend(new_location);
}
inline CholeskyState chol_remove(const CholeskyState& state, int index) {
  return state.remove(index);
}

}  // namespace coxthin
