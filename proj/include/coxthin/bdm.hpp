#pragma once

#include <functional>

#include "coxthin/cholesky.hpp"
#include "coxthin/gaussian.hpp"
#include "coxthin/logistic.hpp"
#include "coxthin/pattern.hpp"
#include "coxthin/poisson.hpp"

namespace coxthin {

struct MoveProbs {
  double birth = 1.0 / 3.0;
  double death = 1.0 / 3.0;
  double move = 1.0 / 3.0;

  void validate() const {
    require(birth >= 0 && death >= 0 && move >= 0 &&
                std::abs(birth + death + move - 1.0) < 1e-12,
            ErrorKind::kParameter, "move probabilities must sum to 1");
  }
};

// Metropolis-Hastings log acceptance ratios for birth-death-move proposals
// targeting the thinned-given-observed conditional. log_keep is the log
// retention factor of the proposed/deleted point (log(1-expit g) in the
// univariate model, log sigma_0(g) in the multitype one). Birth marks are
// drawn from the GP conditional given all current values, which cancels the
// Gaussian factors; the formulas below are what remains. They are validated
// against a two-sided density evaluation in the test suite rather than
// trusted.
double bdm_birth_log_ratio(double lambda_vol, int n0_before, double log_keep_new,
                           const MoveProbs& probs);
double bdm_death_log_ratio(double lambda_vol, int n0_before, double log_keep_del,
                           const MoveProbs& probs);
double bdm_move_log_ratio(double log_keep_new, double log_keep_old);

// Latent field structure g(s) = A w(s) + mu with independent fields
// w_j ~ GP(0, kernels[j]); the univariate model is p=1, A=[[1]].
struct LatentFieldModel {
  std::vector<Kernel> kernels;
  Eigen::MatrixXd A;
  Eigen::VectorXd mu;

  int p() const { return static_cast<int>(kernels.size()); }
  void validate() const;
};

// Mutable lower Cholesky factor with capacity headroom: the sampler's inner
// loop appends and removes single rows in place instead of copying a fresh
// factor per proposal. Throws ErrorKind::kNumeric when an update degenerates;
// the owner then refactorizes from scratch.
class MutableFactor {
 public:
  void reset(const Eigen::MatrixXd& lower, double jitter, int capacity_hint = 0);
  int dim() const { return n_; }
  double jitter() const { return jitter_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve_mat(const Eigen::MatrixXd& rhs) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& rhs) const;
  double log_det_half() const;

  // grow by one row given the cross covariance to existing locations and the
  // (jittered) self variance; returns the new diagonal entry's conditional
  // parameters through out arguments when requested
  void append(const Eigen::VectorXd& cross, double self_var);
  void remove(int index);

  Eigen::MatrixXd lower_copy() const { return lower_.topLeftCorner(n_, n_); }

 private:
  void ensure_capacity(int need);
  Eigen::MatrixXd lower_;  // capacity x capacity, valid lower block is n x n
  int n_ = 0;
  double jitter_ = 0.0;
};

// Working state for conditional sampling of the thinned pattern: locations
// (observed block first, thinned tail), g values at every location, and one
// Cholesky factor per independent field. All Gaussian computations run in
// w = A^{-1}(g - mu) coordinates, where the fields decouple; per-field
// factors make hyperparameter updates O(n^3) in n locations instead of
// (np)^3.
class ThinnedFieldState {
 public:
  using LogRetentionFn = std::function<double(const Eigen::VectorXd& g)>;

  ThinnedFieldState(Domain dom, double lambda, LatentFieldModel model,
                    const Eigen::MatrixXd& obs_locations,
                    const Eigen::MatrixXd& obs_g, LogRetentionFn log_keep);

  // Replace the thinned tail (refactorizes).
  void set_thinned(const Eigen::MatrixXd& locations, const Eigen::MatrixXd& g);

  int n_obs() const { return n_obs_; }
  int n_thinned() const { return static_cast<int>(locations_.rows()) - n_obs_; }
  int n_total() const { return static_cast<int>(locations_.rows()); }
  int p() const { return model_.p(); }

  const Eigen::MatrixXd& locations() const { return locations_; }
  const Eigen::MatrixXd& g_values() const { return g_; }
  Eigen::MatrixXd thinned_locations() const;
  Eigen::MatrixXd thinned_g() const;
  const LatentFieldModel& field_model() const { return model_; }
  double lambda() const { return lambda_; }
  void set_lambda(double lambda) { lambda_ = lambda; }
  const Domain& domain() const { return dom_; }

  // per-field factor access (solves against the current locations)
  double field_jitter(int field) const { return fields_[field].jitter(); }
  Eigen::VectorXd field_solve(int field, const Eigen::VectorXd& rhs) const {
    return fields_[field].solve(rhs);
  }
  Eigen::MatrixXd field_solve_mat(int field, const Eigen::MatrixXd& rhs) const {
    return fields_[field].solve_mat(rhs);
  }
  long refactorizations() const { return refactorizations_; }

  // One birth-death-move step; returns whether the proposal was accepted.
  bool bdm_step(Rng& rng, const MoveProbs& probs, double move_scale);

  // Per-field conditional of w at a new location given all current values.
  void conditional_w(const Eigen::VectorXd& location, Eigen::VectorXd& means,
                     Eigen::VectorXd& vars) const;

  // Value of log N(vec g | vec mu, Sigma_LMC) through the per-field
  // factorization, including the |det A^{-1}|^n Jacobian.
  double log_gaussian_density() const;

  // Gradient of log_gaussian_density in g (n x p matrix), i.e. the
  // -Sigma^{-1}(g - mu) term of the HMC gradient.
  Eigen::MatrixXd gaussian_gradient() const;

  // Hyperparameter plumbing for the Gibbs sampler. set_kernel refactorizes
  // one field and throws ErrorKind::kNumeric on failure (caller rejects).
  void set_g(const Eigen::MatrixXd& g);
  void set_kernel(int field, const Kernel& kernel);
  void set_transform(const Eigen::MatrixXd& A, const Eigen::VectorXd& mu);

  // One field's contribution log N(w_j | 0, K_j), optionally under a
  // caller-supplied candidate factor (Metropolis proposals on kernel
  // parameters are evaluated without committing to the state).
  double field_log_gaussian(int field) const;
  double field_log_gaussian_with(int field, const Eigen::MatrixXd& cand_lower) const;
  // from-scratch factor for a candidate kernel at the current locations;
  // throws ErrorKind::kNumeric on factorization failure
  Eigen::MatrixXd build_field_lower(const Kernel& kernel) const;
  void adopt_kernel(int field, const Kernel& kernel, const Eigen::MatrixXd& lower);

  const Eigen::MatrixXd& w_values() const { return w_; }

 private:
  void rebuild_factors();
  void rebuild_field(int field);
  void refresh_w();
  void append_point(const Eigen::VectorXd& location, const Eigen::VectorXd& w_row,
                    const Eigen::VectorXd& g_row);
  void remove_thinned(int thin_index);
  // cached z_j = L_j^{-1} w_j, invalidated on any state change
  const Eigen::VectorXd& solved_w(int field) const;
  void invalidate_cache() const;

  Domain dom_;
  double lambda_;
  LatentFieldModel model_;
  Eigen::MatrixXd A_inv_;
  int n_obs_ = 0;
  Eigen::MatrixXd locations_;  // n x d
  Eigen::MatrixXd g_;          // n x p
  Eigen::MatrixXd w_;          // n x p, derived
  std::vector<MutableFactor> fields_;
  LogRetentionFn log_keep_;
  long refactorizations_ = 0;
  mutable std::vector<Eigen::VectorXd> z_cache_;
  mutable std::vector<char> z_valid_;
};

}  // namespace coxthin
