#include "coxthin/bdm.hpp"

#include <cmath>
#include <numbers>

namespace coxthin {

Eigen::VectorXd sigma_probs(const Eigen::VectorXd& g) {
  const int p = static_cast<int>(g.size());
  double m = 0.0;  // max(0, g_1..g_p); the baseline has log-weight 0
  for (int j = 0; j < p; ++j) m = std::max(m, g[j]);
  Eigen::VectorXd probs(p + 1);
  probs[0] = std::exp(-m);
  double total = probs[0];
  for (int j = 0; j < p; ++j) {
    probs[j + 1] = std::exp(g[j] - m);
    total += probs[j + 1];
  }
  probs /= total;
  return probs / probs.sum();  // renormalize so the sum is exactly 1
}

double log_sigma(const Eigen::VectorXd& g, int k) {
  const int p = static_cast<int>(g.size());
  require(k >= 0 && k <= p, ErrorKind::kParameter, "sigma class out of range");
  double m = 0.0;
  for (int j = 0; j < p; ++j) m = std::max(m, g[j]);
  double lse = std::exp(-m);
  for (int j = 0; j < p; ++j) lse += std::exp(g[j] - m);
  double log_denom = m + std::log(lse);
  return (k == 0 ? 0.0 : g[k - 1]) - log_denom;
}

double bdm_birth_log_ratio(double lambda_vol, int n0_before, double log_keep_new,
                           const MoveProbs& probs) {
  return std::log(lambda_vol) + log_keep_new - std::log(n0_before + 1.0) +
         std::log(probs.death) - std::log(probs.birth);
}

double bdm_death_log_ratio(double lambda_vol, int n0_before, double log_keep_del,
                           const MoveProbs& probs) {
  return std::log(static_cast<double>(n0_before)) - std::log(lambda_vol) -
         log_keep_del + std::log(probs.birth) - std::log(probs.death);
}

double bdm_move_log_ratio(double log_keep_new, double log_keep_old) {
  return log_keep_new - log_keep_old;
}

void LatentFieldModel::validate() const {
  const int pp = p();
  require(pp >= 1, ErrorKind::kParameter, "latent field model needs p >= 1");
  require(A.rows() == pp && A.cols() == pp, ErrorKind::kParameter,
          "A must be p x p");
  require(mu.size() == pp, ErrorKind::kParameter, "mu must have length p");
  require(std::abs(A.determinant()) > 1e-12, ErrorKind::kParameter,
          "A must be invertible");
}

// ---------------------------------------------------------------------------
// MutableFactor

void MutableFactor::ensure_capacity(int need) {
  if (lower_.rows() >= need) return;
  int cap = std::max(need, static_cast<int>(lower_.rows() * 3 / 2) + 8);
  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(cap, cap);
  grown.topLeftCorner(n_, n_) = lower_.topLeftCorner(n_, n_);
  lower_ = std::move(grown);
}

void MutableFactor::reset(const Eigen::MatrixXd& lower, double jitter,
                          int capacity_hint) {
  n_ = static_cast<int>(lower.rows());
  jitter_ = jitter;
  int cap = std::max(n_, capacity_hint);
  lower_ = Eigen::MatrixXd::Zero(cap, cap);
  lower_.topLeftCorner(n_, n_) = lower;
}

Eigen::VectorXd MutableFactor::solve(const Eigen::VectorXd& rhs) const {
  return lower_.topLeftCorner(n_, n_)
      .triangularView<Eigen::Lower>()
      .solve(rhs);
}

Eigen::MatrixXd MutableFactor::solve_mat(const Eigen::MatrixXd& rhs) const {
  return lower_.topLeftCorner(n_, n_)
      .triangularView<Eigen::Lower>()
      .solve(rhs);
}

Eigen::VectorXd MutableFactor::solve_transpose(const Eigen::VectorXd& rhs) const {
  return lower_.topLeftCorner(n_, n_)
      .triangularView<Eigen::Lower>()
      .transpose()
      .solve(rhs);
}

double MutableFactor::log_det_half() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s += std::log(lower_(i, i));
  return s;
}

void MutableFactor::append(const Eigen::VectorXd& cross, double self_var) {
  require(cross.size() == n_, ErrorKind::kParameter,
          "append cross-covariance length mismatch");
  ensure_capacity(n_ + 1);
  double schur = self_var;
  if (n_ > 0) {
    Eigen::VectorXd b = solve(cross);
    schur -= b.squaredNorm();
    lower_.row(n_).head(n_) = b.transpose();
  }
  if (!(schur > 0.0) || !std::isfinite(schur)) {
    throw Error(ErrorKind::kNumeric, "in-place extension lost definiteness");
  }
  lower_(n_, n_) = std::sqrt(schur);
  n_ += 1;
}

namespace {

// rank-one update on a trailing block of a larger matrix
void block_rank_one_update(Eigen::MatrixXd& m, int off, int size,
                           Eigen::VectorXd v) {
  for (int k = 0; k < size; ++k) {
    double lkk = m(off + k, off + k);
    double r = std::hypot(lkk, v[k]);
    double c = r / lkk;
    double s = v[k] / lkk;
    m(off + k, off + k) = r;
    for (int i = k + 1; i < size; ++i) {
      m(off + i, off + k) = (m(off + i, off + k) + s * v[i]) / c;
      v[i] = c * v[i] - s * m(off + i, off + k);
    }
  }
}

}  // namespace

void MutableFactor::remove(int index) {
  require(index >= 0 && index < n_, ErrorKind::kParameter,
          "remove index out of range");
  const int tail = n_ - index - 1;
  Eigen::VectorXd col_below(tail);
  for (int r = 0; r < tail; ++r) col_below[r] = lower_(index + 1 + r, index);
  // shift rows below the removed one up by one; the trailing triangle also
  // shifts left. Moving up-left row by row never overwrites unread data.
  for (int r = index + 1; r < n_; ++r) {
    for (int c = 0; c < index; ++c) lower_(r - 1, c) = lower_(r, c);
    for (int c = index + 1; c <= r; ++c) lower_(r - 1, c - 1) = lower_(r, c);
  }
  n_ -= 1;
  if (tail > 0) {
    block_rank_one_update(lower_, index, tail, std::move(col_below));
    for (int k = index; k < n_; ++k) {
      if (!(lower_(k, k) > 0.0) || !std::isfinite(lower_(k, k))) {
        throw Error(ErrorKind::kNumeric, "in-place removal lost definiteness");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// ThinnedFieldState

ThinnedFieldState::ThinnedFieldState(Domain dom, double lambda,
                                     LatentFieldModel model,
                                     const Eigen::MatrixXd& obs_locations,
                                     const Eigen::MatrixXd& obs_g,
                                     LogRetentionFn log_keep)
    : dom_(std::move(dom)),
      lambda_(lambda),
      model_(std::move(model)),
      n_obs_(static_cast<int>(obs_locations.rows())),
      locations_(obs_locations),
      g_(obs_g),
      log_keep_(std::move(log_keep)) {
  require(lambda_ > 0.0, ErrorKind::kParameter, "lambda must be positive");
  model_.validate();
  require(obs_g.rows() == obs_locations.rows() && obs_g.cols() == model_.p(),
          ErrorKind::kStructural, "observed g values must be n_obs x p");
  if (locations_.cols() == 0 && locations_.rows() == 0) {
    locations_.resize(0, dom_.dim());
    g_.resize(0, model_.p());
  }
  A_inv_ = model_.A.inverse();
  fields_.resize(model_.p());
  z_cache_.resize(model_.p());
  z_valid_.assign(model_.p(), 0);
  rebuild_factors();
}

void ThinnedFieldState::invalidate_cache() const {
  std::fill(z_valid_.begin(), z_valid_.end(), 0);
}

const Eigen::VectorXd& ThinnedFieldState::solved_w(int field) const {
  if (!z_valid_[field]) {
    z_cache_[field] = fields_[field].solve(w_.col(field));
    z_valid_[field] = 1;
  }
  return z_cache_[field];
}

void ThinnedFieldState::rebuild_field(int field) {
  Eigen::MatrixXd cov = cov_matrix(model_.kernels[field], locations_);
  const double jitter =
      CholeskyState::default_jitter(model_.kernels[field].variance);
  cov.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  require(llt.info() == Eigen::Success || n_total() == 0, ErrorKind::kNumeric,
          "field covariance factorization failed");
  fields_[field].reset(llt.matrixL(), jitter, n_total() + 32);
  z_valid_[field] = 0;
}

void ThinnedFieldState::rebuild_factors() {
  refresh_w();
  for (int j = 0; j < model_.p(); ++j) rebuild_field(j);
}

void ThinnedFieldState::refresh_w() {
  Eigen::MatrixXd centered = g_;
  centered.rowwise() -= model_.mu.transpose();
  w_ = centered * A_inv_.transpose();
  invalidate_cache();
}

void ThinnedFieldState::set_thinned(const Eigen::MatrixXd& locations,
                                    const Eigen::MatrixXd& g) {
  require(locations.rows() == g.rows() && g.cols() == model_.p(),
          ErrorKind::kStructural, "thinned g values must be n x p");
  Eigen::MatrixXd new_locs(n_obs_ + locations.rows(), dom_.dim());
  Eigen::MatrixXd new_g(n_obs_ + locations.rows(), model_.p());
  new_locs.topRows(n_obs_) = locations_.topRows(n_obs_);
  new_g.topRows(n_obs_) = g_.topRows(n_obs_);
  new_locs.bottomRows(locations.rows()) = locations;
  new_g.bottomRows(locations.rows()) = g;
  locations_ = std::move(new_locs);
  g_ = std::move(new_g);
  rebuild_factors();
}

Eigen::MatrixXd ThinnedFieldState::thinned_locations() const {
  return locations_.bottomRows(n_thinned());
}

Eigen::MatrixXd ThinnedFieldState::thinned_g() const {
  return g_.bottomRows(n_thinned());
}

void ThinnedFieldState::conditional_w(const Eigen::VectorXd& location,
                                      Eigen::VectorXd& means,
                                      Eigen::VectorXd& vars) const {
  const int p = model_.p();
  means.resize(p);
  vars.resize(p);
  Eigen::MatrixXd loc_row = location.transpose();
  for (int j = 0; j < p; ++j) {
    double prior_var = model_.kernels[j].variance + fields_[j].jitter();
    if (n_total() == 0) {
      means[j] = 0.0;
      vars[j] = prior_var;
      continue;
    }
    Eigen::VectorXd cross =
        cross_cov_matrix(model_.kernels[j], locations_, loc_row).col(0);
    Eigen::VectorXd b = fields_[j].solve(cross);
    means[j] = b.dot(solved_w(j));
    vars[j] = std::max(0.0, prior_var - b.squaredNorm());
  }
}

void ThinnedFieldState::append_point(const Eigen::VectorXd& location,
                                     const Eigen::VectorXd& w_row,
                                     const Eigen::VectorXd& g_row) {
  const int n = n_total();
  Eigen::MatrixXd loc_row = location.transpose();
  for (int j = 0; j < model_.p(); ++j) {
    Eigen::VectorXd cross =
        n > 0 ? cross_cov_matrix(model_.kernels[j], locations_, loc_row).col(0)
              : Eigen::VectorXd(0);
    double self_var = model_.kernels[j].variance + fields_[j].jitter();
    try {
      fields_[j].append(cross, self_var);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNumeric) throw;
      // fall back below once the location rows are in place
      fields_[j].reset(Eigen::MatrixXd(0, 0), fields_[j].jitter());
    }
  }
  locations_.conservativeResize(n + 1, Eigen::NoChange);
  locations_.row(n) = location.transpose();
  g_.conservativeResize(n + 1, Eigen::NoChange);
  g_.row(n) = g_row.transpose();
  w_.conservativeResize(n + 1, Eigen::NoChange);
  w_.row(n) = w_row.transpose();
  for (int j = 0; j < model_.p(); ++j) {
    if (fields_[j].dim() != n_total()) {
      refactorizations_ += 1;
      rebuild_field(j);
    }
  }
  invalidate_cache();
}

void ThinnedFieldState::remove_thinned(int thin_index) {
  const int row = n_obs_ + thin_index;
  const int n = n_total();
  Eigen::MatrixXd locs(n - 1, locations_.cols());
  Eigen::MatrixXd g(n - 1, g_.cols());
  Eigen::MatrixXd w(n - 1, w_.cols());
  locs.topRows(row) = locations_.topRows(row);
  g.topRows(row) = g_.topRows(row);
  w.topRows(row) = w_.topRows(row);
  locs.bottomRows(n - 1 - row) = locations_.bottomRows(n - 1 - row);
  g.bottomRows(n - 1 - row) = g_.bottomRows(n - 1 - row);
  w.bottomRows(n - 1 - row) = w_.bottomRows(n - 1 - row);
  locations_ = std::move(locs);
  g_ = std::move(g);
  w_ = std::move(w);
  for (int j = 0; j < model_.p(); ++j) {
    try {
      fields_[j].remove(row);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNumeric) throw;
      refactorizations_ += 1;
      rebuild_field(j);
    }
  }
  invalidate_cache();
}

bool ThinnedFieldState::bdm_step(Rng& rng, const MoveProbs& probs,
                                 double move_scale) {
  probs.validate();
  const double lambda_vol = lambda_ * dom_.volume();
  const int n0 = n_thinned();
  const double u = rng.uniform();
  const int p_ = p();

  if (u < probs.birth) {
    Eigen::VectorXd loc(dom_.dim());
    for (int c = 0; c < dom_.dim(); ++c) {
      loc[c] = rng.uniform(dom_.lower()[c], dom_.upper()[c]);
    }
    Eigen::VectorXd means, vars;
    conditional_w(loc, means, vars);
    Eigen::VectorXd w_new(p_);
    for (int j = 0; j < p_; ++j) {
      w_new[j] = means[j] + std::sqrt(vars[j]) * rng.normal();
    }
    Eigen::VectorXd g_new = model_.A * w_new + model_.mu;
    double log_r = bdm_birth_log_ratio(lambda_vol, n0, log_keep_(g_new), probs);
    if (std::log(rng.uniform()) < log_r) {
      append_point(loc, w_new, g_new);
      return true;
    }
    return false;
  }

  if (u < probs.birth + probs.death) {
    if (n0 == 0) return false;  // auto-rejected
    int i = std::min(n0 - 1, static_cast<int>(rng.uniform() * n0));
    Eigen::VectorXd g_del = g_.row(n_obs_ + i).transpose();
    double log_r = bdm_death_log_ratio(lambda_vol, n0, log_keep_(g_del), probs);
    if (std::log(rng.uniform()) < log_r) {
      remove_thinned(i);
      return true;
    }
    return false;
  }

  // move: drop the point, draw fresh values at the displaced location, and
  // on rejection re-append the original (the pattern is a set, so the index
  // shuffle is immaterial)
  if (n0 == 0) return false;
  int i = std::min(n0 - 1, static_cast<int>(rng.uniform() * n0));
  const int row = n_obs_ + i;
  Eigen::VectorXd old_loc = locations_.row(row).transpose();
  Eigen::VectorXd old_w = w_.row(row).transpose();
  Eigen::VectorXd old_g = g_.row(row).transpose();
  Eigen::VectorXd new_loc(dom_.dim());
  for (int c = 0; c < dom_.dim(); ++c) {
    new_loc[c] = old_loc[c] + move_scale * rng.normal();
  }
  if (!dom_.contains(new_loc)) return false;  // auto-rejected

  remove_thinned(i);
  Eigen::VectorXd means, vars, w_new(p_);
  conditional_w(new_loc, means, vars);
  for (int j = 0; j < p_; ++j) {
    w_new[j] = means[j] + std::sqrt(vars[j]) * rng.normal();
  }
  Eigen::VectorXd g_new = model_.A * w_new + model_.mu;
  double log_r = bdm_move_log_ratio(log_keep_(g_new), log_keep_(old_g));
  if (std::log(rng.uniform()) < log_r) {
    append_point(new_loc, w_new, g_new);
    return true;
  }
  append_point(old_loc, old_w, old_g);
  return false;
}

double ThinnedFieldState::log_gaussian_density() const {
  const long n = n_total();
  if (n == 0) return 0.0;
  double lp = n * std::log(std::abs(A_inv_.determinant()));
  for (int j = 0; j < p(); ++j) {
    lp += -0.5 * n * std::log(2.0 * std::numbers::pi) -
          fields_[j].log_det_half() - 0.5 * solved_w(j).squaredNorm();
  }
  return lp;
}

Eigen::MatrixXd ThinnedFieldState::gaussian_gradient() const {
  const long n = n_total();
  Eigen::MatrixXd q(n, p());
  for (int j = 0; j < p(); ++j) {
    q.col(j) = fields_[j].solve_transpose(solved_w(j));
  }
  return -q * A_inv_;
}

double ThinnedFieldState::field_log_gaussian(int field) const {
  const long n = n_total();
  if (n == 0) return 0.0;
  return -0.5 * n * std::log(2.0 * std::numbers::pi) -
         fields_[field].log_det_half() - 0.5 * solved_w(field).squaredNorm();
}

double ThinnedFieldState::field_log_gaussian_with(
    int field, const Eigen::MatrixXd& cand_lower) const {
  const long n = n_total();
  if (n == 0) return 0.0;
  Eigen::VectorXd z =
      cand_lower.triangularView<Eigen::Lower>().solve(w_.col(field));
  double log_det_half = 0.0;
  for (long i = 0; i < cand_lower.rows(); ++i) {
    log_det_half += std::log(cand_lower(i, i));
  }
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - log_det_half -
         0.5 * z.squaredNorm();
}

Eigen::MatrixXd ThinnedFieldState::build_field_lower(const Kernel& kernel) const {
  Eigen::MatrixXd cov = cov_matrix(kernel, locations_);
  cov.diagonal().array() += CholeskyState::default_jitter(kernel.variance);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  require(llt.info() == Eigen::Success, ErrorKind::kNumeric,
          "field covariance factorization failed");
  return llt.matrixL();
}

void ThinnedFieldState::adopt_kernel(int field, const Kernel& kernel,
                                     const Eigen::MatrixXd& lower) {
  require(lower.rows() == n_total(), ErrorKind::kStructural,
          "adopted factor does not cover the locations");
  model_.kernels[field] = kernel;
  fields_[field].reset(lower, CholeskyState::default_jitter(kernel.variance),
                       n_total() + 32);
  z_valid_[field] = 0;
}

void ThinnedFieldState::set_g(const Eigen::MatrixXd& g) {
  require(g.rows() == n_total() && g.cols() == model_.p(),
          ErrorKind::kStructural, "set_g dimension mismatch");
  g_ = g;
  refresh_w();
}

void ThinnedFieldState::set_kernel(int field, const Kernel& kernel) {
  require(field >= 0 && field < p(), ErrorKind::kParameter,
          "field index out of range");
  Eigen::MatrixXd lower = build_field_lower(kernel);
  adopt_kernel(field, kernel, lower);
}

void ThinnedFieldState::set_transform(const Eigen::MatrixXd& A,
                                      const Eigen::VectorXd& mu) {
  require(A.rows() == p() && A.cols() == p() && mu.size() == p(),
          ErrorKind::kParameter, "transform dimension mismatch");
  require(std::abs(A.determinant()) > 1e-12, ErrorKind::kParameter,
          "A must stay invertible");
  model_.A = A;
  model_.mu = mu;
  A_inv_ = A.inverse();
  refresh_w();
}

}  // namespace coxthin
