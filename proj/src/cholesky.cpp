#include "coxthin/cholesky.hpp"

#include <atomic>
#include <cmath>

namespace coxthin {

namespace {

std::atomic<long> g_refactorizations{0};

double model_marginal_variance(const CovarianceModel& model) {
  Eigen::MatrixXd one(1, 1);
  one(0, 0) = 0.0;
  // marginal variance at an arbitrary location; stationary models ignore it
  Eigen::MatrixXd c = model.cross_cov(one, one);
  return c.diagonal().maxCoeff();
}

Eigen::MatrixXd jittered_cov(const CovarianceModel& model,
                             const Eigen::MatrixXd& locations, double jitter) {
  Eigen::MatrixXd cov = model.cov(locations);
  cov.diagonal().array() += jitter;
  return cov;
}

}  // namespace

long CholeskyState::refactorizations() { return g_refactorizations.load(); }

const CovarianceModel& CholeskyState::model() const {
  require(model_ != nullptr, ErrorKind::kStructural,
          "CholeskyState has no covariance model");
  return *model_;
}

CholeskyState CholeskyState::build(std::shared_ptr<const CovarianceModel> model,
                                   Eigen::MatrixXd locations) {
  double jitter = default_jitter(model_marginal_variance(*model));
  return build(std::move(model), std::move(locations), jitter);
}

CholeskyState CholeskyState::build(std::shared_ptr<const CovarianceModel> model,
                                   Eigen::MatrixXd locations, double jitter) {
  CholeskyState s;
  s.model_ = std::move(model);
  s.locations_ = std::move(locations);
  s.jitter_ = jitter;
  const long n = s.dim();
  if (n == 0) {
    s.lower_.resize(0, 0);
    return s;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(jittered_cov(*s.model_, s.locations_, jitter));
  require(llt.info() == Eigen::Success, ErrorKind::kNumeric,
          "covariance factorization failed");
  s.lower_ = llt.matrixL();
  return s;
}

CholeskyState CholeskyState::extend(const Eigen::VectorXd& new_location) const {
  require(model_ != nullptr, ErrorKind::kStructural, "empty model");
  Eigen::MatrixXd new_locs(n_locations() + 1, new_location.size());
  if (n_locations() > 0) {
    require(new_location.size() == locations_.cols(), ErrorKind::kParameter,
            "dimension mismatch in extend");
    new_locs.topRows(n_locations()) = locations_;
  }
  new_locs.bottomRows(1) = new_location.transpose();

  const int ch = channels();
  const long n = dim();
  Eigen::MatrixXd loc_row = new_location.transpose();
  Eigen::MatrixXd self = model_->cross_cov(loc_row, loc_row);
  self.diagonal().array() += jitter_;
  if (n == 0) {
    Eigen::LLT<Eigen::MatrixXd> llt(self);
    require(llt.info() == Eigen::Success, ErrorKind::kNumeric,
            "covariance factorization failed");
    CholeskyState s;
    s.model_ = model_;
    s.locations_ = std::move(new_locs);
    s.jitter_ = jitter_;
    s.lower_ = llt.matrixL();
    return s;
  }

  Eigen::MatrixXd cross = model_->cross_cov(locations_, loc_row);  // n x ch
  Eigen::MatrixXd b = lower_.triangularView<Eigen::Lower>().solve(cross);
  Eigen::MatrixXd schur = self - b.transpose() * b;
  Eigen::LLT<Eigen::MatrixXd> llt(schur);
  if (llt.info() != Eigen::Success) {
    g_refactorizations.fetch_add(1);
    return build(model_, std::move(new_locs), jitter_);
  }
  CholeskyState s;
  s.model_ = model_;
  s.jitter_ = jitter_;
  s.locations_ = std::move(new_locs);
  s.lower_ = Eigen::MatrixXd::Zero(n + ch, n + ch);
  s.lower_.topLeftCorner(n, n) = lower_;
  s.lower_.block(n, 0, ch, n) = b.transpose();
  s.lower_.block(n, n, ch, ch) = Eigen::MatrixXd(llt.matrixL());
  return s;
}

void chol_rank_one_update(Eigen::MatrixXd& lower, Eigen::VectorXd v) {
  const long m = lower.rows();
  for (long k = 0; k < m; ++k) {
    double lkk = lower(k, k);
    double r = std::hypot(lkk, v[k]);
    double c = r / lkk;
    double s = v[k] / lkk;
    lower(k, k) = r;
    for (long i = k + 1; i < m; ++i) {
      lower(i, k) = (lower(i, k) + s * v[i]) / c;
      v[i] = c * v[i] - s * lower(i, k);
    }
  }
}

CholeskyState CholeskyState::remove(int location_index) const {
  require(location_index >= 0 && location_index < n_locations(),
          ErrorKind::kParameter, "remove index out of range");
  const int ch = channels();
  const long a = static_cast<long>(location_index) * ch;  // rows above
  const long b = a + ch;                                  // first row below
  const long n = dim();
  const long tail = n - b;

  Eigen::MatrixXd new_locs(n_locations() - 1, locations_.cols());
  new_locs.topRows(location_index) = locations_.topRows(location_index);
  new_locs.bottomRows(n_locations() - 1 - location_index) =
      locations_.bottomRows(n_locations() - 1 - location_index);

  CholeskyState s;
  s.model_ = model_;
  s.jitter_ = jitter_;
  s.locations_ = std::move(new_locs);
  s.lower_ = Eigen::MatrixXd::Zero(n - ch, n - ch);
  s.lower_.topLeftCorner(a, a) = lower_.topLeftCorner(a, a);
  if (tail > 0) {
    s.lower_.block(a, 0, tail, a) = lower_.block(b, 0, tail, a);
    // removing the block turns the trailing factor into
    // chol(L33 L33^T + L32 L32^T): ch rank-one updates, always PD
    Eigen::MatrixXd trailing = lower_.block(b, b, tail, tail);
    for (int c = 0; c < ch; ++c) {
      chol_rank_one_update(trailing, lower_.block(b, a + c, tail, 1));
    }
    s.lower_.block(a, a, tail, tail) = trailing;
  }
  // guard against a degenerate diagonal from accumulated roundoff
  for (long i = 0; i < s.lower_.rows(); ++i) {
    if (!(s.lower_(i, i) > 0.0) || !std::isfinite(s.lower_(i, i))) {
      g_refactorizations.fetch_add(1);
      return build(model_, s.locations_, jitter_);
    }
  }
  return s;
}

Eigen::VectorXd CholeskyState::solve_lower(const Eigen::VectorXd& rhs) const {
  return lower_.triangularView<Eigen::Lower>().solve(rhs);
}

Eigen::MatrixXd CholeskyState::solve_lower_mat(const Eigen::MatrixXd& rhs) const {
  return lower_.triangularView<Eigen::Lower>().solve(rhs);
}

double CholeskyState::log_det_half() const {
  double s = 0.0;
  for (long i = 0; i < lower_.rows(); ++i) s += std::log(lower_(i, i));
  return s;
}

}  // namespace coxthin
