#include "coxthin/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace coxthin {

Eigen::VectorXd Domain::evec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Domain::Domain(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() == upper_.size(), ErrorKind::kParameter,
          "domain bounds must have equal length");
  require(lower_.size() == 1 || lower_.size() == 2, ErrorKind::kParameter,
          "only d=1 and d=2 domains are supported");
  for (int i = 0; i < lower_.size(); ++i) {
    require(upper_[i] > lower_[i] && std::isfinite(lower_[i]) &&
                std::isfinite(upper_[i]),
            ErrorKind::kParameter, "domain must satisfy upper > lower");
  }
}

double Domain::volume() const {
  double v = 1.0;
  for (int i = 0; i < lower_.size(); ++i) v *= upper_[i] - lower_[i];
  return v;
}

bool Domain::contains(const Eigen::VectorXd& point) const {
  if (point.size() != lower_.size()) return false;
  for (int i = 0; i < lower_.size(); ++i) {
    if (point[i] < lower_[i] || point[i] > upper_[i]) return false;
  }
  return true;
}

namespace {

// lexicographic sort of row indices, then adjacent compare
void reject_duplicate_rows(const Eigen::MatrixXd& m, const char* what) {
  const int n = static_cast<int>(m.rows());
  if (n < 2) return;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto row_less = [&](int a, int b) {
    for (int j = 0; j < m.cols(); ++j) {
      if (m(a, j) != m(b, j)) return m(a, j) < m(b, j);
    }
    return false;
  };
  std::sort(idx.begin(), idx.end(), row_less);
  for (int k = 1; k < n; ++k) {
    if (m.row(idx[k - 1]) == m.row(idx[k])) {
      throw Error(ErrorKind::kStructural,
                  std::string(what) + ": duplicate locations rejected");
    }
  }
}

}  // namespace

PointPattern::PointPattern(Eigen::MatrixXd points) : points_(std::move(points)) {
  require(points_.rows() == 0 || points_.cols() == 1 || points_.cols() == 2,
          ErrorKind::kStructural, "points must have 1 or 2 coordinates");
  for (int i = 0; i < points_.rows(); ++i) {
    for (int j = 0; j < points_.cols(); ++j) {
      require(std::isfinite(points_(i, j)), ErrorKind::kStructural,
              "non-finite coordinate");
    }
  }
  reject_duplicate_rows(points_, "PointPattern");
}

MarkedPattern::MarkedPattern(Eigen::MatrixXd locations,
                             std::optional<Eigen::VectorXd> times,
                             std::optional<Eigen::MatrixXd> gp_marks,
                             std::optional<Eigen::VectorXi> colours)
    : locations_(std::move(locations)),
      times_(std::move(times)),
      gp_marks_(std::move(gp_marks)),
      colours_(std::move(colours)) {
  const int n = static_cast<int>(locations_.rows());
  reject_duplicate_rows(locations_, "MarkedPattern");
  if (times_) {
    require(times_->size() == n, ErrorKind::kStructural,
            "time vector length mismatch");
    std::vector<double> sorted(times_->data(), times_->data() + n);
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n; ++i) {
      require(sorted[i] >= 0.0 && sorted[i] <= 1.0, ErrorKind::kStructural,
              "times must lie in [0,1]");
      if (i > 0) {
        require(sorted[i] != sorted[i - 1], ErrorKind::kStructural,
                "tied times rejected");
      }
    }
  }
  if (gp_marks_) {
    require(gp_marks_->rows() == n, ErrorKind::kStructural,
            "gp mark row count mismatch");
    require(gp_marks_->allFinite(), ErrorKind::kStructural,
            "gp marks must be finite");
  }
  if (colours_) {
    require(colours_->size() == n, ErrorKind::kStructural,
            "colour vector length mismatch");
    for (int i = 0; i < n; ++i) {
      require((*colours_)[i] >= 0, ErrorKind::kStructural,
              "colour labels must be nonnegative");
    }
  }
}

const Eigen::VectorXd& MarkedPattern::times() const {
  require(times_.has_value(), ErrorKind::kStructural, "pattern has no times");
  return *times_;
}

const Eigen::MatrixXd& MarkedPattern::gp_marks() const {
  require(gp_marks_.has_value(), ErrorKind::kStructural,
          "pattern has no gp marks");
  return *gp_marks_;
}

const Eigen::VectorXi& MarkedPattern::colours() const {
  require(colours_.has_value(), ErrorKind::kStructural,
          "pattern has no colour labels");
  return *colours_;
}

double log_factorial(int n) {
  require(n >= 0, ErrorKind::kParameter, "negative factorial");
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_multinomial_coeff(const std::vector<int>& parts) {
  int total = 0;
  double denom = 0.0;
  for (int p : parts) {
    require(p >= 0, ErrorKind::kParameter, "negative multinomial part");
    total += p;
    denom += log_factorial(p);
  }
  return log_factorial(total) - denom;
}

}  // namespace coxthin
