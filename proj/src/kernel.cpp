#include "coxthin/kernel.hpp"

#include <cmath>

#include "coxthin/parallel.hpp"

namespace coxthin {

LMCParams::LMCParams(Eigen::MatrixXd A_, Eigen::VectorXd rho_, Eigen::VectorXd mu_)
    : A(std::move(A_)), rho(std::move(rho_)), mu(std::move(mu_)) {
  const int pp = static_cast<int>(rho.size());
  require(pp >= 1, ErrorKind::kParameter, "LMC needs p >= 1");
  require(A.rows() == pp && A.cols() == pp, ErrorKind::kParameter,
          "A must be p x p");
  require(mu.size() == pp, ErrorKind::kParameter, "mu must have length p");
  for (int j = 0; j < pp; ++j) {
    require(rho[j] > 0.0, ErrorKind::kParameter, "rho must be positive");
  }
  double det = A.determinant();
  require(std::abs(det) > 1e-10, ErrorKind::kParameter,
          "coregionalization matrix A must be full rank");
}

namespace {

double dist(const Eigen::MatrixXd& a, long i, const Eigen::MatrixXd& b, long j) {
  double s = 0.0;
  for (int c = 0; c < a.cols(); ++c) {
    double d = a(i, c) - b(j, c);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

Eigen::MatrixXd cov_matrix_serial(const Kernel& kernel,
                                  const Eigen::MatrixXd& pts) {
  const long n = pts.rows();
  Eigen::MatrixXd cov(n, n);
  for (long i = 0; i < n; ++i) {
    cov(i, i) = kernel.variance;
    for (long j = 0; j < i; ++j) {
      double v = kernel(dist(pts, i, pts, j));
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

Eigen::MatrixXd cov_matrix(const Kernel& kernel, const Eigen::MatrixXd& pts) {
  const long n = pts.rows();
  if (n < 128 || max_threads() == 1) return cov_matrix_serial(kernel, pts);
  Eigen::MatrixXd cov(n, n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(max_threads())
  for (long i = 0; i < n; ++i) {
    cov(i, i) = kernel.variance;
    for (long j = 0; j < i; ++j) {
      double v = kernel(dist(pts, i, pts, j));
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

Eigen::MatrixXd cross_cov_matrix(const Kernel& kernel, const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b) {
  Eigen::MatrixXd cov(a.rows(), b.rows());
  for (long i = 0; i < a.rows(); ++i) {
    for (long j = 0; j < b.rows(); ++j) {
      cov(i, j) = kernel(dist(a, i, b, j));
    }
  }
  return cov;
}

namespace {

// One (p x p) cross block between locations at distance r:
// sum_m exp(-rho_m r) a_m a_m^T with a_m the m-th column of A.
Eigen::MatrixXd lmc_block(const LMCParams& lmc, double r) {
  const int p = lmc.p();
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(p, p);
  for (int m = 0; m < p; ++m) {
    block += std::exp(-lmc.rho[m] * r) * (lmc.A.col(m) * lmc.A.col(m).transpose());
  }
  return block;
}

template <bool Parallel>
Eigen::MatrixXd lmc_cov_impl(const LMCParams& lmc, const Eigen::MatrixXd& pts) {
  const long n = pts.rows();
  const int p = lmc.p();
  Eigen::MatrixXd cov(n * p, n * p);
  auto fill_row = [&](long i) {
    for (long j = 0; j <= i; ++j) {
      Eigen::MatrixXd block = lmc_block(lmc, dist(pts, i, pts, j));
      cov.block(i * p, j * p, p, p) = block;
      if (j != i) cov.block(j * p, i * p, p, p) = block.transpose();
    }
  };
  if constexpr (Parallel) {
#pragma omp parallel for schedule(dynamic, 8) num_threads(max_threads())
    for (long i = 0; i < n; ++i) fill_row(i);
  } else {
    for (long i = 0; i < n; ++i) fill_row(i);
  }
  return cov;
}

}  // namespace

Eigen::MatrixXd lmc_cov_matrix_serial(const LMCParams& params,
                                      const Eigen::MatrixXd& pts) {
  return lmc_cov_impl<false>(params, pts);
}

Eigen::MatrixXd lmc_cov_matrix(const LMCParams& params,
                               const Eigen::MatrixXd& pts) {
  if (pts.rows() < 64 || max_threads() == 1) {
    return lmc_cov_impl<false>(params, pts);
  }
  return lmc_cov_impl<true>(params, pts);
}

Eigen::MatrixXd KernelCovariance::cross_cov(const Eigen::MatrixXd& a,
                                            const Eigen::MatrixXd& b) const {
  if (a.rows() == b.rows() && &a == &b) return cov_matrix(kernel_, a);
  return cross_cov_matrix(kernel_, a, b);
}

Eigen::MatrixXd LmcCovariance::cross_cov(const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& b) const {
  if (a.rows() == b.rows() && &a == &b) return lmc_cov_matrix(params_, a);
  const int p = params_.p();
  Eigen::MatrixXd cov(a.rows() * p, b.rows() * p);
  for (long i = 0; i < a.rows(); ++i) {
    for (long j = 0; j < b.rows(); ++j) {
      cov.block(i * p, j * p, p, p) = lmc_block(params_, dist(a, i, b, j));
    }
  }
  return cov;
}

Eigen::VectorXd LmcCovariance::mean(int n) const {
  const int p = params_.p();
  Eigen::VectorXd m(static_cast<long>(n) * p);
  for (int i = 0; i < n; ++i) m.segment(static_cast<long>(i) * p, p) = params_.mu;
  return m;
}

}  // namespace coxthin
