#pragma once

#include <memory>

#include <Eigen/Dense>

#include "coxthin/common.hpp"

namespace coxthin {

// Isotropic exponential kernel C(r) = variance * exp(-rho r). The single
// kernel family used throughout; kind is kept as an extension point.
struct Kernel {
  enum class Kind { kExponential };
  Kind kind = Kind::kExponential;
  double rho = 1.0;
  double variance = 1.0;

  Kernel() = default;
  Kernel(double rho_, double variance_ = 1.0) : rho(rho_), variance(variance_) {
    require(rho > 0.0, ErrorKind::kParameter, "kernel range must be positive");
    require(variance >= 0.0, ErrorKind::kParameter,
            "kernel variance must be nonnegative");
  }

  double operator()(double r) const { return variance * std::exp(-rho * r); }
};

// Linear model of coregionalization: g(s) = A w(s) + mu with p independent
// unit-variance exponential fields w_j of range rho[j].
struct LMCParams {
  Eigen::MatrixXd A;    // p x p, full rank
  Eigen::VectorXd rho;  // length p
  Eigen::VectorXd mu;   // length p

  LMCParams() = default;
  LMCParams(Eigen::MatrixXd A_, Eigen::VectorXd rho_, Eigen::VectorXd mu_);

  int p() const { return static_cast<int>(rho.size()); }
};

// Covariance matrix of a kernel over locations (rows of pts); OpenMP over
// rows for larger matrices, with the serial version kept callable for tests
// and benchmarks.
Eigen::MatrixXd cov_matrix(const Kernel& kernel, const Eigen::MatrixXd& pts);
Eigen::MatrixXd cov_matrix_serial(const Kernel& kernel,
                                  const Eigen::MatrixXd& pts);

// Cross-covariance between two location sets.
Eigen::MatrixXd cross_cov_matrix(const Kernel& kernel, const Eigen::MatrixXd& a,
                                 const Eigen::MatrixXd& b);

// LMC covariance over locations in point-major, channel-minor layout: entry
// ((i,k),(j,l)) = sum_m A(k,m) A(l,m) exp(-rho_m |s_i - s_j|). The layout is
// fixed: row index = i*p + k.
Eigen::MatrixXd lmc_cov_matrix(const LMCParams& params,
                               const Eigen::MatrixXd& pts);
Eigen::MatrixXd lmc_cov_matrix_serial(const LMCParams& params,
                                      const Eigen::MatrixXd& pts);

// Abstract covariance model over locations with `channels()` values per
// location; the bridge between kernels/LMC and the Cholesky state.
class CovarianceModel {
 public:
  virtual ~CovarianceModel() = default;
  virtual int channels() const = 0;
  // ((na*ch) x (nb*ch)) cross covariance, point-major channel-minor.
  virtual Eigen::MatrixXd cross_cov(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b) const = 0;
  virtual Eigen::VectorXd mean(int n_locations) const = 0;

  Eigen::MatrixXd cov(const Eigen::MatrixXd& pts) const {
    return cross_cov(pts, pts);
  }
};

class KernelCovariance final : public CovarianceModel {
 public:
  explicit KernelCovariance(Kernel k, double mean_level = 0.0)
      : kernel_(k), mean_level_(mean_level) {}
  int channels() const override { return 1; }
  Eigen::MatrixXd cross_cov(const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b) const override;
  Eigen::VectorXd mean(int n) const override {
    return Eigen::VectorXd::Constant(n, mean_level_);
  }
  const Kernel& kernel() const { return kernel_; }

 private:
  Kernel kernel_;
  double mean_level_;
};

class LmcCovariance final : public CovarianceModel {
 public:
  explicit LmcCovariance(LMCParams params) : params_(std::move(params)) {}
  int channels() const override { return params_.p(); }
  Eigen::MatrixXd cross_cov(const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b) const override;
  Eigen::VectorXd mean(int n) const override;
  const LMCParams& params() const { return params_; }

 private:
  LMCParams params_;
};

}  // namespace coxthin
