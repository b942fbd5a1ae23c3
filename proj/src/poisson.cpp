#include "coxthin/poisson.hpp"

#include <cmath>
#include <limits>

namespace coxthin {

QuadratureGrid QuadratureGrid::midpoint(const Domain& dom, int res) {
  require(res >= 1, ErrorKind::kParameter, "quadrature resolution must be >= 1");
  QuadratureGrid g;
  const int d = dom.dim();
  if (d == 1) {
    double h = (dom.upper()[0] - dom.lower()[0]) / res;
    g.nodes.resize(res, 1);
    for (int i = 0; i < res; ++i) g.nodes(i, 0) = dom.lower()[0] + (i + 0.5) * h;
    g.weight = h;
  } else {
    double hx = (dom.upper()[0] - dom.lower()[0]) / res;
    double hy = (dom.upper()[1] - dom.lower()[1]) / res;
    g.nodes.resize(static_cast<long>(res) * res, 2);
    long k = 0;
    for (int i = 0; i < res; ++i) {
      for (int j = 0; j < res; ++j, ++k) {
        g.nodes(k, 0) = dom.lower()[0] + (i + 0.5) * hx;
        g.nodes(k, 1) = dom.lower()[1] + (j + 0.5) * hy;
      }
    }
    g.weight = hx * hy;
  }
  return g;
}

double QuadratureGrid::integrate(const IntensityFn& f) const {
  double s = 0.0;
  for (long i = 0; i < nodes.rows(); ++i) s += f(nodes.row(i).transpose());
  return s * weight;
}

namespace {

Eigen::VectorXd uniform_point(Rng& rng, const Domain& dom) {
  Eigen::VectorXd x(dom.dim());
  for (int j = 0; j < dom.dim(); ++j) {
    x[j] = rng.uniform(dom.lower()[j], dom.upper()[j]);
  }
  return x;
}

}  // namespace

PointPattern sample_homogeneous_ppp(Rng& rng, const Domain& dom, double lambda) {
  require(lambda > 0.0 && std::isfinite(lambda), ErrorKind::kParameter,
          "lambda must be positive");
  const int n = rng.poisson(lambda * dom.volume());
  Eigen::MatrixXd pts(n, dom.dim());
  for (int i = 0; i < n; ++i) pts.row(i) = uniform_point(rng, dom).transpose();
  return PointPattern(std::move(pts));
}

PointPattern sample_nonhom_ppp_by_thinning(Rng& rng, const Domain& dom,
                                           double lambda_max,
                                           const IntensityFn& intensity) {
  PointPattern base = sample_homogeneous_ppp(rng, dom, lambda_max);
  std::vector<int> keep;
  keep.reserve(base.size());
  for (int i = 0; i < base.size(); ++i) {
    double lam = intensity(base.point(i));
    require(lam >= 0.0, ErrorKind::kContract, "negative intensity");
    require(lam <= lambda_max, ErrorKind::kContract,
            "intensity exceeds envelope lambda_max");
    if (rng.uniform() * lambda_max < lam) keep.push_back(i);
  }
  Eigen::MatrixXd pts(static_cast<int>(keep.size()), dom.dim());
  for (size_t k = 0; k < keep.size(); ++k) pts.row(static_cast<int>(k)) = base.points().row(keep[k]);
  return PointPattern(std::move(pts));
}

double log_ppp_density(const PointPattern& pattern, const Domain& dom,
                       const LogIntensityFn& log_intensity,
                       double intensity_integral) {
  double lp = -intensity_integral - log_factorial(pattern.size());
  for (int i = 0; i < pattern.size(); ++i) {
    Eigen::VectorXd x = pattern.point(i);
    require(dom.contains(x), ErrorKind::kDomain, "pattern point outside domain");
    lp += log_intensity(x);
  }
  return lp;
}

double log_ppp_density(const PointPattern& pattern, const Domain& dom,
                       double lambda) {
  require(lambda > 0.0, ErrorKind::kParameter, "lambda must be positive");
  const double log_lam = std::log(lambda);
  return log_ppp_density(
      pattern, dom, [log_lam](const Eigen::VectorXd&) { return log_lam; },
      lambda * dom.volume());
}

double log_fpp_density(const PointPattern& pattern,
                       const std::function<double(int)>& count_pmf,
                       const std::function<double(const PointPattern&)>& log_scatter) {
  const double p_n = count_pmf(pattern.size());
  require(p_n >= 0.0 && p_n <= 1.0 + 1e-12, ErrorKind::kContract,
          "count_pmf must return a probability");
  if (p_n == 0.0) return -std::numeric_limits<double>::infinity();
  double lp = std::log(p_n);
  if (!pattern.empty()) lp += log_scatter(pattern);
  return lp;
}

}  // namespace coxthin
