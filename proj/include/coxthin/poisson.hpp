#pragma once

#include <functional>

#include "coxthin/pattern.hpp"
#include "coxthin/rng.hpp"

namespace coxthin {

using IntensityFn = std::function<double(const Eigen::VectorXd&)>;
using LogIntensityFn = std::function<double(const Eigen::VectorXd&)>;

// Midpoint quadrature nodes over a rectangular domain; weight is the common
// cell measure. res cells per axis.
struct QuadratureGrid {
  Eigen::MatrixXd nodes;  // one row per node
  double weight = 0.0;

  static QuadratureGrid midpoint(const Domain& dom, int res);

  double integrate(const IntensityFn& f) const;
};

// Homogeneous Poisson process: count ~ Poisson(lambda * |S|), locations
// i.i.d. uniform.
PointPattern sample_homogeneous_ppp(Rng& rng, const Domain& dom, double lambda);

// Non-homogeneous PPP by thinning a homogeneous envelope at lambda_max.
// Throws a contract error if the intensity exceeds the envelope at a
// proposed point.
PointPattern sample_nonhom_ppp_by_thinning(Rng& rng, const Domain& dom,
                                           double lambda_max,
                                           const IntensityFn& intensity);

// log density of a pattern under PPP(lambda(.)), taken against the
// counting-scattering measure: -int lambda - log n! + sum log lambda(x_i).
// The intensity integral is the caller's: pass it directly, or use
// QuadratureGrid::integrate.
double log_ppp_density(const PointPattern& pattern, const Domain& dom,
                       const LogIntensityFn& log_intensity,
                       double intensity_integral);

// Constant-intensity convenience overload.
double log_ppp_density(const PointPattern& pattern, const Domain& dom,
                       double lambda);

// Generic finite-point-process density log p_n + log pi_n, where log_scatter
// evaluates the symmetric scattering density of the ordered point tuple
// (pi_0 == 1 by convention). count_pmf(n) == 0 yields -inf.
double log_fpp_density(const PointPattern& pattern,
                       const std::function<double(int)>& count_pmf,
                       const std::function<double(const PointPattern&)>& log_scatter);

}  // namespace coxthin
