#pragma once

#include "coxthin/pattern.hpp"
#include "coxthin/poisson.hpp"
#include "coxthin/rng.hpp"

namespace coxthin::matern3 {

// Space-time pattern on S x [0,1]; locations with strictly distinct time
// stamps plus optional thinned/observed labels.
using TimedPattern = MarkedPattern;

// Shadow H(s,t,s*,t*): probability that the point at (s*,t*) deletes a point
// at (s,t). Always 0 for t <= t* and for the point itself. Deterministic:
// indicator of ||s-s*|| < R (strict). Probabilistic: a (0,1]-valued bump
// kernel kappa * exp(-||s-s*||^2 / (2 ell^2)).
struct Shadow {
  enum class Kind { kDeterministic, kProbabilistic };
  Kind kind = Kind::kDeterministic;
  double radius = 0.1;
  double kappa = 1.0;
  double ell = 0.1;

  static Shadow deterministic(double R) {
    require(R >= 0.0, ErrorKind::kParameter, "radius must be nonnegative");
    Shadow s;
    s.kind = Kind::kDeterministic;
    s.radius = R;
    return s;
  }
  static Shadow gaussian_bump(double kappa, double ell) {
    require(kappa > 0.0 && kappa <= 1.0, ErrorKind::kParameter,
            "kappa must lie in (0,1]");
    require(ell > 0.0, ErrorKind::kParameter, "ell must be positive");
    Shadow s;
    s.kind = Kind::kProbabilistic;
    s.kappa = kappa;
    s.ell = ell;
    return s;
  }

  // spatial part K(s; s*) alone, without the time indicator
  double spatial(const Eigen::VectorXd& s, const Eigen::VectorXd& s_star) const;
};

double shadow_eval(const Shadow& sh, const Eigen::VectorXd& s, double t,
                   const Eigen::VectorXd& s_star, double t_star);

// Combined shadow h(s,t; observed) = 1 - prod_j (1 - H(s,t,s_j,t_j)); zero
// for an empty observed pattern.
double combined_shadow_h(const Eigen::VectorXd& s, double t,
                         const TimedPattern& observed, const Shadow& sh);

struct SimulationResult {
  TimedPattern thinned;   // colour 0
  TimedPattern observed;  // colour 1
};

// Generative simulation: homogeneous PPP(lambda) on S x [0,1], then labels
// assigned cycling through points in time order; only earlier kept points
// shadow, with Bernoulli draws realized per earlier kept point in the
// probabilistic case. No edge correction: the process is taken as it unfolds
// on S alone.
SimulationResult simulate_matern3(Rng& rng, const Domain& dom, double lambda,
                                  const Shadow& sh);

// Order-free log probability of the label configuration given locations and
// times: per point, [1 - prod_j (1-H_ij)^{c_j}] if thinned, prod_j
// (1-H_ij)^{c_j} if observed, products over every point. 0-or--inf in the
// deterministic case.
double log_label_scatter(const TimedPattern& coloured, const Shadow& sh);

// log joint density of (thinned, observed):
// -lambda|S| + n log lambda - log n0! - log n1!
//   + sum_thinned log h_i + sum_observed log(1 - h_i).
double log_joint_density_m3(const TimedPattern& thinned,
                            const TimedPattern& observed, const Domain& dom,
                            double lambda, const Shadow& sh);

// Quadrature control for int h over S x [0,1]. The time integral is computed
// exactly from the sorted observed times; space uses a midpoint grid, except
// for deterministic shadows where an exact geometric path applies (interval
// unions in d=1; disc areas with pairwise inclusion-exclusion in d=2 whenever
// no disc crosses the boundary and no three discs can overlap).
struct HQuadrature {
  int space_res = 256;
};

struct HIntegral {
  double value = 0.0;
  bool exact = false;
};

HIntegral integral_h(const TimedPattern& observed, const Domain& dom,
                     const Shadow& sh, const HQuadrature& quad = {});
// Serial reference for the gridded path (kept for tests and the benchmark).
HIntegral integral_h_serial(const TimedPattern& observed, const Domain& dom,
                            const Shadow& sh, const HQuadrature& quad = {});

// log marginal density of the observed pattern:
// -lambda (|S| - int h) + n1 log lambda - log n1! + sum log(1-h_i).
double log_marginal_density_m3(const TimedPattern& observed, const Domain& dom,
                               double lambda, const Shadow& sh,
                               const HQuadrature& quad = {});

// log density of a thinned pattern under PPP(lambda h(.,.; observed)); the
// chain identity log_joint == log_marginal + this holds exactly with shared
// quadrature.
double log_conditional_ppp_density(const TimedPattern& thinned,
                                   const TimedPattern& observed,
                                   const Domain& dom, double lambda,
                                   const Shadow& sh,
                                   const HQuadrature& quad = {});

// Exact conditional draw of the thinned pattern given observed: thinning of
// a homogeneous PPP(lambda) on S x [0,1] with target lambda h.
TimedPattern sample_conditional_thinned_m3(Rng& rng,
                                           const TimedPattern& observed,
                                           const Domain& dom, double lambda,
                                           const Shadow& sh);

// Bundled verification: the density-chain identity over simulated
// configurations (both shadow kinds), the deterministic hard-core property,
// and the conditional count law under a full-shadow subregion.
struct VerifyConfig {
  double lambda = 20.0;
  double radius = 0.1;
  long n_configs = 100;              // density-chain configurations per kind
  long n_hardcore_sims = 10000;
  long n_cond_draws = 100000;
  double cond_lambda = 10.0;
  double shadow_area = 0.3;          // full-shadow disc area for the count law
};

struct VerifyReport {
  long n_configs = 0;
  double chain_max_abs_err = 0.0;    // |log_joint - log_marginal - log PPP|
  long n_hardcore_sims = 0;
  long hardcore_violations = 0;
  long n_cond_draws = 0;
  double cond_count_mean = 0.0;
  double cond_count_chisq_p = 0.0;   // against Poisson(lambda * area)
  std::uint64_t seed = 0;
};

VerifyReport verify_matern3(Rng& rng, const Domain& dom,
                            const VerifyConfig& config = {});

}  // namespace coxthin::matern3
