#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coxthin/bdm.hpp"
#include "coxthin/rng.hpp"

namespace coxthin::mtsgcp {

// Multitype model: base PPP(lambda) on the domain, LMC field g, each point
// classified into type j in {1..p} with probability sigma_j(g) or thinned
// (type 0) with probability sigma_0(g).
struct MtsgcpParams {
  double lambda = 1.0;
  LMCParams lmc;
  Domain dom = Domain::unit_square();

  int p() const { return lmc.p(); }
  void validate() const {
    require(lambda > 0.0, ErrorKind::kParameter, "lambda must be positive");
  }
};

// sigma(g) = (sigma_0, ..., sigma_p); see sigma_probs in logistic.hpp.
inline Eigen::VectorXd sigma(const Eigen::VectorXd& g) {
  return sigma_probs(g);
}

struct SimulationResult {
  MarkedPattern thinned;                // colour 0, p-column marks
  std::vector<MarkedPattern> observed;  // index j-1 holds type j
};

SimulationResult simulate_mtsgcp(Rng& rng, const MtsgcpParams& params);

struct Priors {
  double a_lambda = 0.1, b_lambda = 0.1;
  double s_A = 1.0;
  double a_rho = 1.0, b_rho = 1.0;
  double m_mu = 0.0, s_mu = 3.0;

  void validate() const {
    require(a_lambda > 0 && b_lambda > 0 && s_A > 0 && a_rho > 0 && b_rho > 0 &&
                s_mu > 0,
            ErrorKind::kParameter, "prior hyperparameters must be positive");
  }

  // defaults with the rho rate scaled to the domain diameter
  static Priors default_for(const Domain& dom) {
    Priors pr;
    pr.b_rho = dom.diameter() / std::sqrt(2.0);
    return pr;
  }
};

struct GibbsControls {
  int bdm_steps = 20;  // per sweep: max(bdm_steps, current n_thinned)
  double move_scale_frac = 0.1;
  double hmc_eps = 0.15;
  int hmc_leapfrog = 10;
  bool hmc_autotune = true;  // burn-in only; frozen afterwards
  double rw_scale_A = 0.15;
  double rw_scale_log_rho = 0.25;
  int rho_every = 1;  // refactorization-heavy range updates every k-th sweep
  int thin = 1;
  bool store_thinned = false;  // keep thinned pattern + marks in the trace
  int grid_res = 0;            // accumulate intensity grids while sampling
  int grid_every = 10;
};

// Value snapshot of the full MCMC state.
struct GibbsState {
  MarkedPattern thinned;                // p-column marks
  std::vector<MarkedPattern> observed;  // p patterns with p-column marks
  double lambda = 1.0;
  LMCParams lmc;
};

// Reference evaluation of the joint density through the full LMC covariance
// matrix (the per-field fast path inside the sampler is tested against it):
// log[ exp(-lambda|S|) lambda^n / prod_k n_k! * N(g | mu, Sigma_LMC)
//      * prod_points sigma_{colour}(g) ].
// Factor row order: observed types 1..p, then thinned.
double log_joint_density_mt(const GibbsState& state, const Domain& dom);

// Sampler engine: persistent per-field factors, sequential sweeps of
// BDM -> HMC on g -> RW on A -> RW on rho -> conjugate mu -> conjugate lambda.
class GibbsSampler {
 public:
  GibbsSampler(const MtsgcpParams& initial, const GibbsState& state,
               Priors priors, GibbsControls controls);

  void sweep(Rng& rng, bool adapting);
  GibbsState snapshot() const;
  void reset_state(const GibbsState& state);

  double lambda() const { return engine_->lambda(); }
  LMCParams lmc() const;
  int n_thinned() const { return engine_->n_thinned(); }
  int n_total() const { return engine_->n_total(); }
  const ThinnedFieldState& engine() const { return *engine_; }
  ThinnedFieldState& engine() { return *engine_; }
  const std::vector<int>& types() const { return types_; }
  double hmc_eps() const { return controls_.hmc_eps; }

  struct Rates {
    long hmc_accept = 0, hmc_total = 0;
    long a_accept = 0, a_total = 0;
    long rho_accept = 0, rho_total = 0;
    long bdm_accept = 0, bdm_total = 0;
    long rejected_factorizations = 0;
  };
  const Rates& rates() const { return rates_; }

  // pieces reused by tests (finite-difference oracle) and the grid code
  double log_target_g() const;
  Eigen::MatrixXd grad_log_target_g() const;

 private:
  void hmc_update(Rng& rng);
  void a_update(Rng& rng);
  void rho_update(Rng& rng);
  void mu_update(Rng& rng);
  void lambda_update(Rng& rng);
  void adapt_hmc();

  Domain dom_;
  Priors priors_;
  GibbsControls controls_;
  std::vector<int> types_;  // per engine row: 1..p observed, 0 thinned
  std::unique_ptr<ThinnedFieldState> engine_;
  Rates rates_;
  long sweep_count_ = 0;
  long hmc_window_accept_ = 0, hmc_window_total_ = 0;
};

// One full sweep as a pure function of the state snapshot.
GibbsState gibbs_step(Rng& rng, const GibbsState& state, const Domain& dom,
                      const Priors& priors, const GibbsControls& controls);

struct TraceRecord {
  long iter = 0;
  double lambda = 0.0;
  Eigen::MatrixXd A;
  Eigen::VectorXd rho, mu;
  int n_thinned = 0;
  double log_joint = 0.0;
  std::optional<MarkedPattern> thinned;
  // g values at observed locations (type order), stored with the thinned
  // pattern so intensity grids can be recomputed from the trace
  std::optional<Eigen::MatrixXd> observed_g;
};

struct Trace {
  Domain dom = Domain::unit_square();
  int p = 1;
  std::uint64_t seed = 0;
  std::vector<MarkedPattern> observed;  // data echo, marks from last state
  std::vector<TraceRecord> records;
  // accumulated posterior-mean intensity grids (row-major res x res per type)
  int grid_res = 0;
  long grid_samples = 0;
  std::vector<Eigen::MatrixXd> intensity_grids;
};

// Full fit from observed locations (one pattern per type).
Trace fit(Rng& rng, const std::vector<PointPattern>& data,
          const MtsgcpParams& initial, const Priors& priors,
          const GibbsControls& controls, long n_iter, long n_burn);

// Posterior mean of lambda*sigma_j per pixel from stored thinned patterns
// (requires store_thinned traces); grids over res x res midpoints.
std::vector<Eigen::MatrixXd> posterior_intensity_grid(Rng& rng,
                                                      const Trace& trace,
                                                      int grid_res);

// ---------------------------------------------------------------------------
// Cross pair correlation function estimator

struct PcfEstimate {
  double gamma = 0.0;
  double se = 0.0;  // batch-means Monte Carlo error
};

// gamma_kl(r) for one parameter set: Monte Carlo over 2p-dimensional
// stationary LMC vectors at separation r, symmetrized in (s,t), marginal
// means estimated from the same draws. Independent of lambda by
// construction.
Eigen::MatrixXd pcf_single(Rng& rng, const LMCParams& lmc, double r, long n_mc);
PcfEstimate pcf_single_entry(Rng& rng, const LMCParams& lmc, double r, long n_mc,
                             int k, int l, int n_batches = 20);

struct PcfCurve {
  int k = 1, l = 1;  // 1-based type indices
  std::vector<double> mean, lo95, hi95;
};

struct PcfTable {
  std::vector<double> r;
  std::vector<PcfCurve> curves;  // pairs (k,l), k <= l
};

// Pointwise posterior PCF bands over parameter draws; embarrassingly
// parallel over draws.
PcfTable pcf(Rng& rng, const std::vector<LMCParams>& draws,
             const std::vector<double>& r_values, long n_mc);

// ---------------------------------------------------------------------------
// Geweke joint-distribution correctness test

struct GewekeConfig {
  MtsgcpParams base;  // dom + p used; lambda/lmc ignored (drawn from priors)
  Priors priors;
  GibbsControls controls;
  long n_samples = 5000;
  int thin = 10;
};

struct GewekeReport {
  long n_samples = 0;
  double p_lambda = 0.0, p_ntotal = 0.0, p_aat11 = 0.0;
  double fwd_mean_lambda = 0.0, sc_mean_lambda = 0.0;
  double fwd_mean_ntotal = 0.0, sc_mean_ntotal = 0.0;
  double fwd_mean_aat11 = 0.0, sc_mean_aat11 = 0.0;
  std::uint64_t seed = 0;
};

GewekeReport geweke_test(Rng& rng, const GewekeConfig& config);

// Draw model parameters from the priors (shared by geweke and tests).
MtsgcpParams draw_params_from_priors(Rng& rng, const Domain& dom, int p,
                                     const Priors& priors);

}  // namespace coxthin::mtsgcp
