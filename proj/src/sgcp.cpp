#include "coxthin/sgcp.hpp"

#include <cmath>

#include "coxthin/parallel.hpp"
#include "coxthin/stats.hpp"

namespace coxthin::sgcp {

namespace {

MarkedPattern with_marks(Eigen::MatrixXd locations, Eigen::VectorXd marks,
                         int colour) {
  const int n = static_cast<int>(locations.rows());
  Eigen::MatrixXd mark_mat(n, 1);
  mark_mat.col(0) = marks;
  return MarkedPattern(std::move(locations), std::nullopt, std::move(mark_mat),
                       Eigen::VectorXi::Constant(n, colour));
}

Eigen::VectorXd scalar_marks(const MarkedPattern& pattern) {
  if (pattern.empty()) return Eigen::VectorXd(0);
  require(pattern.has_gp_marks() && pattern.gp_marks().cols() == 1,
          ErrorKind::kStructural, "pattern needs scalar gp marks");
  return pattern.gp_marks().col(0);
}

LatentFieldModel univariate_model(const SgcpParams& params) {
  LatentFieldModel m;
  m.kernels = {params.kernel};
  m.A = Eigen::MatrixXd::Identity(1, 1);
  m.mu = Eigen::VectorXd::Constant(1, params.gp_mean);
  return m;
}

}  // namespace

AugmentedState make_augmented(const SgcpParams& params, MarkedPattern thinned,
                              MarkedPattern observed) {
  params.validate();
  const int n0 = thinned.size(), n1 = observed.size();
  Eigen::MatrixXd locs(n1 + n0, params.dom.dim());
  if (n1 > 0) locs.topRows(n1) = observed.locations();
  if (n0 > 0) locs.bottomRows(n0) = thinned.locations();
  auto model =
      std::make_shared<KernelCovariance>(params.kernel, params.gp_mean);
  AugmentedState state{std::move(thinned), std::move(observed),
                       CholeskyState::build(model, std::move(locs))};
  return state;
}

SimulationResult simulate_sgcp(Rng& rng, const SgcpParams& params) {
  params.validate();
  PointPattern base = sample_homogeneous_ppp(rng, params.dom, params.lambda);
  const int n = base.size();
  auto model = std::make_shared<KernelCovariance>(params.kernel, params.gp_mean);
  CholeskyState chol = CholeskyState::build(model, base.points());
  Eigen::VectorXd g =
      Eigen::VectorXd::Constant(n, params.gp_mean) +
      chol.lower() * rng.normal_vector(n);

  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    if (rng.uniform() < expit(g[i])) keep.push_back(i);
  }
  Eigen::MatrixXd obs_locs(static_cast<int>(keep.size()), params.dom.dim());
  Eigen::VectorXd obs_g(static_cast<int>(keep.size()));
  Eigen::MatrixXd thin_locs(n - static_cast<int>(keep.size()), params.dom.dim());
  Eigen::VectorXd thin_g(n - static_cast<int>(keep.size()));
  int io = 0, it = 0;
  for (int i = 0; i < n; ++i) {
    bool kept = io < static_cast<int>(keep.size()) && keep[io] == i;
    if (kept) {
      obs_locs.row(io) = base.points().row(i);
      obs_g[io] = g[i];
      ++io;
    } else {
      thin_locs.row(it) = base.points().row(i);
      thin_g[it] = g[i];
      ++it;
    }
  }
  return SimulationResult{with_marks(std::move(thin_locs), thin_g, 0),
                          with_marks(std::move(obs_locs), obs_g, 1)};
}

double log_joint_density(const AugmentedState& state, const SgcpParams& params) {
  params.validate();
  const int n0 = state.thinned.size(), n1 = state.observed.size();
  require(state.chol.n_locations() == n0 + n1, ErrorKind::kStructural,
          "factor does not cover all locations");
  const double lambda_vol = params.lambda * params.dom.volume();

  Eigen::VectorXd g(n0 + n1);
  if (n1 > 0) g.head(n1) = scalar_marks(state.observed);
  if (n0 > 0) g.tail(n0) = scalar_marks(state.thinned);

  double lp = -lambda_vol + (n0 + n1) * std::log(params.lambda) -
              log_factorial(n0) - log_factorial(n1);
  lp += mvn_logpdf(g, Eigen::VectorXd::Constant(n0 + n1, params.gp_mean),
                   state.chol);
  for (int i = 0; i < n1; ++i) lp += log_expit(g[i]);
  for (int i = 0; i < n0; ++i) lp += log_one_minus_expit(g[n1 + i]);
  return lp;
}

double log_conditional_density_unnorm(const MarkedPattern& thinned,
                                      const MarkedPattern& observed,
                                      const SgcpParams& params) {
  params.validate();
  AugmentedState state = make_augmented(params, thinned, observed);
  const int n0 = thinned.size(), n1 = observed.size();
  Eigen::VectorXd g(n0 + n1);
  if (n1 > 0) g.head(n1) = scalar_marks(observed);
  if (n0 > 0) g.tail(n0) = scalar_marks(thinned);
  double lp = n0 * std::log(params.lambda) - log_factorial(n0);
  lp += mvn_logpdf(g, Eigen::VectorXd::Constant(n0 + n1, params.gp_mean),
                   state.chol);
  for (int i = 0; i < n0; ++i) lp += log_one_minus_expit(g[n1 + i]);
  return lp;
}

ThinnedFieldState make_thinned_chain(const SgcpParams& params,
                                     const MarkedPattern& observed) {
  params.validate();
  Eigen::MatrixXd obs_locs = observed.empty()
                                 ? Eigen::MatrixXd(0, params.dom.dim())
                                 : observed.locations();
  Eigen::MatrixXd obs_g(observed.size(), 1);
  if (!observed.empty()) obs_g.col(0) = scalar_marks(observed);
  auto log_keep = [](const Eigen::VectorXd& g) {
    return log_one_minus_expit(g[0]);
  };
  return ThinnedFieldState(params.dom, params.lambda, univariate_model(params),
                           obs_locs, obs_g, log_keep);
}

AugmentedState bdm_step(Rng& rng, const AugmentedState& state,
                        const SgcpParams& params, const MoveProbs& probs,
                        double move_scale) {
  if (move_scale < 0.0) move_scale = 0.1 * params.dom.diameter();
  ThinnedFieldState chain = make_thinned_chain(params, state.observed);
  if (!state.thinned.empty()) {
    Eigen::MatrixXd g(state.thinned.size(), 1);
    g.col(0) = scalar_marks(state.thinned);
    chain.set_thinned(state.thinned.locations(), g);
  }
  chain.bdm_step(rng, probs, move_scale);
  return make_augmented(
      params, with_marks(chain.thinned_locations(), chain.thinned_g().col(0), 0),
      state.observed);
}

std::vector<MarkedPattern> sample_conditional_bdm(
    Rng& rng, const MarkedPattern& observed, const SgcpParams& params,
    int n_sweeps, int steps_per_sweep, int burn_sweeps, const MoveProbs& probs) {
  require(n_sweeps >= 0 && steps_per_sweep >= 1, ErrorKind::kParameter,
          "bad sweep configuration");
  const double move_scale = 0.1 * params.dom.diameter();
  ThinnedFieldState chain = make_thinned_chain(params, observed);
  std::vector<MarkedPattern> samples;
  samples.reserve(n_sweeps);
  for (int s = 0; s < burn_sweeps + n_sweeps; ++s) {
    for (int k = 0; k < steps_per_sweep; ++k) {
      chain.bdm_step(rng, probs, move_scale);
    }
    if (s >= burn_sweeps) {
      samples.push_back(
          with_marks(chain.thinned_locations(), chain.thinned_g().col(0), 0));
    }
  }
  return samples;
}

MarkedPattern sample_conditional_flawed_rao(Rng& rng,
                                            const MarkedPattern& observed,
                                            const SgcpParams& params) {
  params.validate();
  PointPattern base = sample_homogeneous_ppp(rng, params.dom, params.lambda);
  auto model = std::make_shared<KernelCovariance>(params.kernel, params.gp_mean);
  Eigen::MatrixXd obs_locs = observed.empty()
                                 ? Eigen::MatrixXd(0, params.dom.dim())
                                 : observed.locations();
  CholeskyState obs_state = CholeskyState::build(model, obs_locs);
  Eigen::VectorXd obs_g(observed.size());
  if (!observed.empty()) obs_g = scalar_marks(observed);

  ConditionalGaussian cond = conditional_gaussian(obs_state, obs_g, base.points());
  Eigen::VectorXd g = sample_mvn(rng, cond.mean, cond.cov);

  std::vector<int> keep;
  for (int i = 0; i < base.size(); ++i) {
    if (rng.uniform() < 1.0 - expit(g[i])) keep.push_back(i);
  }
  Eigen::MatrixXd locs(static_cast<int>(keep.size()), params.dom.dim());
  Eigen::VectorXd marks(static_cast<int>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    locs.row(static_cast<int>(k)) = base.points().row(keep[k]);
    marks[static_cast<int>(k)] = g[keep[k]];
  }
  return with_marks(std::move(locs), marks, 0);
}

MarkedPattern sample_conditional_flawed_goncalves(Rng& rng,
                                                  const MarkedPattern& observed,
                                                  const SgcpParams& params,
                                                  long rejection_cap) {
  params.validate();
  require(std::abs(params.dom.volume() - 1.0) < 1e-12, ErrorKind::kParameter,
          "count-then-scatter sampler is implemented on unit-volume domains "
          "only (the Poisson(lambda) count reading is dimensionless)");
  const int n0 = rng.poisson(params.lambda);
  auto model = std::make_shared<KernelCovariance>(params.kernel, params.gp_mean);
  Eigen::MatrixXd obs_locs = observed.empty()
                                 ? Eigen::MatrixXd(0, params.dom.dim())
                                 : observed.locations();
  CholeskyState obs_state = CholeskyState::build(model, obs_locs);
  Eigen::VectorXd obs_g(observed.size());
  if (!observed.empty()) obs_g = scalar_marks(observed);

  if (n0 == 0) return with_marks(Eigen::MatrixXd(0, params.dom.dim()), {}, 0);

  // rejection scatter: propose locations uniformly with marks from the GP
  // conditional on the observed values; accept with prod (1-expit), which the
  // envelope bounds by 1
  for (long attempt = 0; attempt < rejection_cap; ++attempt) {
    Eigen::MatrixXd locs(n0, params.dom.dim());
    for (int i = 0; i < n0; ++i) {
      for (int c = 0; c < params.dom.dim(); ++c) {
        locs(i, c) = rng.uniform(params.dom.lower()[c], params.dom.upper()[c]);
      }
    }
    ConditionalGaussian cond = conditional_gaussian(obs_state, obs_g, locs);
    Eigen::VectorXd g = sample_mvn(rng, cond.mean, cond.cov);
    double log_accept = 0.0;
    for (int i = 0; i < n0; ++i) log_accept += log_one_minus_expit(g[i]);
    if (std::log(rng.uniform()) < log_accept) {
      return with_marks(std::move(locs), g, 0);
    }
  }
  throw Error(ErrorKind::kSampling,
              "rejection cap exceeded in count-then-scatter sampler");
}

double ripley_k(const Eigen::MatrixXd& pts, double r, double volume) {
  const long n = pts.rows();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  long pairs = 0;
  for (long i = 0; i < n; ++i) {
    for (long j = i + 1; j < n; ++j) {
      if ((pts.row(i) - pts.row(j)).norm() <= r) ++pairs;
    }
  }
  return volume * 2.0 * static_cast<double>(pairs) /
         (static_cast<double>(n) * static_cast<double>(n - 1));
}

AppendixBReport verify_appendix_b(Rng& rng, const SgcpParams& params,
                                  long n_reps, int grid_res) {
  params.validate();
  AppendixBReport report;
  report.n_reps = n_reps;
  report.grid_res = grid_res;
  report.lambda_vol = params.lambda * params.dom.volume();
  report.seed = rng.seed();

  const double min_side = (params.dom.upper() - params.dom.lower()).minCoeff();
  report.k_radii = {0.05 * min_side, 0.1 * min_side, 0.2 * min_side};
  const int n_radii = static_cast<int>(report.k_radii.size());

  // side 1: generative simulation
  std::vector<int> counts_alg1(n_reps);
  Eigen::MatrixXd k_alg1(n_reps, n_radii);
  Rng side1 = rng.substream(1);
  parallel_reps(n_reps, [&](std::int64_t r) {
    Rng local = side1.substream(static_cast<std::uint64_t>(r));
    SimulationResult sim = simulate_sgcp(local, params);
    counts_alg1[r] = sim.observed.size();
    for (int q = 0; q < n_radii; ++q) {
      k_alg1(r, q) = ripley_k(sim.observed.locations(), report.k_radii[q],
                              params.dom.volume());
    }
  });

  // side 2: direct Cox simulation on a grid-sampled field (independent
  // oracle; circulant-embedding sampler, piecewise-constant intensity)
  GridGpSampler grid(params.dom, grid_res, params.kernel);
  report.clipped_spectral_mass = grid.clipped_mass();
  std::vector<int> counts_grid(n_reps);
  Eigen::MatrixXd k_grid(n_reps, n_radii);
  Rng side2 = rng.substream(2);
  const long n_pairs = (n_reps + 1) / 2;
  parallel_reps(n_pairs, [&](std::int64_t pair) {
    Rng local = side2.substream(static_cast<std::uint64_t>(pair));
    Eigen::VectorXd fields[2];
    grid.draw_pair(local, fields[0], fields[1]);
    for (int half = 0; half < 2; ++half) {
      const long rep = 2 * pair + half;
      if (rep >= n_reps) break;
      Eigen::VectorXd weights(grid.n_cells());
      double mass = 0.0;
      for (long c = 0; c < grid.n_cells(); ++c) {
        weights[c] = expit(params.gp_mean + fields[half][c]);
        mass += weights[c];
      }
      mass *= grid.cell_measure();
      int n = local.poisson(params.lambda * mass);
      counts_grid[rep] = n;
      Eigen::MatrixXd pts(n, params.dom.dim());
      const double half_w = 0.5;  // uniform offset within the cell
      for (int i = 0; i < n; ++i) {
        long cell = local.categorical(weights);
        for (int c = 0; c < params.dom.dim(); ++c) {
          double lo = grid.cell_centers()(cell, c);
          double side = (params.dom.upper()[c] - params.dom.lower()[c]) / grid_res;
          pts(i, c) = lo + side * (local.uniform() - half_w);
        }
      }
      for (int q = 0; q < n_radii; ++q) {
        k_grid(rep, q) = ripley_k(pts, report.k_radii[q], params.dom.volume());
      }
    }
  });

  std::vector<long> hist1 = stats::count_histogram(counts_alg1);
  std::vector<long> hist2 = stats::count_histogram(counts_grid);
  stats::pad_to_common_size(hist1, hist2);
  report.count_chisq_p = stats::chisq_two_sample(hist1, hist2).p_value;
  double m1 = 0, m2 = 0;
  for (long r = 0; r < n_reps; ++r) {
    m1 += counts_alg1[r];
    m2 += counts_grid[r];
  }
  report.count_mean_alg1 = m1 / n_reps;
  report.count_mean_grid = m2 / n_reps;

  for (int q = 0; q < n_radii; ++q) {
    std::vector<double> a, b;
    for (long r = 0; r < n_reps; ++r) {
      if (std::isfinite(k_alg1(r, q))) a.push_back(k_alg1(r, q));
      if (std::isfinite(k_grid(r, q))) b.push_back(k_grid(r, q));
    }
    report.k_ks_p.push_back(stats::ks_two_sample(a, b).p_value);
  }
  return report;
}

AppendixCReport verify_appendix_c(Rng& rng, const SgcpParams& params,
                                  const AppendixCConfig& config) {
  params.validate();
  require(params.gp_mean == 0.0, ErrorKind::kParameter,
          "the symmetry identity needs a zero-mean field");
  AppendixCReport report;
  report.n_gp_draws = config.n_gp_draws;
  report.grid_res = config.grid_res;
  report.lambda_vol = params.lambda * params.dom.volume();
  report.seed = rng.seed();

  // (i)+(ii): Monte Carlo over grid GP draws
  GridGpSampler grid(params.dom, config.grid_res, params.kernel);
  std::vector<double> exp_neg(config.n_gp_draws);
  std::vector<double> neg_integral(config.n_gp_draws);
  Rng gp_stream = rng.substream(11);
  const long n_pairs = (config.n_gp_draws + 1) / 2;
  parallel_reps(n_pairs, [&](std::int64_t pair) {
    Rng local = gp_stream.substream(static_cast<std::uint64_t>(pair));
    Eigen::VectorXd fields[2];
    grid.draw_pair(local, fields[0], fields[1]);
    for (int half = 0; half < 2; ++half) {
      const long rep = 2 * pair + half;
      if (rep >= config.n_gp_draws) break;
      double integral = 0.0;
      for (long c = 0; c < grid.n_cells(); ++c) integral += expit(fields[half][c]);
      integral *= grid.cell_measure();
      neg_integral[rep] = -params.lambda * integral;
      exp_neg[rep] = std::exp(-params.lambda * integral);
    }
  });
  stats::MeanSe ms_exp = stats::mean_se(exp_neg);
  stats::MeanSe ms_int = stats::mean_se(neg_integral);
  report.mean_exp_neg = ms_exp.mean;
  report.se_exp_neg = ms_exp.se;
  report.jensen_bound = std::exp(-report.lambda_vol / 2.0);
  report.jensen_gap_in_se = (ms_exp.mean - report.jensen_bound) / ms_exp.se;
  report.mean_neg_integral = ms_int.mean;
  report.se_neg_integral = ms_int.se;
  report.identity_target = -report.lambda_vol / 2.0;
  report.identity_gap_in_se =
      (ms_int.mean - report.identity_target) / ms_int.se;

  // (iii): P(thinned empty | observed empty) under the correct chain and the
  // flawed thinning sampler
  MarkedPattern empty_observed;
  report.n_bdm_sweeps = config.n_bdm_sweeps;
  report.n_rao_draws = config.n_rao_draws;
  {
    Rng chain_rng = rng.substream(21);
    ThinnedFieldState chain = make_thinned_chain(params, empty_observed);
    const double move_scale = 0.1 * params.dom.diameter();
    std::vector<double> empties;
    empties.reserve(config.n_bdm_sweeps);
    for (long s = 0; s < config.bdm_burn + config.n_bdm_sweeps; ++s) {
      for (int k = 0; k < config.steps_per_sweep; ++k) {
        chain.bdm_step(chain_rng, MoveProbs{}, move_scale);
      }
      if (s >= config.bdm_burn) {
        empties.push_back(chain.n_thinned() == 0 ? 1.0 : 0.0);
      }
    }
    stats::MeanSe ms = stats::batch_means(empties);
    report.bdm_empty_prob = ms.mean;
    report.bdm_empty_se = ms.se;
  }
  {
    Rng rao_stream = rng.substream(22);
    std::vector<double> empties(config.n_rao_draws);
    parallel_reps(config.n_rao_draws, [&](std::int64_t r) {
      Rng local = rao_stream.substream(static_cast<std::uint64_t>(r));
      MarkedPattern draw =
          sample_conditional_flawed_rao(local, empty_observed, params);
      empties[r] = draw.empty() ? 1.0 : 0.0;
    });
    stats::MeanSe ms = stats::mean_se(empties);
    report.rao_empty_prob = ms.mean;
    report.rao_empty_se = ms.se;
  }
  double combined_se = std::sqrt(report.bdm_empty_se * report.bdm_empty_se +
                                 report.rao_empty_se * report.rao_empty_se);
  report.diff_in_se = (report.rao_empty_prob - report.bdm_empty_prob) / combined_se;
  return report;
}

SamplerComparisonReport compare_samplers_empty(Rng& rng, const SgcpParams& params,
                                               long n_draws, long n_bdm_sweeps,
                                               long bdm_burn,
                                               int steps_per_sweep) {
  params.validate();
  SamplerComparisonReport report;
  report.n_draws = n_draws;
  report.n_bdm_sweeps = n_bdm_sweeps;
  report.seed = rng.seed();
  MarkedPattern empty_observed;

  // BDM stationary sample of the true conditional
  std::vector<double> bdm_empty;
  std::vector<int> bdm_counts;
  bdm_empty.reserve(n_bdm_sweeps);
  bdm_counts.reserve(n_bdm_sweeps);
  {
    Rng chain_rng = rng.substream(31);
    ThinnedFieldState chain = make_thinned_chain(params, empty_observed);
    const double move_scale = 0.1 * params.dom.diameter();
    for (long s = 0; s < bdm_burn + n_bdm_sweeps; ++s) {
      for (int k = 0; k < steps_per_sweep; ++k) {
        chain.bdm_step(chain_rng, MoveProbs{}, move_scale);
      }
      if (s >= bdm_burn) {
        bdm_empty.push_back(chain.n_thinned() == 0 ? 1.0 : 0.0);
        bdm_counts.push_back(chain.n_thinned());
      }
    }
  }
  stats::MeanSe bdm_ms = stats::batch_means(bdm_empty);
  report.bdm_empty_prob = bdm_ms.mean;
  report.bdm_empty_se = bdm_ms.se;

  // flawed thinning sampler (i.i.d.) and the generative thinned marginal
  std::vector<double> rao_empty(n_draws);
  std::vector<int> rao_counts(n_draws), marginal_counts(n_draws), gonc_counts(n_draws);
  Rng rao_stream = rng.substream(32);
  parallel_reps(n_draws, [&](std::int64_t r) {
    Rng local = rao_stream.substream(static_cast<std::uint64_t>(r));
    MarkedPattern draw = sample_conditional_flawed_rao(local, empty_observed, params);
    rao_empty[r] = draw.empty() ? 1.0 : 0.0;
    rao_counts[r] = draw.size();
  });
  Rng marg_stream = rng.substream(33);
  parallel_reps(n_draws, [&](std::int64_t r) {
    Rng local = marg_stream.substream(static_cast<std::uint64_t>(r));
    marginal_counts[r] = simulate_sgcp(local, params).thinned.size();
  });
  Rng gonc_stream = rng.substream(34);
  parallel_reps(n_draws, [&](std::int64_t r) {
    Rng local = gonc_stream.substream(static_cast<std::uint64_t>(r));
    gonc_counts[r] =
        sample_conditional_flawed_goncalves(local, empty_observed, params).size();
  });

  stats::MeanSe rao_ms = stats::mean_se(rao_empty);
  report.rao_empty_prob = rao_ms.mean;
  report.rao_empty_se = rao_ms.se;
  double combined = std::sqrt(bdm_ms.se * bdm_ms.se + rao_ms.se * rao_ms.se);
  report.diff_in_se = (rao_ms.mean - bdm_ms.mean) / combined;

  std::vector<long> h_rao = stats::count_histogram(rao_counts);
  std::vector<long> h_marg = stats::count_histogram(marginal_counts);
  stats::pad_to_common_size(h_rao, h_marg);
  report.rao_vs_marginal_count_p = stats::chisq_two_sample(h_rao, h_marg).p_value;

  std::vector<long> h_gonc = stats::count_histogram(gonc_counts);
  std::vector<double> poisson_pmf(h_gonc.size() + 1);
  {
    double tail = 1.0;
    for (size_t k = 0; k < h_gonc.size(); ++k) {
      poisson_pmf[k] = std::exp(-params.lambda + k * std::log(params.lambda) -
                                log_factorial(static_cast<int>(k)));
      tail -= poisson_pmf[k];
    }
    poisson_pmf.back() = std::max(0.0, tail);
  }
  std::vector<long> h_gonc_padded = h_gonc;
  h_gonc_padded.push_back(0);
  report.gonc_vs_poisson_gof_p =
      stats::chisq_gof(h_gonc_padded, poisson_pmf).p_value;

  std::vector<long> h_bdm = stats::count_histogram(bdm_counts);
  std::vector<long> h_gonc2 = stats::count_histogram(gonc_counts);
  stats::pad_to_common_size(h_bdm, h_gonc2);
  report.gonc_vs_bdm_count_p = stats::chisq_two_sample(h_bdm, h_gonc2).p_value;

  auto mean_int = [](const std::vector<int>& v) {
    double s = 0;
    for (int x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  report.bdm_mean_count = mean_int(bdm_counts);
  report.gonc_mean_count = mean_int(gonc_counts);
  report.rao_mean_count = mean_int(rao_counts);
  return report;
}

}  // namespace coxthin::sgcp
