#include "coxthin/mtsgcp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coxthin/gaussian.hpp"
#include "coxthin/parallel.hpp"
#include "coxthin/stats.hpp"

namespace coxthin::mtsgcp {

namespace {

LatentFieldModel field_model_from(const LMCParams& lmc) {
  LatentFieldModel m;
  m.kernels.reserve(lmc.p());
  for (int j = 0; j < lmc.p(); ++j) m.kernels.emplace_back(lmc.rho[j], 1.0);
  m.A = lmc.A;
  m.mu = lmc.mu;
  return m;
}

LMCParams lmc_from_model(const LatentFieldModel& m) {
  Eigen::VectorXd rho(m.p());
  for (int j = 0; j < m.p(); ++j) rho[j] = m.kernels[j].rho;
  return LMCParams(m.A, rho, m.mu);
}

double log_keep_sigma0(const Eigen::VectorXd& g) { return log_sigma(g, 0); }

MarkedPattern typed_pattern(Eigen::MatrixXd locs, Eigen::MatrixXd marks,
                            int colour) {
  const int n = static_cast<int>(locs.rows());
  return MarkedPattern(std::move(locs), std::nullopt, std::move(marks),
                       Eigen::VectorXi::Constant(n, colour));
}

}  // namespace

SimulationResult simulate_mtsgcp(Rng& rng, const MtsgcpParams& params) {
  params.validate();
  const int p = params.p();
  PointPattern base = sample_homogeneous_ppp(rng, params.dom, params.lambda);
  const int n = base.size();

  // per-field draws of the independent unit fields, then g = A w + mu
  Eigen::MatrixXd w(n, p);
  for (int j = 0; j < p; ++j) {
    auto model = std::make_shared<KernelCovariance>(Kernel(params.lmc.rho[j], 1.0));
    CholeskyState chol = CholeskyState::build(model, base.points());
    w.col(j) = chol.lower() * rng.normal_vector(n);
  }
  Eigen::MatrixXd g = w * params.lmc.A.transpose();
  g.rowwise() += params.lmc.mu.transpose();

  std::vector<int> colour(n);
  for (int i = 0; i < n; ++i) {
    colour[i] = rng.categorical(sigma_probs(g.row(i).transpose()));
  }

  SimulationResult out;
  for (int k = 0; k <= p; ++k) {
    std::vector<int> rows;
    for (int i = 0; i < n; ++i) {
      if (colour[i] == k) rows.push_back(i);
    }
    Eigen::MatrixXd locs(static_cast<int>(rows.size()), params.dom.dim());
    Eigen::MatrixXd marks(static_cast<int>(rows.size()), p);
    for (size_t q = 0; q < rows.size(); ++q) {
      locs.row(static_cast<int>(q)) = base.points().row(rows[q]);
      marks.row(static_cast<int>(q)) = g.row(rows[q]);
    }
    if (k == 0) {
      out.thinned = typed_pattern(std::move(locs), std::move(marks), 0);
    } else {
      out.observed.push_back(typed_pattern(std::move(locs), std::move(marks), k));
    }
  }
  return out;
}

double log_joint_density_mt(const GibbsState& state, const Domain& dom) {
  const int p = state.lmc.p();
  require(static_cast<int>(state.observed.size()) == p, ErrorKind::kStructural,
          "observed pattern list must have length p");
  int n = state.thinned.size();
  std::vector<int> counts{state.thinned.size()};
  for (const auto& pat : state.observed) {
    n += pat.size();
    counts.push_back(pat.size());
  }

  Eigen::MatrixXd locs(n, dom.dim());
  Eigen::VectorXd g(static_cast<long>(n) * p);
  std::vector<int> type_of(n);
  int row = 0;
  auto push = [&](const MarkedPattern& pat, int type) {
    for (int i = 0; i < pat.size(); ++i, ++row) {
      locs.row(row) = pat.locations().row(i);
      g.segment(static_cast<long>(row) * p, p) = pat.gp_marks().row(i).transpose();
      type_of[row] = type;
    }
  };
  for (int j = 0; j < p; ++j) push(state.observed[j], j + 1);
  push(state.thinned, 0);

  double lp = -state.lambda * dom.volume() + n * std::log(state.lambda);
  for (int c : counts) lp -= log_factorial(c);
  if (n > 0) {
    auto model = std::make_shared<LmcCovariance>(state.lmc);
    CholeskyState chol = CholeskyState::build(model, locs);
    lp += mvn_logpdf(g, model->mean(n), chol);
    for (int i = 0; i < n; ++i) {
      lp += log_sigma(g.segment(static_cast<long>(i) * p, p), type_of[i]);
    }
  }
  return lp;
}

// ---------------------------------------------------------------------------

GibbsSampler::GibbsSampler(const MtsgcpParams& initial, const GibbsState& state,
                           Priors priors, GibbsControls controls)
    : dom_(initial.dom), priors_(priors), controls_(controls) {
  priors_.validate();
  reset_state(state);
}

void GibbsSampler::reset_state(const GibbsState& state) {
  const int p = state.lmc.p();
  require(static_cast<int>(state.observed.size()) == p, ErrorKind::kStructural,
          "observed pattern list must have length p");
  int n_obs = 0;
  for (const auto& pat : state.observed) n_obs += pat.size();
  Eigen::MatrixXd obs_locs(n_obs, dom_.dim());
  Eigen::MatrixXd obs_g(n_obs, p);
  types_.assign(n_obs, 0);
  int row = 0;
  for (int j = 0; j < p; ++j) {
    const MarkedPattern& pat = state.observed[j];
    for (int i = 0; i < pat.size(); ++i, ++row) {
      obs_locs.row(row) = pat.locations().row(i);
      obs_g.row(row) = pat.gp_marks().row(i);
      types_[row] = j + 1;
    }
  }
  engine_ = std::make_unique<ThinnedFieldState>(
      dom_, state.lambda, field_model_from(state.lmc), obs_locs, obs_g,
      log_keep_sigma0);
  if (!state.thinned.empty()) {
    engine_->set_thinned(state.thinned.locations(), state.thinned.gp_marks());
  }
}

LMCParams GibbsSampler::lmc() const { return lmc_from_model(engine_->field_model()); }

GibbsState GibbsSampler::snapshot() const {
  const int p = engine_->p();
  GibbsState state;
  state.lambda = engine_->lambda();
  state.lmc = lmc();
  state.thinned =
      typed_pattern(engine_->thinned_locations(), engine_->thinned_g(), 0);
  const int n_obs = engine_->n_obs();
  for (int j = 1; j <= p; ++j) {
    std::vector<int> rows;
    for (int r = 0; r < n_obs; ++r) {
      if (types_[r] == j) rows.push_back(r);
    }
    Eigen::MatrixXd locs(static_cast<int>(rows.size()), dom_.dim());
    Eigen::MatrixXd marks(static_cast<int>(rows.size()), p);
    for (size_t q = 0; q < rows.size(); ++q) {
      locs.row(static_cast<int>(q)) = engine_->locations().row(rows[q]);
      marks.row(static_cast<int>(q)) = engine_->g_values().row(rows[q]);
    }
    state.observed.push_back(typed_pattern(std::move(locs), std::move(marks), j));
  }
  return state;
}

double GibbsSampler::log_target_g() const {
  double lp = engine_->log_gaussian_density();
  const int n = engine_->n_total();
  for (int i = 0; i < n; ++i) {
    int type = i < engine_->n_obs() ? types_[i] : 0;
    lp += log_sigma(engine_->g_values().row(i).transpose(), type);
  }
  return lp;
}

Eigen::MatrixXd GibbsSampler::grad_log_target_g() const {
  const int n = engine_->n_total();
  const int p = engine_->p();
  Eigen::MatrixXd grad = engine_->gaussian_gradient();
  for (int i = 0; i < n; ++i) {
    int type = i < engine_->n_obs() ? types_[i] : 0;
    Eigen::VectorXd probs = sigma_probs(engine_->g_values().row(i).transpose());
    for (int k = 1; k <= p; ++k) {
      grad(i, k - 1) += (type == k ? 1.0 : 0.0) - probs[k];
    }
  }
  return grad;
}

void GibbsSampler::hmc_update(Rng& rng) {
  rates_.hmc_total += 1;
  hmc_window_total_ += 1;
  const int n = engine_->n_total();
  const int p = engine_->p();
  if (n == 0) {
    rates_.hmc_accept += 1;
    hmc_window_accept_ += 1;
    return;
  }
  const double eps = controls_.hmc_eps;
  const Eigen::MatrixXd q0 = engine_->g_values();
  Eigen::MatrixXd momentum(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) momentum(i, j) = rng.normal();
  }
  const double h0 = -log_target_g() + 0.5 * momentum.squaredNorm();

  Eigen::MatrixXd q = q0;
  momentum += 0.5 * eps * grad_log_target_g();
  for (int l = 0; l < controls_.hmc_leapfrog; ++l) {
    q += eps * momentum;
    engine_->set_g(q);
    if (l + 1 < controls_.hmc_leapfrog) {
      momentum += eps * grad_log_target_g();
    }
  }
  momentum += 0.5 * eps * grad_log_target_g();
  const double h1 = -log_target_g() + 0.5 * momentum.squaredNorm();

  if (std::log(rng.uniform()) < h0 - h1) {
    rates_.hmc_accept += 1;
    hmc_window_accept_ += 1;
  } else {
    engine_->set_g(q0);
  }
}

void GibbsSampler::a_update(Rng& rng) {
  const int p = engine_->p();
  const double s2 = priors_.s_A * priors_.s_A;
  double current_lp = engine_->log_gaussian_density();
  for (int k = 0; k < p; ++k) {
    for (int l = 0; l < p; ++l) {
      rates_.a_total += 1;
      Eigen::MatrixXd a_old = engine_->field_model().A;
      Eigen::VectorXd mu = engine_->field_model().mu;
      Eigen::MatrixXd a_new = a_old;
      a_new(k, l) += controls_.rw_scale_A * rng.normal();
      if (std::abs(a_new.determinant()) < 1e-12) continue;
      engine_->set_transform(a_new, mu);
      double proposed_lp = engine_->log_gaussian_density();
      double log_r = proposed_lp - current_lp -
                     (a_new(k, l) * a_new(k, l) - a_old(k, l) * a_old(k, l)) /
                         (2.0 * s2);
      if (std::log(rng.uniform()) < log_r) {
        current_lp = proposed_lp;
        rates_.a_accept += 1;
      } else {
        engine_->set_transform(a_old, mu);
      }
    }
  }
}

void GibbsSampler::rho_update(Rng& rng) {
  const int p = engine_->p();
  for (int j = 0; j < p; ++j) {
    rates_.rho_total += 1;
    const double rho_old = engine_->field_model().kernels[j].rho;
    const double rho_new = rho_old * std::exp(controls_.rw_scale_log_rho * rng.normal());
    Kernel cand_kernel(rho_new, 1.0);
    Eigen::MatrixXd cand_lower;
    try {
      cand_lower = engine_->build_field_lower(cand_kernel);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kNumeric) {
        rates_.rejected_factorizations += 1;
        continue;  // proposal rejected, never a crash
      }
      throw;
    }
    // gamma prior plus the log-scale proposal Jacobian
    double log_r = engine_->field_log_gaussian_with(j, cand_lower) -
                   engine_->field_log_gaussian(j) +
                   priors_.a_rho * (std::log(rho_new) - std::log(rho_old)) -
                   priors_.b_rho * (rho_new - rho_old);
    if (std::log(rng.uniform()) < log_r) {
      engine_->adopt_kernel(j, cand_kernel, cand_lower);
      rates_.rho_accept += 1;
    }
  }
}

void GibbsSampler::mu_update(Rng& rng) {
  const int p = engine_->p();
  const long n = engine_->n_total();
  const double prior_prec = 1.0 / (priors_.s_mu * priors_.s_mu);
  Eigen::MatrixXd precision =
      prior_prec * Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd linear =
      prior_prec * priors_.m_mu * Eigen::VectorXd::Ones(p);
  if (n > 0) {
    const Eigen::MatrixXd b_mat = engine_->field_model().A.inverse();
    const Eigen::MatrixXd& g = engine_->g_values();
    for (int j = 0; j < p; ++j) {
      Eigen::VectorXd ones_solved = engine_->field_solve(j, Eigen::VectorXd::Ones(n));
      Eigen::VectorXd b_j = b_mat.row(j).transpose();
      Eigen::VectorXd gb = g * b_j;
      Eigen::VectorXd gb_solved = engine_->field_solve(j, gb);
      double s_j = ones_solved.squaredNorm();        // 1^T K_j^{-1} 1
      double c_j = ones_solved.dot(gb_solved);       // 1^T K_j^{-1} (G b_j)
      precision += s_j * (b_j * b_j.transpose());
      linear += c_j * b_j;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  require(llt.info() == Eigen::Success, ErrorKind::kNumeric,
          "mu full-conditional precision not PD");
  Eigen::VectorXd mean = llt.solve(linear);
  Eigen::MatrixXd lower = llt.matrixL();
  Eigen::VectorXd z = rng.normal_vector(p);
  Eigen::VectorXd mu_new =
      mean + lower.transpose().triangularView<Eigen::Upper>().solve(z);
  engine_->set_transform(engine_->field_model().A, mu_new);
}

void GibbsSampler::lambda_update(Rng& rng) {
  const double shape = priors_.a_lambda + engine_->n_total();
  const double rate = priors_.b_lambda + dom_.volume();
  engine_->set_lambda(rng.gamma(shape, rate));
}

void GibbsSampler::adapt_hmc() {
  if (hmc_window_total_ < 25) return;
  const double rate =
      static_cast<double>(hmc_window_accept_) / hmc_window_total_;
  if (rate > 0.8) {
    controls_.hmc_eps *= 1.3;
  } else if (rate < 0.6) {
    controls_.hmc_eps /= 1.3;
  }
  hmc_window_accept_ = 0;
  hmc_window_total_ = 0;
}

void GibbsSampler::sweep(Rng& rng, bool adapting) {
  const double move_scale = controls_.move_scale_frac * dom_.diameter();
  const int steps = std::max(controls_.bdm_steps, engine_->n_thinned());
  for (int s = 0; s < steps; ++s) {
    rates_.bdm_total += 1;
    if (engine_->bdm_step(rng, MoveProbs{}, move_scale)) rates_.bdm_accept += 1;
  }
  hmc_update(rng);
  a_update(rng);
  sweep_count_ += 1;
  if (controls_.rho_every <= 1 || sweep_count_ % controls_.rho_every == 0) {
    rho_update(rng);
  }
  mu_update(rng);
  lambda_update(rng);
  if (adapting && controls_.hmc_autotune) adapt_hmc();
}

GibbsState gibbs_step(Rng& rng, const GibbsState& state, const Domain& dom,
                      const Priors& priors, const GibbsControls& controls) {
  MtsgcpParams params;
  params.lambda = state.lambda;
  params.lmc = state.lmc;
  params.dom = dom;
  GibbsSampler sampler(params, state, priors, controls);
  sampler.sweep(rng, /*adapting=*/false);
  return sampler.snapshot();
}

// ---------------------------------------------------------------------------

namespace {

// pointwise conditional draw of lambda*sigma on grid pixels given the
// engine's current field values; accumulates into grids (one res x res
// matrix per type)
void accumulate_intensity_draw(Rng& rng, const ThinnedFieldState& engine,
                               const QuadratureGrid& grid, int res,
                               std::vector<Eigen::MatrixXd>& grids) {
  const int p = engine.p();
  const long n_pix = grid.nodes.rows();
  const long n = engine.n_total();
  Eigen::MatrixXd w_draw(n_pix, p);
  const LatentFieldModel& model = engine.field_model();
  for (int j = 0; j < p; ++j) {
    const double prior_var = model.kernels[j].variance + engine.field_jitter(j);
    if (n == 0) {
      for (long q = 0; q < n_pix; ++q) {
        w_draw(q, j) = std::sqrt(prior_var) * rng.normal();
      }
      continue;
    }
    Eigen::VectorXd z = engine.field_solve(j, engine.w_values().col(j));
    // chunked kriging over pixels
    const long chunk = 512;
    const long n_chunks = (n_pix + chunk - 1) / chunk;
    Eigen::VectorXd means(n_pix), vars(n_pix);
    parallel_reps(n_chunks, [&](std::int64_t c) {
      const long lo = c * chunk;
      const long hi = std::min(n_pix, lo + chunk);
      Eigen::MatrixXd cross = cross_cov_matrix(
          model.kernels[j], engine.locations(), grid.nodes.middleRows(lo, hi - lo));
      Eigen::MatrixXd b = engine.field_solve_mat(j, cross);
      for (long q = lo; q < hi; ++q) {
        means[q] = b.col(q - lo).dot(z);
        vars[q] = std::max(0.0, prior_var - b.col(q - lo).squaredNorm());
      }
    });
    for (long q = 0; q < n_pix; ++q) {
      w_draw(q, j) = means[q] + std::sqrt(vars[q]) * rng.normal();
    }
  }
  Eigen::MatrixXd g_draw = w_draw * model.A.transpose();
  g_draw.rowwise() += model.mu.transpose();
  for (long q = 0; q < n_pix; ++q) {
    Eigen::VectorXd probs = sigma_probs(g_draw.row(q).transpose());
    const long i = q / res, jcol = q % res;
    for (int k = 1; k <= p; ++k) {
      grids[k - 1](i, jcol) += engine.lambda() * probs[k];
    }
  }
}

}  // namespace

Trace fit(Rng& rng, const std::vector<PointPattern>& data,
          const MtsgcpParams& initial, const Priors& priors,
          const GibbsControls& controls, long n_iter, long n_burn) {
  initial.validate();
  const int p = initial.p();
  require(static_cast<int>(data.size()) == p, ErrorKind::kParameter,
          "need one observed pattern per type");
  for (const auto& pat : data) {
    for (int i = 0; i < pat.size(); ++i) {
      require(initial.dom.contains(pat.point(i)), ErrorKind::kDomain,
              "data point outside the declared domain");
    }
  }

  GibbsState state;
  state.lambda = initial.lambda;
  state.lmc = initial.lmc;
  for (int j = 0; j < p; ++j) {
    Eigen::MatrixXd marks(data[j].size(), p);
    marks.rowwise() = initial.lmc.mu.transpose();
    state.observed.push_back(
        typed_pattern(data[j].points(), std::move(marks), j + 1));
  }

  GibbsSampler sampler(initial, state, priors, controls);
  Trace trace;
  trace.dom = initial.dom;
  trace.p = p;
  trace.seed = rng.seed();
  trace.grid_res = controls.grid_res;
  QuadratureGrid grid;
  if (controls.grid_res > 0) {
    require(controls.grid_res <= 512, ErrorKind::kSize,
            "intensity grid capped at 512x512");
    grid = QuadratureGrid::midpoint(initial.dom, controls.grid_res);
    trace.intensity_grids.assign(
        p, Eigen::MatrixXd::Zero(controls.grid_res, controls.grid_res));
  }

  for (long it = 0; it < n_burn; ++it) sampler.sweep(rng, /*adapting=*/true);
  long kept = 0;
  for (long it = 0; it < n_iter; ++it) {
    sampler.sweep(rng, /*adapting=*/false);
    if (it % controls.thin != 0) continue;
    TraceRecord rec;
    rec.iter = it;
    rec.lambda = sampler.lambda();
    LMCParams lmc = sampler.lmc();
    rec.A = lmc.A;
    rec.rho = lmc.rho;
    rec.mu = lmc.mu;
    rec.n_thinned = sampler.n_thinned();
    const ThinnedFieldState& engine = sampler.engine();
    const int n = engine.n_total();
    double lp = sampler.log_target_g() - sampler.lambda() * initial.dom.volume() +
                n * std::log(sampler.lambda());
    std::vector<int> counts(p + 1, 0);
    for (int r = 0; r < engine.n_obs(); ++r) counts[sampler.types()[r]] += 1;
    counts[0] = engine.n_thinned();
    for (int c : counts) lp -= log_factorial(c);
    rec.log_joint = lp;
    if (controls.store_thinned) {
      rec.thinned = typed_pattern(engine.thinned_locations(), engine.thinned_g(), 0);
      rec.observed_g = engine.g_values().topRows(engine.n_obs());
    }
    trace.records.push_back(std::move(rec));
    ++kept;
    if (controls.grid_res > 0 && (kept - 1) % controls.grid_every == 0) {
      accumulate_intensity_draw(rng, engine, grid, controls.grid_res,
                                trace.intensity_grids);
      trace.grid_samples += 1;
    }
  }
  if (trace.grid_samples > 0) {
    for (auto& g : trace.intensity_grids) g /= static_cast<double>(trace.grid_samples);
  }
  trace.observed = sampler.snapshot().observed;
  return trace;
}

std::vector<Eigen::MatrixXd> posterior_intensity_grid(Rng& rng,
                                                      const Trace& trace,
                                                      int grid_res) {
  require(grid_res >= 2 && grid_res <= 512, ErrorKind::kSize,
          "intensity grid capped at 512x512");
  const int p = trace.p;
  QuadratureGrid grid = QuadratureGrid::midpoint(trace.dom, grid_res);
  std::vector<Eigen::MatrixXd> grids(p,
                                     Eigen::MatrixXd::Zero(grid_res, grid_res));
  long used = 0;
  int n_obs = 0;
  for (const auto& pat : trace.observed) n_obs += pat.size();
  Eigen::MatrixXd obs_locs(n_obs, trace.dom.dim());
  {
    int row = 0;
    for (const auto& pat : trace.observed) {
      for (int i = 0; i < pat.size(); ++i, ++row) {
        obs_locs.row(row) = pat.locations().row(i);
      }
    }
  }
  for (const TraceRecord& rec : trace.records) {
    if (!rec.thinned.has_value()) continue;
    require(rec.observed_g.has_value(), ErrorKind::kStructural,
            "record stores the thinned pattern but not observed g values");
    LMCParams lmc(rec.A, rec.rho, rec.mu);
    ThinnedFieldState engine(trace.dom, rec.lambda, field_model_from(lmc),
                             obs_locs, *rec.observed_g, log_keep_sigma0);
    if (!rec.thinned->empty()) {
      engine.set_thinned(rec.thinned->locations(), rec.thinned->gp_marks());
    }
    accumulate_intensity_draw(rng, engine, grid, grid_res, grids);
    ++used;
  }
  require(used > 0, ErrorKind::kParameter,
          "trace has no stored thinned patterns (enable store_thinned)");
  for (auto& g : grids) g /= static_cast<double>(used);
  return grids;
}

// ---------------------------------------------------------------------------

namespace {

// symmetrized single-draw accumulator for gamma_kl at separation r
struct PcfAccum {
  Eigen::MatrixXd num;   // p x p, mean of (sigma_k(s) sigma_l(t) + swap)/2
  Eigen::VectorXd marg;  // p, mean of (sigma_k(s) + sigma_k(t))/2
};

PcfAccum pcf_accumulate(Rng& rng, const LMCParams& lmc, double r, long n_mc) {
  const int p = lmc.p();
  Eigen::MatrixXd same(p, p), cross(p, p);
  same.setZero();
  cross.setZero();
  for (int m = 0; m < p; ++m) {
    Eigen::MatrixXd outer = lmc.A.col(m) * lmc.A.col(m).transpose();
    same += outer;
    cross += std::exp(-lmc.rho[m] * r) * outer;
  }
  Eigen::MatrixXd cov(2 * p, 2 * p);
  cov.topLeftCorner(p, p) = same;
  cov.bottomRightCorner(p, p) = same;
  cov.topRightCorner(p, p) = cross;
  cov.bottomLeftCorner(p, p) = cross;
  cov.diagonal().array() += 1e-12;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  require(llt.info() == Eigen::Success, ErrorKind::kNumeric,
          "stationary LMC covariance not PD");
  Eigen::MatrixXd lower = llt.matrixL();

  PcfAccum acc;
  acc.num = Eigen::MatrixXd::Zero(p, p);
  acc.marg = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd z(2 * p), g(2 * p);
  for (long it = 0; it < n_mc; ++it) {
    for (int i = 0; i < 2 * p; ++i) z[i] = rng.normal();
    g = lower * z;
    for (int i = 0; i < p; ++i) {
      g[i] += lmc.mu[i];
      g[p + i] += lmc.mu[i];
    }
    Eigen::VectorXd sig_s = sigma_probs(g.head(p));
    Eigen::VectorXd sig_t = sigma_probs(g.tail(p));
    for (int k = 1; k <= p; ++k) {
      acc.marg[k - 1] += 0.5 * (sig_s[k] + sig_t[k]);
      for (int l = 1; l <= p; ++l) {
        acc.num(k - 1, l - 1) += 0.5 * (sig_s[k] * sig_t[l] + sig_s[l] * sig_t[k]);
      }
    }
  }
  acc.num /= static_cast<double>(n_mc);
  acc.marg /= static_cast<double>(n_mc);
  return acc;
}

}  // namespace

Eigen::MatrixXd pcf_single(Rng& rng, const LMCParams& lmc, double r, long n_mc) {
  PcfAccum acc = pcf_accumulate(rng, lmc, r, n_mc);
  const int p = lmc.p();
  Eigen::MatrixXd gamma(p, p);
  for (int k = 0; k < p; ++k) {
    for (int l = 0; l < p; ++l) {
      gamma(k, l) = acc.num(k, l) / (acc.marg[k] * acc.marg[l]);
    }
  }
  return gamma;
}

PcfEstimate pcf_single_entry(Rng& rng, const LMCParams& lmc, double r, long n_mc,
                             int k, int l, int n_batches) {
  require(k >= 1 && k <= lmc.p() && l >= 1 && l <= lmc.p(),
          ErrorKind::kParameter, "pcf type index out of range");
  std::vector<double> batch_gammas(n_batches);
  const long per_batch = std::max<long>(1, n_mc / n_batches);
  for (int b = 0; b < n_batches; ++b) {
    Rng local = rng.substream(static_cast<std::uint64_t>(b) + 1000);
    Eigen::MatrixXd gamma = pcf_single(local, lmc, r, per_batch);
    batch_gammas[b] = gamma(k - 1, l - 1);
  }
  stats::MeanSe ms = stats::mean_se(batch_gammas);
  return PcfEstimate{ms.mean, ms.se};
}

PcfTable pcf(Rng& rng, const std::vector<LMCParams>& draws,
             const std::vector<double>& r_values, long n_mc) {
  require(!draws.empty(), ErrorKind::kParameter, "pcf needs parameter draws");
  for (double r : r_values) {
    require(r > 0.0, ErrorKind::kParameter, "pcf separations must be positive");
  }
  const int p = draws.front().p();
  const int n_r = static_cast<int>(r_values.size());
  const long n_draws = static_cast<long>(draws.size());

  // per-draw curves: draw index major, then r, then (k,l)
  std::vector<Eigen::MatrixXd> per_draw(static_cast<size_t>(n_draws) * n_r);
  Rng stream = rng.substream(77);
  parallel_reps(n_draws, [&](std::int64_t d) {
    Rng local = stream.substream(static_cast<std::uint64_t>(d));
    for (int q = 0; q < n_r; ++q) {
      per_draw[static_cast<size_t>(d) * n_r + q] =
          pcf_single(local, draws[d], r_values[q], n_mc);
    }
  });

  PcfTable table;
  table.r = r_values;
  for (int k = 1; k <= p; ++k) {
    for (int l = k; l <= p; ++l) {
      PcfCurve curve;
      curve.k = k;
      curve.l = l;
      for (int q = 0; q < n_r; ++q) {
        std::vector<double> values(n_draws);
        for (long d = 0; d < n_draws; ++d) {
          values[d] = per_draw[static_cast<size_t>(d) * n_r + q](k - 1, l - 1);
        }
        std::sort(values.begin(), values.end());
        double mean = 0.0;
        for (double v : values) mean += v;
        curve.mean.push_back(mean / n_draws);
        curve.lo95.push_back(values[static_cast<size_t>(0.025 * (n_draws - 1))]);
        curve.hi95.push_back(values[static_cast<size_t>(std::ceil(0.975 * (n_draws - 1)))]);
      }
      table.curves.push_back(std::move(curve));
    }
  }
  return table;
}

// ---------------------------------------------------------------------------

MtsgcpParams draw_params_from_priors(Rng& rng, const Domain& dom, int p,
                                     const Priors& priors) {
  MtsgcpParams params;
  params.dom = dom;
  params.lambda = rng.gamma(priors.a_lambda, priors.b_lambda);
  Eigen::MatrixXd A(p, p);
  do {
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) A(i, j) = priors.s_A * rng.normal();
    }
  } while (std::abs(A.determinant()) < 1e-12);
  Eigen::VectorXd rho(p), mu(p);
  for (int j = 0; j < p; ++j) {
    rho[j] = rng.gamma(priors.a_rho, priors.b_rho);
    mu[j] = priors.m_mu + priors.s_mu * rng.normal();
  }
  params.lmc = LMCParams(A, rho, mu);
  return params;
}

GewekeReport geweke_test(Rng& rng, const GewekeConfig& config) {
  const int p = config.base.p();
  const Domain& dom = config.base.dom;
  GewekeReport report;
  report.seed = rng.seed();
  report.n_samples = config.n_samples;

  std::vector<double> fwd_lambda(config.n_samples), sc_lambda(config.n_samples);
  std::vector<int> fwd_n(config.n_samples), sc_n(config.n_samples);
  std::vector<double> fwd_aat(config.n_samples), sc_aat(config.n_samples);

  // forward simulator: independent prior-model draws
  Rng fwd_stream = rng.substream(1);
  parallel_reps(config.n_samples, [&](std::int64_t r) {
    Rng local = fwd_stream.substream(static_cast<std::uint64_t>(r));
    MtsgcpParams params = draw_params_from_priors(local, dom, p, config.priors);
    SimulationResult sim = simulate_mtsgcp(local, params);
    int n = sim.thinned.size();
    for (const auto& pat : sim.observed) n += pat.size();
    fwd_lambda[r] = params.lambda;
    fwd_n[r] = n;
    fwd_aat[r] = (params.lmc.A * params.lmc.A.transpose())(0, 0);
  });

  // successive-conditional simulator: one Gibbs sweep, then fresh data
  {
    Rng sc_rng = rng.substream(2);
    MtsgcpParams params = draw_params_from_priors(sc_rng, dom, p, config.priors);
    SimulationResult sim = simulate_mtsgcp(sc_rng, params);
    GibbsState state{sim.thinned, sim.observed, params.lambda, params.lmc};
    GibbsSampler sampler(params, state, config.priors, config.controls);
    long recorded = 0;
    long sweep_i = 0;
    while (recorded < config.n_samples) {
      sampler.sweep(sc_rng, /*adapting=*/false);
      // re-simulate the complete data + latents given the new parameters
      MtsgcpParams current;
      current.dom = dom;
      current.lambda = sampler.lambda();
      current.lmc = sampler.lmc();
      SimulationResult fresh = simulate_mtsgcp(sc_rng, current);
      GibbsState next{fresh.thinned, fresh.observed, current.lambda, current.lmc};
      sampler.reset_state(next);
      ++sweep_i;
      if (sweep_i % config.thin == 0) {
        int n = fresh.thinned.size();
        for (const auto& pat : fresh.observed) n += pat.size();
        sc_lambda[recorded] = current.lambda;
        sc_n[recorded] = n;
        sc_aat[recorded] =
            (current.lmc.A * current.lmc.A.transpose())(0, 0);
        ++recorded;
      }
    }
  }

  report.p_lambda = stats::ks_two_sample(fwd_lambda, sc_lambda).p_value;
  report.p_aat11 = stats::ks_two_sample(fwd_aat, sc_aat).p_value;
  std::vector<long> h_fwd = stats::count_histogram(fwd_n);
  std::vector<long> h_sc = stats::count_histogram(sc_n);
  stats::pad_to_common_size(h_fwd, h_sc);
  report.p_ntotal = stats::chisq_two_sample(h_fwd, h_sc).p_value;

  auto mean_of = [](const auto& v) {
    double s = 0.0;
    for (auto x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  report.fwd_mean_lambda = mean_of(fwd_lambda);
  report.sc_mean_lambda = mean_of(sc_lambda);
  report.fwd_mean_ntotal = mean_of(fwd_n);
  report.sc_mean_ntotal = mean_of(sc_n);
  report.fwd_mean_aat11 = mean_of(fwd_aat);
  report.sc_mean_aat11 = mean_of(sc_aat);
  return report;
}

}  // namespace coxthin::mtsgcp
