#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coxthin/mtsgcp.hpp"
#include "coxthin/sgcp.hpp"
#include "coxthin/stats.hpp"
#include "test_util.hpp"

using namespace coxthin;
using namespace coxthin::mtsgcp;

namespace {

LMCParams simple_lmc(int p) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(p, p);
  if (p == 2) {
    a << 0.9, 0.0, 0.35, 0.8;
  }
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(p, 2.0);
  if (p == 2) rho << 3.0, 1.2;
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(p, -0.4);
  return LMCParams(a, rho, mu);
}

MtsgcpParams test_params(int p, double lambda = 20.0) {
  MtsgcpParams params;
  params.lambda = lambda;
  params.lmc = simple_lmc(p);
  params.dom = Domain::unit_square();
  return params;
}

MarkedPattern typed(Rng& rng, const Domain& dom, int n, int p, int colour) {
  return test::random_marked(rng, dom, n, p, colour);
}

GibbsState random_state(Rng& rng, const MtsgcpParams& params, int n_thin,
                        const std::vector<int>& n_obs) {
  GibbsState state;
  state.lambda = params.lambda;
  state.lmc = params.lmc;
  state.thinned = typed(rng, params.dom, n_thin, params.p(), 0);
  for (int j = 0; j < params.p(); ++j) {
    state.observed.push_back(typed(rng, params.dom, n_obs[j], params.p(), j + 1));
  }
  return state;
}

}  // namespace

TEST_CASE("sigma: anchors, saturation, p=1 identity, stability") {
  Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd probs = sigma(zero2);
  CHECK(probs[0] == doctest::Approx(1.0 / 3.0));
  CHECK(probs[1] == doctest::Approx(1.0 / 3.0));
  CHECK(probs[2] == doctest::Approx(1.0 / 3.0));
  CHECK(probs.sum() == 1.0);  // exact after renormalization

  Eigen::VectorXd big(2);
  big << 40.0, 0.0;
  CHECK(sigma(big)[1] == doctest::Approx(1.0));

  for (double g : {-3.0, -0.5, 0.0, 1.2, 4.0}) {
    Eigen::VectorXd g1 = Eigen::VectorXd::Constant(1, g);
    CHECK(sigma(g1)[1] == doctest::Approx(expit(g)).epsilon(1e-14));
    CHECK(log_sigma(g1, 1) == doctest::Approx(log_expit(g)).epsilon(1e-12));
    CHECK(log_sigma(g1, 0) == doctest::Approx(log_one_minus_expit(g)).epsilon(1e-12));
  }

  Eigen::VectorXd extreme(3);
  extreme << 700.0, -700.0, 0.0;
  Eigen::VectorXd pe = sigma(extreme);
  CHECK(std::isfinite(pe.sum()));
  CHECK(pe.sum() == 1.0);
  CHECK(pe[1] == doctest::Approx(1.0));
}

TEST_CASE("simulate_mtsgcp: degenerate mean, reproducibility") {
  Rng rng(3);
  MtsgcpParams params = test_params(2, 30.0);
  params.lmc.mu = Eigen::VectorXd::Constant(2, -30.0);
  for (int r = 0; r < 20; ++r) {
    SimulationResult sim = simulate_mtsgcp(rng, params);
    CHECK(sim.observed[0].empty());
    CHECK(sim.observed[1].empty());
  }

  Rng a(9), b(9);
  MtsgcpParams p2 = test_params(2);
  SimulationResult s1 = simulate_mtsgcp(a, p2);
  SimulationResult s2 = simulate_mtsgcp(b, p2);
  CHECK(s1.thinned.size() == s2.thinned.size());
  CHECK(test::max_abs(s1.thinned.locations() - s2.thinned.locations()) == 0.0);
}

TEST_CASE("simulate_mtsgcp: p=1 count law matches the univariate simulator") {
  Rng rng(7);
  MtsgcpParams params = test_params(1, 6.0);
  params.lmc.A(0, 0) = 1.0;
  params.lmc.rho[0] = 2.0;
  params.lmc.mu[0] = 0.0;
  sgcp::SgcpParams uni;
  uni.lambda = 6.0;
  uni.kernel = Kernel(2.0, 1.0);
  uni.dom = params.dom;

  const int reps = 15000;
  std::vector<int> mt_counts(reps), uni_counts(reps);
  for (int r = 0; r < reps; ++r) {
    mt_counts[r] = simulate_mtsgcp(rng, params).observed[0].size();
    uni_counts[r] = sgcp::simulate_sgcp(rng, uni).observed.size();
  }
  std::vector<long> ha = stats::count_histogram(mt_counts);
  std::vector<long> hb = stats::count_histogram(uni_counts);
  stats::pad_to_common_size(ha, hb);
  CHECK(stats::chisq_two_sample(ha, hb).p_value > 0.01);
}

TEST_CASE("simulate_mtsgcp: type proportions match stationary E[sigma]") {
  Rng rng(11);
  MtsgcpParams params = test_params(2, 40.0);
  const int reps = 4000;
  Eigen::Vector3d counts = Eigen::Vector3d::Zero();
  double total = 0;
  for (int r = 0; r < reps; ++r) {
    SimulationResult sim = simulate_mtsgcp(rng, params);
    counts[0] += sim.thinned.size();
    counts[1] += sim.observed[0].size();
    counts[2] += sim.observed[1].size();
    total += sim.thinned.size() + sim.observed[0].size() + sim.observed[1].size();
  }
  // oracle: E[sigma] under g ~ N(mu, A A^T), plain Monte Carlo
  Eigen::Matrix2d aat = params.lmc.A * params.lmc.A.transpose();
  Eigen::LLT<Eigen::Matrix2d> llt(aat);
  Eigen::Matrix2d lower = llt.matrixL();
  Eigen::Vector3d expected = Eigen::Vector3d::Zero();
  const int n_mc = 400000;
  for (int r = 0; r < n_mc; ++r) {
    Eigen::VectorXd g = params.lmc.mu + lower * rng.normal_vector(2);
    expected += sigma(g);
  }
  expected /= n_mc;
  for (int k = 0; k < 3; ++k) {
    double se = std::sqrt(expected[k] * (1 - expected[k]) / total) +
                std::sqrt(expected[k] * (1 - expected[k]) / n_mc);
    CHECK(std::abs(counts[k] / total - expected[k]) < 5.0 * se);
  }
}

TEST_CASE("log_joint_density_mt: closed forms and invariances") {
  Rng rng(13);
  MtsgcpParams params = test_params(2, 7.0);

  GibbsState empty = random_state(rng, params, 0, {0, 0});
  CHECK(log_joint_density_mt(empty, params.dom) == doctest::Approx(-7.0));

  // permutation invariance within a type
  GibbsState state = random_state(rng, params, 3, {4, 2});
  double base = log_joint_density_mt(state, params.dom);
  {
    GibbsState perm = state;
    Eigen::MatrixXd locs = perm.observed[0].locations();
    Eigen::MatrixXd marks = perm.observed[0].gp_marks();
    locs.row(0).swap(locs.row(3));
    marks.row(0).swap(marks.row(3));
    perm.observed[0] = MarkedPattern(locs, std::nullopt, marks,
                                     Eigen::VectorXi::Constant(4, 1));
    CHECK(log_joint_density_mt(perm, params.dom) ==
          doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("log_joint_density_mt: p=1 equals the univariate joint density") {
  Rng rng(17);
  MtsgcpParams params = test_params(1, 4.0);
  params.lmc.A(0, 0) = 1.0;
  params.lmc.rho[0] = 1.7;
  params.lmc.mu[0] = 0.0;
  sgcp::SgcpParams uni;
  uni.lambda = 4.0;
  uni.kernel = Kernel(1.7, 1.0);
  uni.dom = params.dom;

  for (int rep = 0; rep < 30; ++rep) {
    int n0 = static_cast<int>(rng.uniform() * 4);
    int n1 = static_cast<int>(rng.uniform() * 4);
    GibbsState state = random_state(rng, params, n0, {n1});
    double mt = log_joint_density_mt(state, params.dom);
    sgcp::AugmentedState aug =
        sgcp::make_augmented(uni, state.thinned, state.observed[0]);
    double u = sgcp::log_joint_density(aug, uni);
    CHECK(std::abs(mt - u) < 1e-10);
  }
}

TEST_CASE("sampler fast path matches the full-matrix joint density") {
  Rng rng(19);
  MtsgcpParams params = test_params(2, 9.0);
  for (int rep = 0; rep < 10; ++rep) {
    GibbsState state = random_state(rng, params, 2 + rep % 3, {3, 2});
    GibbsSampler sampler(params, state, Priors::default_for(params.dom), {});
    int n = sampler.n_total();
    double fast = sampler.log_target_g() - state.lambda * params.dom.volume() +
                  n * std::log(state.lambda) - log_factorial(state.thinned.size()) -
                  log_factorial(state.observed[0].size()) -
                  log_factorial(state.observed[1].size());
    double full = log_joint_density_mt(state, params.dom);
    // the two routes place jitter differently (per-field vs on the joint
    // diagonal), so agreement is to jitter order, not machine precision
    CHECK(fast == doctest::Approx(full).epsilon(1e-5));
  }
}

TEST_CASE("HMC gradient matches central finite differences") {
  Rng rng(23);
  MtsgcpParams params = test_params(2, 10.0);
  const double h = 1e-5;
  for (int rep = 0; rep < 20; ++rep) {
    GibbsState state = random_state(rng, params, 1 + rep % 3, {3, 2});
    GibbsSampler sampler(params, state, Priors::default_for(params.dom), {});
    ThinnedFieldState& engine = sampler.engine();
    Eigen::MatrixXd grad = sampler.grad_log_target_g();
    Eigen::MatrixXd g0 = engine.g_values();
    for (int probe = 0; probe < 4; ++probe) {
      int i = static_cast<int>(rng.uniform() * g0.rows());
      int j = static_cast<int>(rng.uniform() * g0.cols());
      Eigen::MatrixXd gp = g0, gm = g0;
      gp(i, j) += h;
      gm(i, j) -= h;
      engine.set_g(gp);
      double up = sampler.log_target_g();
      engine.set_g(gm);
      double down = sampler.log_target_g();
      engine.set_g(g0);
      double fd = (up - down) / (2.0 * h);
      CHECK(grad(i, j) == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("engine gaussian density and gradient match the dense LMC route") {
  Rng rng(29);
  MtsgcpParams params = test_params(2, 5.0);
  GibbsState state = random_state(rng, params, 2, {3, 1});
  GibbsSampler sampler(params, state, Priors::default_for(params.dom), {});
  const ThinnedFieldState& engine = sampler.engine();
  const int n = engine.n_total();

  // dense route with the per-field jitter mapped through A
  Eigen::MatrixXd cov = lmc_cov_matrix(params.lmc, engine.locations());
  Eigen::MatrixXd aat = params.lmc.A * params.lmc.A.transpose();
  const double jitter = engine.field_jitter(0);
  for (int i = 0; i < n; ++i) {
    cov.block(i * 2, i * 2, 2, 2) += jitter * aat;
  }
  Eigen::VectorXd g_vec(2 * n), mu_vec(2 * n);
  for (int i = 0; i < n; ++i) {
    g_vec.segment(2 * i, 2) = engine.g_values().row(i).transpose();
    mu_vec.segment(2 * i, 2) = params.lmc.mu;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  Eigen::VectorXd centered = g_vec - mu_vec;
  double dense = -0.5 * 2 * n * std::log(2 * std::numbers::pi) -
                 0.5 * std::log(cov.determinant()) -
                 0.5 * centered.dot(llt.solve(centered));
  CHECK(engine.log_gaussian_density() == doctest::Approx(dense).epsilon(1e-9));

  Eigen::VectorXd dense_grad = -llt.solve(centered);
  Eigen::MatrixXd fast_grad = engine.gaussian_gradient();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(fast_grad(i, j) == doctest::Approx(dense_grad[2 * i + j]).epsilon(1e-7));
    }
  }
}

TEST_CASE("lambda full conditional is the conjugate gamma") {
  Rng rng(31);
  MtsgcpParams params = test_params(1, 3.0);
  params.lmc.mu[0] = 0.0;
  GibbsState state = random_state(rng, params, 0, {7});  // n_total = 7
  Priors priors = Priors::default_for(params.dom);
  priors.a_lambda = 1.0;
  priors.b_lambda = 1.0;  // posterior Gamma(8, 2) on the unit square

  GibbsControls controls;
  controls.bdm_steps = 0;
  controls.hmc_eps = 0.0;
  controls.rw_scale_A = 0.0;
  controls.rw_scale_log_rho = 0.0;
  controls.hmc_autotune = false;
  GibbsSampler sampler(params, state, priors, controls);
  const int reps = 20000;
  double mean = 0, m2 = 0;
  for (int r = 0; r < reps; ++r) {
    sampler.sweep(rng, false);
    double lam = sampler.lambda();
    mean += lam;
    m2 += lam * lam;
  }
  mean /= reps;
  double var = m2 / reps - mean * mean;
  CHECK(mean == doctest::Approx(4.0).epsilon(0.02));   // 8/2
  CHECK(var == doctest::Approx(2.0).epsilon(0.08));    // 8/4
}

TEST_CASE("mu full conditional matches the dense-matrix posterior") {
  Rng rng(37);
  MtsgcpParams params = test_params(2, 5.0);
  GibbsState state = random_state(rng, params, 0, {3, 2});
  Priors priors = Priors::default_for(params.dom);
  priors.m_mu = 0.2;
  priors.s_mu = 1.5;

  GibbsControls controls;
  controls.bdm_steps = 0;
  controls.hmc_eps = 0.0;
  controls.rw_scale_A = 0.0;
  controls.rw_scale_log_rho = 0.0;
  controls.hmc_autotune = false;
  GibbsSampler sampler(params, state, priors, controls);
  const ThinnedFieldState& engine = sampler.engine();
  const int n = engine.n_total();

  // dense posterior: precision J^T Sigma^{-1} J + I/s^2, J = 1_n (x) I_2
  Eigen::MatrixXd cov(2 * n, 2 * n);
  {
    Eigen::MatrixXd base = lmc_cov_matrix(params.lmc, engine.locations());
    Eigen::MatrixXd aat = params.lmc.A * params.lmc.A.transpose();
    double jitter = engine.field_jitter(0);
    for (int i = 0; i < n; ++i) base.block(2 * i, 2 * i, 2, 2) += jitter * aat;
    cov = base;
  }
  Eigen::MatrixXd big_j(2 * n, 2);
  Eigen::VectorXd g_vec(2 * n);
  for (int i = 0; i < n; ++i) {
    big_j.block(2 * i, 0, 2, 2) = Eigen::Matrix2d::Identity();
    g_vec.segment(2 * i, 2) = engine.g_values().row(i).transpose();
  }
  Eigen::MatrixXd s_inv = cov.inverse();
  Eigen::Matrix2d prec = big_j.transpose() * s_inv * big_j +
                         Eigen::Matrix2d::Identity() / (priors.s_mu * priors.s_mu);
  Eigen::Vector2d lin = big_j.transpose() * s_inv * g_vec +
                        Eigen::Vector2d::Constant(priors.m_mu) /
                            (priors.s_mu * priors.s_mu);
  Eigen::Vector2d post_mean = prec.inverse() * lin;
  Eigen::Matrix2d post_cov = prec.inverse();

  const int reps = 30000;
  Eigen::Vector2d emp_mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d emp_m2 = Eigen::Matrix2d::Zero();
  for (int r = 0; r < reps; ++r) {
    sampler.sweep(rng, false);
    Eigen::Vector2d mu = sampler.lmc().mu;
    emp_mean += mu;
    emp_m2 += mu * mu.transpose();
  }
  emp_mean /= reps;
  Eigen::Matrix2d emp_cov = emp_m2 / reps - emp_mean * emp_mean.transpose();
  for (int k = 0; k < 2; ++k) {
    double se = std::sqrt(post_cov(k, k) / reps);
    CHECK(std::abs(emp_mean[k] - post_mean[k]) < 5.0 * se);
    CHECK(emp_cov(k, k) == doctest::Approx(post_cov(k, k)).epsilon(0.08));
  }
  CHECK(emp_cov(0, 1) == doctest::Approx(post_cov(0, 1)).epsilon(0.25));
}

TEST_CASE("hmc with zero step size keeps the state and always accepts") {
  Rng rng(41);
  MtsgcpParams params = test_params(2, 8.0);
  GibbsState state = random_state(rng, params, 2, {3, 2});
  GibbsControls controls;
  controls.bdm_steps = 0;
  controls.hmc_eps = 0.0;
  controls.rw_scale_A = 0.0;
  controls.rw_scale_log_rho = 0.0;
  controls.hmc_autotune = false;
  // thinned nonempty: freeze BDM by removing the thinned tail
  state.thinned = MarkedPattern();
  GibbsSampler sampler(params, state, Priors::default_for(params.dom), controls);
  Eigen::MatrixXd g0 = sampler.engine().g_values();
  for (int r = 0; r < 10; ++r) sampler.sweep(rng, false);
  CHECK(test::max_abs(sampler.engine().g_values() - g0) == 0.0);
  CHECK(sampler.rates().hmc_accept == sampler.rates().hmc_total);
}

TEST_CASE("fit: zero iterations and seed determinism") {
  Rng rng(43);
  MtsgcpParams params = test_params(2, 25.0);
  SimulationResult sim = simulate_mtsgcp(rng, params);
  std::vector<PointPattern> data{sim.observed[0].to_point_pattern(),
                                 sim.observed[1].to_point_pattern()};
  GibbsControls controls;
  controls.bdm_steps = 5;

  Rng r0(5);
  Trace empty = fit(r0, data, params, Priors::default_for(params.dom), controls,
                    0, 0);
  CHECK(empty.records.empty());

  Rng r1(6), r2(6);
  Trace t1 = fit(r1, data, params, Priors::default_for(params.dom), controls, 30, 10);
  Trace t2 = fit(r2, data, params, Priors::default_for(params.dom), controls, 30, 10);
  REQUIRE(t1.records.size() == t2.records.size());
  for (size_t i = 0; i < t1.records.size(); ++i) {
    CHECK(t1.records[i].lambda == t2.records[i].lambda);
    CHECK(t1.records[i].log_joint == t2.records[i].log_joint);
  }
}

TEST_CASE("posterior intensity grid: flat-field degenerate case") {
  Rng rng(47);
  const int p = 2;
  // A ~ 0: sigma(g) == softmax(mu) everywhere, so the posterior intensity is
  // flat at lambda * sigma_j(mu)
  Eigen::MatrixXd a = 1e-4 * Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(p, 2.0);
  Eigen::VectorXd mu(p);
  mu << 0.3, -0.8;
  LMCParams lmc(a, rho, mu);

  Trace trace;
  trace.dom = Domain::unit_square();
  trace.p = p;
  const double lambda = 12.0;
  trace.observed.push_back(typed(rng, trace.dom, 3, p, 1));
  trace.observed.push_back(typed(rng, trace.dom, 2, p, 2));
  mtsgcp::TraceRecord rec;
  rec.lambda = lambda;
  rec.A = a;
  rec.rho = rho;
  rec.mu = mu;
  Eigen::MatrixXd thin_marks(2, p);
  thin_marks.rowwise() = mu.transpose();
  rec.thinned = MarkedPattern(test::random_points(rng, trace.dom, 2),
                              std::nullopt, thin_marks,
                              Eigen::VectorXi::Constant(2, 0));
  rec.observed_g = Eigen::MatrixXd::Zero(5, p);
  rec.observed_g->rowwise() = mu.transpose();
  // marks near mu keep the degenerate field consistent
  trace.records.push_back(rec);

  auto grids = posterior_intensity_grid(rng, trace, 16);
  {
    Rng ra(77), rb(77);
    auto g1 = posterior_intensity_grid(ra, trace, 8);
    auto g2 = posterior_intensity_grid(rb, trace, 8);
    CHECK(test::max_abs(g1[0] - g2[0]) == 0.0);
  }
  Eigen::VectorXd probs = sigma(mu);
  for (int j = 0; j < p; ++j) {
    double expected = lambda * probs[j + 1];
    CHECK(std::abs(grids[j].mean() - expected) < 0.05 * expected);
    // self consistency: pixel mean times |S| approximates the type's mass
    CHECK(grids[j].mean() * trace.dom.volume() ==
          doctest::Approx(expected).epsilon(0.05));
  }

  CHECK_THROWS_AS(posterior_intensity_grid(rng, trace, 1000), Error);
}

TEST_CASE("pcf: independence limit, short-range clustering, symmetry") {
  Rng rng(53);
  LMCParams lmc = simple_lmc(2);

  // r far beyond the ranges: gamma = 1 within Monte Carlo error
  double r_far = 50.0 / lmc.rho.minCoeff();
  for (int k = 1; k <= 2; ++k) {
    for (int l = k; l <= 2; ++l) {
      PcfEstimate est = pcf_single_entry(rng, lmc, r_far, 100000, k, l);
      CHECK(std::abs(est.gamma - 1.0) < 3.0 * est.se);
    }
  }

  // same-type clustering at short range for variance-1 fields
  Eigen::MatrixXd gamma_short = pcf_single(rng, lmc, 0.01, 100000);
  CHECK(gamma_short(0, 0) > 1.0);
  CHECK(gamma_short(1, 1) > 1.0);

  // symmetrized estimator: exact equality with shared draws
  CHECK(gamma_short(0, 1) == gamma_short(1, 0));

  PcfTable table = pcf(rng, {lmc, lmc}, {0.05, 0.2, 1.0}, 20000);
  CHECK(table.curves.size() == 3);  // (1,1), (1,2), (2,2)
  for (const auto& c : table.curves) {
    CHECK(c.mean.size() == 3);
  }
}

TEST_CASE("geweke smoke test at reduced scale") {
  Rng rng(59);
  GewekeConfig config;
  config.base.dom = Domain::unit_square();
  config.base.lmc = simple_lmc(2);
  config.priors.a_lambda = 50.0;
  config.priors.b_lambda = 5.0;
  config.priors.s_A = 0.5;
  config.priors.a_rho = 8.0;
  config.priors.b_rho = 2.0;
  config.priors.m_mu = -0.3;
  config.priors.s_mu = 0.5;
  config.controls.bdm_steps = 10;
  config.controls.hmc_eps = 0.2;
  config.controls.hmc_autotune = false;
  config.n_samples = 500;
  config.thin = 4;
  GewekeReport rep = geweke_test(rng, config);
  // loose screening only; the acceptance suite runs the full-size test
  CHECK(rep.p_lambda > 1e-4);
  CHECK(rep.p_ntotal > 1e-4);
  CHECK(rep.p_aat11 > 1e-4);
  CHECK(rep.sc_mean_lambda ==
        doctest::Approx(rep.fwd_mean_lambda).epsilon(0.05));
}
