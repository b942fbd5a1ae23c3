#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "coxthin/cholesky.hpp"
#include "coxthin/gaussian.hpp"
#include "coxthin/grid_gp.hpp"
#include "test_util.hpp"

using namespace coxthin;
using test::max_abs;
using test::random_points;

namespace {

Eigen::MatrixXd from_scratch_lower(const CovarianceModel& model,
                                   const Eigen::MatrixXd& locs, double jitter) {
  Eigen::MatrixXd cov = model.cov(locs);
  cov.diagonal().array() += jitter;
  return Eigen::LLT<Eigen::MatrixXd>(cov).matrixL();
}

}  // namespace

TEST_CASE("cov_matrix: single point, pair, eigenvalues") {
  Kernel k(2.0, 1.5);
  Eigen::MatrixXd one(1, 2);
  one << 0.4, 0.4;
  Eigen::MatrixXd c1 = cov_matrix(k, one);
  CHECK(c1.rows() == 1);
  CHECK(c1(0, 0) == doctest::Approx(1.5));

  Eigen::MatrixXd two(2, 2);
  two << 0.0, 0.0, 0.3, 0.4;  // distance 0.5
  Eigen::MatrixXd c2 = cov_matrix(k, two);
  CHECK(c2(0, 1) == doctest::Approx(1.5 * std::exp(-2.0 * 0.5)));
  CHECK(c2(0, 1) == c2(1, 0));

  // eigen-decomposition oracle: kernel matrices are PSD before jitter
  Rng rng(3);
  Eigen::MatrixXd pts = random_points(rng, Domain::unit_square(), 5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_matrix(k, pts));
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("cov_matrix: parallel assembly matches serial bit-for-bit") {
  Rng rng(5);
  Kernel k(1.3, 0.8);
  Eigen::MatrixXd pts = random_points(rng, Domain::unit_square(), 300);
  Eigen::MatrixXd a = cov_matrix(k, pts);
  Eigen::MatrixXd b = cov_matrix_serial(k, pts);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lmc_cov_matrix: p=1 reduction and decay") {
  Rng rng(7);
  Eigen::MatrixXd a1(1, 1);
  a1 << 1.0;
  LMCParams lmc(a1, Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Zero(1));
  Eigen::MatrixXd pts = random_points(rng, Domain::unit_square(), 6);
  CHECK(max_abs(lmc_cov_matrix(lmc, pts) - cov_matrix(Kernel(2.0, 1.0), pts)) <
        1e-14);

  Eigen::MatrixXd a2(2, 2);
  a2 << 1.0, 0.3, -0.2, 0.8;
  LMCParams lmc2(a2, (Eigen::VectorXd(2) << 3.0, 1.0).finished(),
                 Eigen::VectorXd::Zero(2));
  Eigen::MatrixXd far(2, 2);
  far << 0.0, 0.0, 60.0, 0.0;
  Eigen::MatrixXd cfar = lmc_cov_matrix(lmc2, far);
  CHECK(max_abs(cfar.block(0, 2, 2, 2)) < 1e-12);
}

TEST_CASE("lmc_cov_matrix: brute-force channelwise assembly oracle") {
  Rng rng(11);
  const int p = 2, n = 3;
  Eigen::MatrixXd a(p, p);
  a << 0.9, -0.4, 0.2, 1.1;
  Eigen::VectorXd rho(p);
  rho << 2.5, 0.7;
  LMCParams lmc(a, rho, Eigen::VectorXd::Zero(p));
  Eigen::MatrixXd pts = random_points(rng, Domain::unit_square(), n);

  // oracle: Cov(g_k(s_i), g_l(s_j)) = sum_m A(k,m) A(l,m) C_m(|s_i - s_j|)
  Eigen::MatrixXd expected(n * p, n * p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double r = (pts.row(i) - pts.row(j)).norm();
      for (int k = 0; k < p; ++k) {
        for (int l = 0; l < p; ++l) {
          double v = 0;
          for (int m = 0; m < p; ++m) {
            v += a(k, m) * a(l, m) * std::exp(-rho[m] * r);
          }
          expected(i * p + k, j * p + l) = v;
        }
      }
    }
  }
  CHECK(max_abs(lmc_cov_matrix(lmc, pts) - expected) < 1e-12);
}

TEST_CASE("lmc_cov_matrix: PSD over random full-rank draws") {
  Rng rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::MatrixXd a(2, 2);
    do {
      for (int i = 0; i < 4; ++i) a(i / 2, i % 2) = rng.normal();
    } while (std::abs(a.determinant()) < 1e-3);
    Eigen::VectorXd rho(2);
    rho << 0.2 + 3.0 * rng.uniform(), 0.2 + 3.0 * rng.uniform();
    LMCParams lmc(a, rho, Eigen::VectorXd::Zero(2));
    Eigen::MatrixXd pts = random_points(rng, Domain::unit_square(), 5);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lmc_cov_matrix(lmc, pts));
    double max_eig = es.eigenvalues().maxCoeff();
    CHECK(es.eigenvalues().minCoeff() > -1e-10 * max_eig);
  }
}

TEST_CASE("LMCParams rejects rank-deficient A") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 2.0, 0.5, 1.0;  // det 0
  CHECK_THROWS_AS(
      LMCParams(a, Eigen::VectorXd::Constant(2, 1.0), Eigen::VectorXd::Zero(2)),
      Error);
}

TEST_CASE("chol extend/remove: inverse operations and from-scratch oracle") {
  Rng rng(17);
  Domain dom = Domain::unit_square();
  auto model = std::make_shared<KernelCovariance>(Kernel(1.5, 1.0));
  Eigen::MatrixXd pts = random_points(rng, dom, 8);
  CholeskyState state = CholeskyState::build(model, pts);

  Eigen::VectorXd extra = Eigen::Vector2d(0.42, 0.17);
  CholeskyState grown = chol_extend(state, extra);
  CholeskyState back = chol_remove(grown, 8);
  CHECK(max_abs(back.lower() - state.lower()) < 1e-8);

  // 50 random extend/remove steps, each checked against a fresh factorization
  CholeskyState cur = state;
  for (int step = 0; step < 50; ++step) {
    if (cur.n_locations() <= 2 || rng.uniform() < 0.55) {
      cur = chol_extend(cur, Eigen::Vector2d(rng.uniform(), rng.uniform()));
    } else {
      cur = chol_remove(cur, static_cast<int>(rng.uniform() * cur.n_locations()));
    }
    Eigen::MatrixXd oracle = from_scratch_lower(*model, cur.locations(), cur.jitter());
    double scale = oracle.cwiseAbs().maxCoeff();
    CHECK(max_abs(cur.lower() - oracle) / scale < 1e-6);
  }

  // removing the only location leaves the empty state
  Eigen::MatrixXd single(1, 2);
  single << 0.5, 0.5;
  CholeskyState one = CholeskyState::build(model, single);
  CholeskyState empty = chol_remove(one, 0);
  CHECK(empty.n_locations() == 0);
}

TEST_CASE("chol extend/remove: block updates for multichannel models") {
  Rng rng(19);
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.2, -0.3, 0.9;
  LMCParams lmc(a, (Eigen::VectorXd(2) << 2.0, 0.8).finished(),
                Eigen::VectorXd::Zero(2));
  auto model = std::make_shared<LmcCovariance>(lmc);
  Eigen::MatrixXd pts = random_points(rng, Domain::unit_square(), 5);
  CholeskyState state = CholeskyState::build(model, pts);
  CHECK(state.dim() == 10);

  CholeskyState grown = state.extend(Eigen::Vector2d(0.25, 0.75));
  Eigen::MatrixXd oracle =
      from_scratch_lower(*model, grown.locations(), grown.jitter());
  CHECK(max_abs(grown.lower() - oracle) / oracle.cwiseAbs().maxCoeff() < 1e-8);

  CholeskyState removed = grown.remove(2);
  oracle = from_scratch_lower(*model, removed.locations(), removed.jitter());
  CHECK(max_abs(removed.lower() - oracle) / oracle.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("conditional_gaussian: interpolation, prior fallback, full-matrix oracle") {
  Rng rng(23);
  Domain dom = Domain::unit_square();
  Kernel kern(1.0, 1.0);

  // near-coincident point with zero jitter: mean ~ value, variance ~ 0
  {
    auto model = std::make_shared<KernelCovariance>(kern);
    Eigen::MatrixXd pts(1, 2);
    pts << 0.4, 0.4;
    CholeskyState state = CholeskyState::build(model, pts, 0.0);
    Eigen::VectorXd values(1);
    values << 1.7;
    Eigen::MatrixXd query(1, 2);
    query << 0.4 + 1e-6, 0.4;
    ConditionalGaussian cond = conditional_gaussian(state, values, query);
    CHECK(std::abs(cond.mean[0] - 1.7) < 1e-3);
    CHECK(std::abs(cond.cov(0, 0)) < 1e-3);
  }

  // empty conditioning set: the prior
  {
    auto model = std::make_shared<KernelCovariance>(kern);
    CholeskyState state =
        CholeskyState::build(model, Eigen::MatrixXd(0, 2), 0.0);
    Eigen::MatrixXd query(1, 2);
    query << 0.5, 0.5;
    ConditionalGaussian cond =
        conditional_gaussian(state, Eigen::VectorXd(0), query);
    CHECK(cond.mean[0] == doctest::Approx(0.0));
    CHECK(cond.cov(0, 0) == doctest::Approx(1.0));
  }

  // oracle: conditioning via the full joint covariance and a dense inverse
  {
    auto model = std::make_shared<KernelCovariance>(kern);
    Eigen::MatrixXd known = random_points(rng, dom, 4);
    Eigen::MatrixXd query = random_points(rng, dom, 2);
    const double jitter = 1e-9;
    CholeskyState state = CholeskyState::build(model, known, jitter);
    Eigen::VectorXd values = rng.normal_vector(4);
    ConditionalGaussian cond = conditional_gaussian(state, values, query);

    Eigen::MatrixXd c_kk = cov_matrix(kern, known);
    c_kk.diagonal().array() += jitter;
    Eigen::MatrixXd c_kq = cross_cov_matrix(kern, known, query);
    Eigen::MatrixXd c_qq = cov_matrix(kern, query);
    c_qq.diagonal().array() += jitter;
    Eigen::MatrixXd inv = c_kk.inverse();
    Eigen::VectorXd mean_oracle = c_kq.transpose() * inv * values;
    Eigen::MatrixXd cov_oracle = c_qq - c_kq.transpose() * inv * c_kq;
    CHECK(max_abs((cond.mean - mean_oracle).eval()) < 1e-8);
    CHECK(max_abs(cond.cov - cov_oracle) < 1e-8);

    // posterior covariance never exceeds the prior in the Loewner order
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c_qq - cond.cov);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("mvn_logpdf: closed forms and the dense oracle") {
  // 1d standard normal at 0
  auto model = std::make_shared<KernelCovariance>(Kernel(1.0, 1.0));
  Eigen::MatrixXd one(1, 2);
  one << 0.5, 0.5;
  CholeskyState state = CholeskyState::build(model, one, 0.0);
  Eigen::VectorXd zero1 = Eigen::VectorXd::Zero(1);
  CHECK(mvn_logpdf(zero1, zero1, state) ==
        doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)));

  // diagonal case: far-apart points decouple into univariate terms
  Rng rng(29);
  Eigen::MatrixXd far(3, 2);
  far << 0, 0, 100, 0, 0, 100;
  CholeskyState diag_state =
      CholeskyState::build(std::make_shared<KernelCovariance>(Kernel(5.0, 2.0)),
                           far, 0.0);
  Eigen::VectorXd v = rng.normal_vector(3);
  double expected = 0;
  for (int i = 0; i < 3; ++i) {
    expected += -0.5 * std::log(2.0 * std::numbers::pi * 2.0) - v[i] * v[i] / 4.0;
  }
  CHECK(mvn_logpdf(v, Eigen::VectorXd::Zero(3), diag_state) ==
        doctest::Approx(expected).epsilon(1e-10));

  // 6d random case against determinant + inverse
  Eigen::MatrixXd pts = random_points(rng, Domain::unit_square(), 6);
  const double jitter = 1e-8;
  CholeskyState s6 = CholeskyState::build(
      std::make_shared<KernelCovariance>(Kernel(1.7, 1.0)), pts, jitter);
  Eigen::VectorXd x = rng.normal_vector(6);
  Eigen::MatrixXd cov = cov_matrix(Kernel(1.7, 1.0), pts);
  cov.diagonal().array() += jitter;
  double naive = -0.5 * 6 * std::log(2.0 * std::numbers::pi) -
                 0.5 * std::log(cov.determinant()) -
                 0.5 * x.dot(cov.inverse() * x);
  CHECK(mvn_logpdf(x, Eigen::VectorXd::Zero(6), s6) ==
        doctest::Approx(naive).epsilon(1e-9));
}

TEST_CASE("grid gp sampler: exact embedding and empirical covariance") {
  Domain dom = Domain::unit_square();
  Kernel kern(2.0, 1.0);
  GridGpSampler grid(dom, 16, kern);
  CHECK(grid.clipped_mass() < 5e-3);

  Rng rng(31);
  const int reps = 30000;
  const long cells = grid.n_cells();
  // covariance spot checks at a few index pairs
  std::vector<std::pair<long, long>> pairs = {{0, 0}, {0, 1}, {0, 17}, {5, 200}};
  std::vector<double> acc(pairs.size(), 0.0);
  Eigen::VectorXd a, b;
  for (int r = 0; r < reps / 2; ++r) {
    grid.draw_pair(rng, a, b);
    for (size_t q = 0; q < pairs.size(); ++q) {
      acc[q] += a[pairs[q].first] * a[pairs[q].second];
      acc[q] += b[pairs[q].first] * b[pairs[q].second];
    }
  }
  for (size_t q = 0; q < pairs.size(); ++q) {
    double expected = kern((grid.cell_centers().row(pairs[q].first) -
                            grid.cell_centers().row(pairs[q].second))
                               .norm());
    CHECK(std::abs(acc[q] / reps - expected) < 0.03);
  }
  (void)cells;
}
