#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coxthin/poisson.hpp"
#include "coxthin/rng.hpp"
#include "coxthin/stats.hpp"
#include "test_util.hpp"

using namespace coxthin;

TEST_CASE("rng: fixed seed reproduces bit-identically") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(42), d(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(c.normal() == d.normal());
    CHECK(c.poisson(7.5) == d.poisson(7.5));
    CHECK(c.gamma(2.5, 1.5) == d.gamma(2.5, 1.5));
  }
}

TEST_CASE("rng: substreams differ from the parent and are stable") {
  Rng a(7);
  Rng s1 = a.substream(1), s2 = a.substream(2);
  CHECK(s1.next_u64() != s2.next_u64());
  Rng again = Rng(7).substream(1);
  CHECK(Rng(7).substream(1).next_u64() == again.next_u64());
}

TEST_CASE("rng: moment sanity for normal, gamma, poisson") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    ss += x * x;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(ss / n - 1.0) < 0.02);

  double gsum = 0;
  for (int i = 0; i < n; ++i) gsum += rng.gamma(3.0, 2.0);
  CHECK(std::abs(gsum / n - 1.5) < 0.02);

  // large-mean poisson goes through the recursive split
  double psum = 0;
  for (int i = 0; i < 20000; ++i) psum += rng.poisson(1000.0);
  CHECK(std::abs(psum / 20000 - 1000.0) < 2.0);
}

TEST_CASE("domain: invariants and volume") {
  Domain d = Domain::unit_square();
  CHECK(d.volume() == doctest::Approx(1.0));
  CHECK(d.contains(Eigen::Vector2d(0.5, 0.5)));
  CHECK_FALSE(d.contains(Eigen::Vector2d(1.5, 0.5)));
  Eigen::VectorXd lo(2), hi(2);
  lo << 0, 0;
  hi << 2, 1;
  CHECK(Domain(lo, hi).volume() == doctest::Approx(2.0));
  CHECK_THROWS_AS(Domain(hi, lo), Error);
}

TEST_CASE("pattern: duplicate locations rejected, ties in time rejected") {
  Eigen::MatrixXd pts(2, 2);
  pts << 0.1, 0.2, 0.1, 0.2;
  CHECK_THROWS_AS(PointPattern{pts}, Error);

  Eigen::MatrixXd ok(2, 2);
  ok << 0.1, 0.2, 0.3, 0.4;
  Eigen::VectorXd times(2);
  times << 0.5, 0.5;
  CHECK_THROWS_AS(MarkedPattern(ok, times), Error);
}

TEST_CASE("sample_homogeneous_ppp: moments match Poisson(lambda |S|)") {
  Rng rng(11);
  Domain dom = Domain::unit_square();
  const int reps = 20000;
  double mean = 0, var = 0;
  std::vector<int> counts(reps);
  for (int r = 0; r < reps; ++r) {
    counts[r] = sample_homogeneous_ppp(rng, dom, 2.0).size();
    mean += counts[r];
  }
  mean /= reps;
  for (int r = 0; r < reps; ++r) var += (counts[r] - mean) * (counts[r] - mean);
  var /= reps - 1;
  CHECK(mean == doctest::Approx(2.0).epsilon(0.03));
  CHECK(var == doctest::Approx(2.0).epsilon(0.06));

  Eigen::VectorXd lo(2), hi(2);
  lo << 0, 0;
  hi << 2, 1;
  Domain rect(lo, hi);
  double mean2 = 0;
  for (int r = 0; r < reps; ++r) {
    mean2 += sample_homogeneous_ppp(rng, rect, 5.0).size();
  }
  CHECK(mean2 / reps == doctest::Approx(10.0).epsilon(0.02));

  CHECK_THROWS_AS(sample_homogeneous_ppp(rng, dom, 0.0), Error);
}

TEST_CASE("sample_homogeneous_ppp: chi-square against the Poisson pmf") {
  Rng rng(17);
  Domain dom = Domain::unit_square();
  const double lambda = 4.0;
  const long reps = 100000;
  std::vector<int> counts(reps);
  for (long r = 0; r < reps; ++r) {
    counts[r] = sample_homogeneous_ppp(rng, dom, lambda).size();
  }
  std::vector<long> hist = stats::count_histogram(counts);
  std::vector<double> pmf(hist.size() + 1);
  double tail = 1.0;
  for (size_t k = 0; k < hist.size(); ++k) {
    pmf[k] = std::exp(-lambda + k * std::log(lambda) - log_factorial(static_cast<int>(k)));
    tail -= pmf[k];
  }
  pmf.back() = std::max(0.0, tail);
  hist.push_back(0);
  CHECK(stats::chisq_gof(hist, pmf).p_value > 0.01);
}

TEST_CASE("thinning sampler: degenerate intensities") {
  Rng rng(5);
  Domain dom = Domain::unit_square();
  // intensity == lambda_max: identical in law; spot-check the count mean
  double mean = 0;
  for (int r = 0; r < 5000; ++r) {
    mean += sample_nonhom_ppp_by_thinning(rng, dom, 3.0, [](const Eigen::VectorXd&) {
              return 3.0;
            }).size();
  }
  CHECK(mean / 5000 == doctest::Approx(3.0).epsilon(0.05));

  for (int r = 0; r < 200; ++r) {
    CHECK(sample_nonhom_ppp_by_thinning(rng, dom, 3.0, [](const Eigen::VectorXd&) {
            return 0.0;
          }).empty());
  }

  CHECK_THROWS_AS(
      sample_nonhom_ppp_by_thinning(rng, dom, 1.0,
                                    [](const Eigen::VectorXd&) { return 2.0; }),
      Error);
}

TEST_CASE("thinning sampler: linear 1d intensity against inverse-cdf oracle") {
  // oracle: N ~ Poisson(3), locations iid with cdf x^2 (density 6x/6... for
  // intensity 6x on [0,1], total mass 3, scatter density 2x, F^{-1}(u)=sqrt u)
  Rng rng(29);
  Domain dom = Domain::unit_interval();
  const long reps = 40000;
  std::vector<int> counts(reps);
  std::vector<double> locs_thin, locs_oracle;
  for (long r = 0; r < reps; ++r) {
    PointPattern p = sample_nonhom_ppp_by_thinning(
        rng, dom, 6.0, [](const Eigen::VectorXd& s) { return 6.0 * s[0]; });
    counts[r] = p.size();
    for (int i = 0; i < p.size(); ++i) locs_thin.push_back(p.points()(i, 0));
  }
  double mean = 0;
  for (long r = 0; r < reps; ++r) mean += counts[r];
  CHECK(mean / reps == doctest::Approx(3.0).epsilon(0.02));

  Rng rng2(31);
  for (long r = 0; r < reps; ++r) {
    int n = rng2.poisson(3.0);
    for (int i = 0; i < n; ++i) locs_oracle.push_back(std::sqrt(rng2.uniform()));
  }
  CHECK(stats::ks_two_sample(locs_thin, locs_oracle).p_value > 0.01);
}

TEST_CASE("thinning sampler: indicator intensity = restriction") {
  Rng rng(41);
  Domain dom = Domain::unit_square();
  const long reps = 100000;
  const double lambda = 3.0;
  std::vector<int> counts(reps);
  for (long r = 0; r < reps; ++r) {
    PointPattern p = sample_nonhom_ppp_by_thinning(
        rng, dom, lambda, [lambda](const Eigen::VectorXd& s) {
          return s[0] < 0.5 ? lambda : 0.0;
        });
    counts[r] = p.size();
    for (int i = 0; i < p.size(); ++i) {
      REQUIRE(p.points()(i, 0) < 0.5);
    }
  }
  std::vector<long> hist = stats::count_histogram(counts);
  const double mean = lambda * 0.5;
  std::vector<double> pmf(hist.size() + 1);
  double tail = 1.0;
  for (size_t k = 0; k < hist.size(); ++k) {
    pmf[k] = std::exp(-mean + k * std::log(mean) - log_factorial(static_cast<int>(k)));
    tail -= pmf[k];
  }
  pmf.back() = std::max(0.0, tail);
  hist.push_back(0);
  CHECK(stats::chisq_gof(hist, pmf).p_value > 0.01);
}

TEST_CASE("log_ppp_density: closed forms") {
  Domain unit = Domain::unit_square();
  PointPattern empty;
  CHECK(log_ppp_density(empty, unit, 4.0) == doctest::Approx(-4.0));

  Eigen::MatrixXd one(1, 2);
  one << 0.3, 0.6;
  CHECK(log_ppp_density(PointPattern(one), unit, 3.0) ==
        doctest::Approx(std::log(3.0) - 3.0));

  Eigen::MatrixXd two(2, 2);
  two << 0.3, 0.6, 0.1, 0.9;
  CHECK(log_ppp_density(PointPattern(two), unit, 2.0) ==
        doctest::Approx(2.0 * std::log(2.0) - 2.0 - std::log(2.0)));

  Eigen::MatrixXd outside(1, 2);
  outside << 1.5, 0.5;
  CHECK_THROWS_AS(log_ppp_density(PointPattern(outside), unit, 1.0), Error);
}

TEST_CASE("log_fpp_density: PPP special case, symmetry, zero pmf") {
  Rng rng(53);
  Domain dom = Domain::unit_square();
  const double lambda = 2.5;
  auto count_pmf = [lambda, &dom](int n) {
    double m = lambda * dom.volume();
    return std::exp(-m + n * std::log(m) - log_factorial(n));
  };
  auto log_scatter = [&dom](const PointPattern& p) {
    return -p.size() * std::log(dom.volume());
  };
  for (int rep = 0; rep < 1000; ++rep) {
    PointPattern p = sample_homogeneous_ppp(rng, dom, lambda);
    double via_fpp = log_fpp_density(p, count_pmf, log_scatter);
    double via_ppp = log_ppp_density(p, dom, lambda);
    CHECK(std::abs(via_fpp - via_ppp) < 1e-10);
  }

  CHECK(log_fpp_density(PointPattern(), count_pmf, log_scatter) ==
        doctest::Approx(std::log(count_pmf(0))));

  // permutation invariance
  Eigen::MatrixXd pts(3, 2);
  pts << 0.1, 0.2, 0.5, 0.6, 0.9, 0.3;
  Eigen::MatrixXd perm(3, 2);
  perm << 0.9, 0.3, 0.1, 0.2, 0.5, 0.6;
  CHECK(log_fpp_density(PointPattern(pts), count_pmf, log_scatter) ==
        doctest::Approx(log_fpp_density(PointPattern(perm), count_pmf, log_scatter)));

  auto zero_pmf = [](int n) { return n == 0 ? 1.0 : 0.0; };
  CHECK(log_fpp_density(PointPattern(pts), zero_pmf, log_scatter) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("stats: chi-square and KS behave on known cases") {
  // uniform die, fair sample
  std::vector<long> obs = {95, 105, 102, 98, 99, 101};
  std::vector<double> probs(6, 1.0 / 6.0);
  CHECK(stats::chisq_gof(obs, probs).p_value > 0.5);
  std::vector<long> bad = {10, 105, 102, 98, 99, 186};
  CHECK(stats::chisq_gof(bad, probs).p_value < 1e-6);

  Rng rng(7);
  std::vector<double> a(5000), b(5000), c(5000);
  for (int i = 0; i < 5000; ++i) {
    a[i] = rng.normal();
    b[i] = rng.normal();
    c[i] = rng.normal() + 0.2;
  }
  CHECK(stats::ks_two_sample(a, b).p_value > 0.01);
  CHECK(stats::ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("stats: batch means covers autocorrelated chains") {
  Rng rng(13);
  // AR(1) with strong correlation; naive SE would be ~3x too small
  std::vector<double> chain(20000);
  double x = 0;
  for (size_t i = 0; i < chain.size(); ++i) {
    x = 0.9 * x + rng.normal();
    chain[i] = x;
  }
  stats::MeanSe naive = stats::mean_se(chain);
  stats::MeanSe batched = stats::batch_means(chain);
  CHECK(batched.se > 2.0 * naive.se);
  CHECK(std::abs(batched.mean) < 4.0 * batched.se);
}
