#include "coxthin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "coxthin/common.hpp"

namespace coxthin::stats {

double chi_squared_sf(double stat, double df) {
  if (df <= 0.0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, std::max(0.0, stat)));
}

namespace {

// Pool trailing classes until every expected count reaches the floor.
// Returns (pooled observed per sample, pooled expected per sample).
struct Pooled {
  std::vector<std::vector<double>> observed;
  std::vector<std::vector<double>> expected;
};

Pooled pool_classes(const std::vector<std::vector<double>>& observed,
                    const std::vector<std::vector<double>>& expected,
                    double min_expected) {
  const size_t n_samples = observed.size();
  const size_t n_classes = observed[0].size();
  Pooled out;
  out.observed.assign(n_samples, {});
  out.expected.assign(n_samples, {});
  std::vector<double> acc_obs(n_samples, 0.0), acc_exp(n_samples, 0.0);
  for (size_t k = 0; k < n_classes; ++k) {
    for (size_t s = 0; s < n_samples; ++s) {
      acc_obs[s] += observed[s][k];
      acc_exp[s] += expected[s][k];
    }
    bool full = true;
    for (size_t s = 0; s < n_samples; ++s) {
      if (acc_exp[s] < min_expected) full = false;
    }
    if (full) {
      for (size_t s = 0; s < n_samples; ++s) {
        out.observed[s].push_back(acc_obs[s]);
        out.expected[s].push_back(acc_exp[s]);
        acc_obs[s] = acc_exp[s] = 0.0;
      }
    }
  }
  // remainder merges into the last emitted class
  bool remainder = std::any_of(acc_exp.begin(), acc_exp.end(),
                               [](double e) { return e > 0.0; });
  if (remainder) {
    if (out.observed[0].empty()) {
      for (size_t s = 0; s < n_samples; ++s) {
        out.observed[s].push_back(acc_obs[s]);
        out.expected[s].push_back(acc_exp[s]);
      }
    } else {
      for (size_t s = 0; s < n_samples; ++s) {
        out.observed[s].back() += acc_obs[s];
        out.expected[s].back() += acc_exp[s];
      }
    }
  }
  return out;
}

}  // namespace

TestResult chisq_gof(const std::vector<long>& observed,
                     const std::vector<double>& probs, double min_expected) {
  require(observed.size() == probs.size(), ErrorKind::kParameter,
          "chisq_gof: size mismatch");
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  std::vector<double> obs(observed.begin(), observed.end());
  std::vector<double> exp(probs.size());
  for (size_t k = 0; k < probs.size(); ++k) exp[k] = n * probs[k];
  Pooled p = pool_classes({obs}, {exp}, min_expected);
  TestResult res;
  res.df = static_cast<int>(p.observed[0].size()) - 1;
  for (size_t k = 0; k < p.observed[0].size(); ++k) {
    double e = p.expected[0][k];
    if (e <= 0.0) continue;
    double d = p.observed[0][k] - e;
    res.stat += d * d / e;
  }
  res.p_value = chi_squared_sf(res.stat, res.df);
  return res;
}

TestResult chisq_two_sample(const std::vector<long>& a,
                            const std::vector<long>& b, double min_expected) {
  require(a.size() == b.size(), ErrorKind::kParameter,
          "chisq_two_sample: size mismatch");
  const double na = std::accumulate(a.begin(), a.end(), 0.0);
  const double nb = std::accumulate(b.begin(), b.end(), 0.0);
  require(na > 0 && nb > 0, ErrorKind::kParameter, "empty sample");
  std::vector<double> oa(a.begin(), a.end()), ob(b.begin(), b.end());
  std::vector<double> ea(a.size()), eb(b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    double pooled = (oa[k] + ob[k]) / (na + nb);
    ea[k] = na * pooled;
    eb[k] = nb * pooled;
  }
  Pooled p = pool_classes({oa, ob}, {ea, eb}, min_expected);
  TestResult res;
  res.df = static_cast<int>(p.observed[0].size()) - 1;
  for (size_t k = 0; k < p.observed[0].size(); ++k) {
    for (size_t s = 0; s < 2; ++s) {
      double e = p.expected[s][k];
      if (e <= 0.0) continue;
      double d = p.observed[s][k] - e;
      res.stat += d * d / e;
    }
  }
  res.p_value = chi_squared_sf(res.stat, res.df);
  return res;
}

TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorKind::kParameter, "empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  size_t ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::abs(ia / na - ib / nb));
  }
  TestResult res;
  res.stat = d;
  double en = std::sqrt(na * nb / (na + nb));
  double lambda = (en + 0.12 + 0.11 / en) * d;
  // asymptotic Kolmogorov tail sum
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  res.p_value = std::clamp(p, 0.0, 1.0);
  return res;
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe r;
  r.n = static_cast<long>(values.size());
  if (r.n == 0) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / r.n;
  if (r.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / (r.n - 1) / r.n);
  }
  return r;
}

MeanSe batch_means(std::span<const double> chain, int n_batches) {
  MeanSe r;
  r.n = static_cast<long>(chain.size());
  if (r.n == 0) return r;
  n_batches = std::min<long>(n_batches, r.n);
  const long batch_len = r.n / n_batches;
  std::vector<double> means;
  means.reserve(n_batches);
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (long i = b * batch_len; i < (b + 1) * batch_len; ++i) s += chain[i];
    means.push_back(s / batch_len);
  }
  MeanSe of_batches = mean_se(means);
  r.mean = of_batches.mean;
  r.se = of_batches.se;
  return r;
}

std::vector<long> count_histogram(std::span<const int> values) {
  int max_v = 0;
  for (int v : values) max_v = std::max(max_v, v);
  std::vector<long> hist(static_cast<size_t>(max_v) + 1, 0);
  for (int v : values) {
    require(v >= 0, ErrorKind::kParameter, "negative count");
    ++hist[static_cast<size_t>(v)];
  }
  return hist;
}

void pad_to_common_size(std::vector<long>& a, std::vector<long>& b) {
  size_t n = std::max(a.size(), b.size());
  a.resize(n, 0);
  b.resize(n, 0);
}

}  // namespace coxthin::stats
