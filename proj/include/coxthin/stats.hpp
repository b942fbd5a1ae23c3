#pragma once

#include <map>
#include <span>
#include <vector>

namespace coxthin::stats {

double chi_squared_sf(double stat, double df);  // survival function

struct TestResult {
  double stat = 0.0;
  double p_value = 1.0;
  int df = 0;
};

// Goodness of fit of observed integer counts against given class
// probabilities; classes with expected count below min_expected are pooled
// from the tail end.
TestResult chisq_gof(const std::vector<long>& observed,
                     const std::vector<double>& probs,
                     double min_expected = 5.0);

// Two-sample chi-square on two count histograms over the same classes.
TestResult chisq_two_sample(const std::vector<long>& a,
                            const std::vector<long>& b,
                            double min_expected = 5.0);

// Two-sample Kolmogorov-Smirnov with the asymptotic p-value.
TestResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  long n = 0;
};

MeanSe mean_se(std::span<const double> values);

// Batch-means standard error for an autocorrelated chain.
MeanSe batch_means(std::span<const double> chain, int n_batches = 50);

// Histogram of nonnegative integers as a dense vector 0..max.
std::vector<long> count_histogram(std::span<const int> values);

// Pad two histograms to a common length.
void pad_to_common_size(std::vector<long>& a, std::vector<long>& b);

}  // namespace coxthin::stats
