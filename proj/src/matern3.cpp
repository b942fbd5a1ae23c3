#include "coxthin/matern3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "coxthin/parallel.hpp"
#include "coxthin/stats.hpp"

namespace coxthin::matern3 {

double Shadow::spatial(const Eigen::VectorXd& s,
                       const Eigen::VectorXd& s_star) const {
  const double d = (s - s_star).norm();
  if (kind == Kind::kDeterministic) {
    return d < radius ? 1.0 : 0.0;  // strict inequality
  }
  return kappa * std::exp(-d * d / (2.0 * ell * ell));
}

double shadow_eval(const Shadow& sh, const Eigen::VectorXd& s, double t,
                   const Eigen::VectorXd& s_star, double t_star) {
  if (!(t > t_star)) return 0.0;
  return sh.spatial(s, s_star);
}

double combined_shadow_h(const Eigen::VectorXd& s, double t,
                         const TimedPattern& observed, const Shadow& sh) {
  double survive = 1.0;
  for (int j = 0; j < observed.size(); ++j) {
    survive *= 1.0 - shadow_eval(sh, s, t, observed.location(j),
                                 observed.times()[j]);
  }
  return 1.0 - survive;
}

namespace {

TimedPattern make_timed(Eigen::MatrixXd locs, Eigen::VectorXd times,
                        int colour) {
  const int n = static_cast<int>(locs.rows());
  return TimedPattern(std::move(locs), std::move(times), std::nullopt,
                      Eigen::VectorXi::Constant(n, colour));
}

std::vector<int> time_order(const Eigen::VectorXd& times) {
  std::vector<int> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return times[a] < times[b]; });
  return order;
}

}  // namespace

SimulationResult simulate_matern3(Rng& rng, const Domain& dom, double lambda,
                                  const Shadow& sh) {
  PointPattern base = sample_homogeneous_ppp(rng, dom, lambda);
  const int n = base.size();
  Eigen::VectorXd times(n);
  for (int i = 0; i < n; ++i) times[i] = rng.uniform();

  std::vector<int> order = time_order(times);
  std::vector<char> kept(n, 0);
  for (int rank = 0; rank < n; ++rank) {
    const int i = order[rank];
    bool shadowed = false;
    for (int prev = 0; prev < rank && !shadowed; ++prev) {
      const int j = order[prev];
      if (!kept[j]) continue;
      const double k = sh.spatial(base.point(i), base.point(j));
      if (sh.kind == Shadow::Kind::kDeterministic) {
        shadowed = k > 0.0;
      } else {
        shadowed = rng.uniform() < k;
      }
    }
    kept[i] = shadowed ? 0 : 1;
  }

  int n_obs = 0;
  for (int i = 0; i < n; ++i) n_obs += kept[i];
  Eigen::MatrixXd obs_locs(n_obs, dom.dim()), thin_locs(n - n_obs, dom.dim());
  Eigen::VectorXd obs_t(n_obs), thin_t(n - n_obs);
  int io = 0, it = 0;
  for (int i = 0; i < n; ++i) {
    if (kept[i]) {
      obs_locs.row(io) = base.points().row(i);
      obs_t[io++] = times[i];
    } else {
      thin_locs.row(it) = base.points().row(i);
      thin_t[it++] = times[i];
    }
  }
  return SimulationResult{make_timed(std::move(thin_locs), thin_t, 0),
                          make_timed(std::move(obs_locs), obs_t, 1)};
}

double log_label_scatter(const TimedPattern& coloured, const Shadow& sh) {
  require(coloured.empty() || (coloured.has_times() && coloured.has_colours()),
          ErrorKind::kStructural, "pattern needs times and colour labels");
  const int n = coloured.size();
  double lp = 0.0;
  for (int i = 0; i < n; ++i) {
    double survive = 1.0;
    for (int j = 0; j < n; ++j) {
      if (coloured.colours()[j] != 1) continue;  // only observed points shadow
      survive *= 1.0 - shadow_eval(sh, coloured.location(i), coloured.times()[i],
                                   coloured.location(j), coloured.times()[j]);
    }
    const double p = coloured.colours()[i] == 1 ? survive : 1.0 - survive;
    lp += std::log(p);
  }
  return lp;
}

double log_joint_density_m3(const TimedPattern& thinned,
                            const TimedPattern& observed, const Domain& dom,
                            double lambda, const Shadow& sh) {
  require(lambda > 0.0, ErrorKind::kParameter, "lambda must be positive");
  const int n0 = thinned.size(), n1 = observed.size();
  double lp = -lambda * dom.volume() + (n0 + n1) * std::log(lambda) -
              log_factorial(n0) - log_factorial(n1);
  for (int i = 0; i < n0; ++i) {
    lp += std::log(
        combined_shadow_h(thinned.location(i), thinned.times()[i], observed, sh));
  }
  for (int i = 0; i < n1; ++i) {
    lp += std::log(1.0 - combined_shadow_h(observed.location(i),
                                           observed.times()[i], observed, sh));
  }
  return lp;
}

// ---------------------------------------------------------------------------
// int_{S x [0,1]} h(s,t; observed) ds dt

namespace {

// exact deterministic path in d=1: per time slab, total length of the union
// of intervals clipped to the domain
double interval_union_integral(const TimedPattern& observed, const Domain& dom,
                               double R) {
  const int m = observed.size();
  std::vector<int> order = time_order(observed.times());
  double integral = 0.0;
  std::vector<std::pair<double, double>> intervals;
  for (int k = 0; k < m; ++k) {
    const int j = order[k];
    double lo = std::max(dom.lower()[0], observed.locations()(j, 0) - R);
    double hi = std::min(dom.upper()[0], observed.locations()(j, 0) + R);
    if (hi > lo) intervals.emplace_back(lo, hi);
    double t_next = k + 1 < m ? observed.times()[order[k + 1]] : 1.0;
    double slab = t_next - observed.times()[j];
    if (slab <= 0.0 || intervals.empty()) continue;
    std::vector<std::pair<double, double>> sorted = intervals;
    std::sort(sorted.begin(), sorted.end());
    double len = 0.0, cur_lo = sorted[0].first, cur_hi = sorted[0].second;
    for (size_t q = 1; q < sorted.size(); ++q) {
      if (sorted[q].first <= cur_hi) {
        cur_hi = std::max(cur_hi, sorted[q].second);
      } else {
        len += cur_hi - cur_lo;
        cur_lo = sorted[q].first;
        cur_hi = sorted[q].second;
      }
    }
    len += cur_hi - cur_lo;
    integral += slab * len;
  }
  return integral;
}

double lens_area(double d, double R) {
  if (d >= 2.0 * R) return 0.0;
  return 2.0 * R * R * std::acos(d / (2.0 * R)) -
         0.5 * d * std::sqrt(4.0 * R * R - d * d);
}

// exact deterministic path in d=2 with pairwise inclusion-exclusion; valid
// only when every disc lies inside the domain and no three discs can share a
// point (conservative test on pairwise distances)
bool discs_admit_exact(const TimedPattern& observed, const Domain& dom,
                       double R) {
  const int m = observed.size();
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < 2; ++c) {
      if (observed.locations()(i, c) - R < dom.lower()[c] ||
          observed.locations()(i, c) + R > dom.upper()[c]) {
        return false;
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      if ((observed.location(i) - observed.location(j)).norm() >= 2.0 * R) continue;
      for (int k = j + 1; k < m; ++k) {
        if ((observed.location(i) - observed.location(k)).norm() < 2.0 * R &&
            (observed.location(j) - observed.location(k)).norm() < 2.0 * R) {
          return false;  // a triple overlap is possible
        }
      }
    }
  }
  return true;
}

double disc_union_integral(const TimedPattern& observed, double R) {
  const int m = observed.size();
  std::vector<int> order = time_order(observed.times());
  double integral = 0.0;
  double area = 0.0;
  for (int k = 0; k < m; ++k) {
    const int j = order[k];
    area += std::numbers::pi * R * R;
    for (int prev = 0; prev < k; ++prev) {
      area -= lens_area(
          (observed.location(j) - observed.location(order[prev])).norm(), R);
    }
    double t_next = k + 1 < m ? observed.times()[order[k + 1]] : 1.0;
    integral += (t_next - observed.times()[j]) * area;
  }
  return integral;
}

// gridded path, exact in time: per pixel the time integral is piecewise
// linear in the sorted arrival times with the running survival product
template <bool Parallel>
double grid_integral(const TimedPattern& observed, const Domain& dom,
                     const Shadow& sh, int res) {
  QuadratureGrid grid = QuadratureGrid::midpoint(dom, res);
  std::vector<int> order = time_order(observed.times());
  const long n_pix = grid.nodes.rows();
  std::vector<double> per_pixel(n_pix, 0.0);
  auto body = [&](std::int64_t pix) {
    Eigen::VectorXd s = grid.nodes.row(pix).transpose();
    double survive = 1.0;
    double acc = 0.0;
    for (size_t k = 0; k < order.size(); ++k) {
      const int j = order[k];
      survive *= 1.0 - sh.spatial(s, observed.location(j));
      double t_next =
          k + 1 < order.size() ? observed.times()[order[k + 1]] : 1.0;
      acc += (t_next - observed.times()[j]) * (1.0 - survive);
    }
    per_pixel[pix] = acc;
  };
  if constexpr (Parallel) {
    parallel_reps(n_pix, body);
  } else {
    serial_reps(n_pix, body);
  }
  double total = 0.0;
  for (double v : per_pixel) total += v;
  return total * grid.weight;
}

template <bool Parallel>
HIntegral integral_h_impl(const TimedPattern& observed, const Domain& dom,
                          const Shadow& sh, const HQuadrature& quad) {
  require(observed.empty() || observed.has_times(), ErrorKind::kStructural,
          "observed pattern needs times");
  HIntegral out;
  if (observed.empty()) {
    out.value = 0.0;
    out.exact = true;
    return out;
  }
  if (sh.kind == Shadow::Kind::kDeterministic) {
    if (dom.dim() == 1) {
      out.value = interval_union_integral(observed, dom, sh.radius);
      out.exact = true;
      return out;
    }
    if (discs_admit_exact(observed, dom, sh.radius)) {
      out.value = disc_union_integral(observed, sh.radius);
      out.exact = true;
      return out;
    }
  }
  out.value = grid_integral<Parallel>(observed, dom, sh, quad.space_res);
  out.exact = false;
  return out;
}

}  // namespace

HIntegral integral_h(const TimedPattern& observed, const Domain& dom,
                     const Shadow& sh, const HQuadrature& quad) {
  return integral_h_impl<true>(observed, dom, sh, quad);
}

HIntegral integral_h_serial(const TimedPattern& observed, const Domain& dom,
                            const Shadow& sh, const HQuadrature& quad) {
  return integral_h_impl<false>(observed, dom, sh, quad);
}

double log_marginal_density_m3(const TimedPattern& observed, const Domain& dom,
                               double lambda, const Shadow& sh,
                               const HQuadrature& quad) {
  require(lambda > 0.0, ErrorKind::kParameter, "lambda must be positive");
  const int n1 = observed.size();
  const double int_h = integral_h(observed, dom, sh, quad).value;
  double lp = -lambda * (dom.volume() - int_h) + n1 * std::log(lambda) -
              log_factorial(n1);
  for (int i = 0; i < n1; ++i) {
    lp += std::log(1.0 - combined_shadow_h(observed.location(i),
                                           observed.times()[i], observed, sh));
  }
  return lp;
}

double log_conditional_ppp_density(const TimedPattern& thinned,
                                   const TimedPattern& observed,
                                   const Domain& dom, double lambda,
                                   const Shadow& sh, const HQuadrature& quad) {
  const double int_h = integral_h(observed, dom, sh, quad).value;
  double lp = -lambda * int_h - log_factorial(thinned.size());
  for (int i = 0; i < thinned.size(); ++i) {
    double h = combined_shadow_h(thinned.location(i), thinned.times()[i],
                                 observed, sh);
    lp += std::log(lambda) + std::log(h);
  }
  return lp;
}

VerifyReport verify_matern3(Rng& rng, const Domain& dom,
                            const VerifyConfig& config) {
  VerifyReport report;
  report.seed = rng.seed();
  report.n_configs = 2 * config.n_configs;
  report.n_hardcore_sims = config.n_hardcore_sims;
  report.n_cond_draws = config.n_cond_draws;

  // density-chain identity on simulated configurations, both shadow kinds
  const Shadow shadows[2] = {Shadow::deterministic(config.radius),
                             Shadow::gaussian_bump(0.8, config.radius)};
  Rng chain_stream = rng.substream(1);
  for (int kind = 0; kind < 2; ++kind) {
    const Shadow& sh = shadows[kind];
    for (long c = 0; c < config.n_configs; ++c) {
      Rng local = chain_stream.substream(static_cast<std::uint64_t>(kind * config.n_configs + c));
      SimulationResult sim = simulate_matern3(local, dom, config.lambda, sh);
      double joint = log_joint_density_m3(sim.thinned, sim.observed, dom,
                                          config.lambda, sh);
      double marginal =
          log_marginal_density_m3(sim.observed, dom, config.lambda, sh);
      double cond = log_conditional_ppp_density(sim.thinned, sim.observed, dom,
                                                config.lambda, sh);
      report.chain_max_abs_err =
          std::max(report.chain_max_abs_err, std::abs(joint - marginal - cond));
    }
  }

  // deterministic hard-core property
  {
    const Shadow sh = Shadow::deterministic(config.radius);
    Rng hc_stream = rng.substream(2);
    std::vector<char> violated(config.n_hardcore_sims, 0);
    parallel_reps(config.n_hardcore_sims, [&](std::int64_t r) {
      Rng local = hc_stream.substream(static_cast<std::uint64_t>(r));
      SimulationResult sim = simulate_matern3(local, dom, config.lambda, sh);
      const auto& obs = sim.observed;
      for (int i = 0; i < obs.size() && !violated[r]; ++i) {
        for (int j = i + 1; j < obs.size(); ++j) {
          if ((obs.location(i) - obs.location(j)).norm() < config.radius) {
            violated[r] = 1;
            break;
          }
        }
      }
    });
    for (char v : violated) report.hardcore_violations += v;
  }

  // conditional count law with one observed point at t=0 fully shadowing a
  // disc of the requested area inside the domain
  {
    const double r_disc = std::sqrt(config.shadow_area / std::numbers::pi);
    Eigen::MatrixXd obs_loc(1, dom.dim());
    for (int c = 0; c < dom.dim(); ++c) {
      obs_loc(0, c) = 0.5 * (dom.lower()[c] + dom.upper()[c]);
    }
    Eigen::VectorXd obs_t(1);
    obs_t[0] = 0.0;
    TimedPattern observed(obs_loc, obs_t, std::nullopt,
                          Eigen::VectorXi::Constant(1, 1));
    const Shadow sh = Shadow::deterministic(r_disc);
    Rng cond_stream = rng.substream(3);
    std::vector<int> counts(config.n_cond_draws);
    parallel_reps(config.n_cond_draws, [&](std::int64_t r) {
      Rng local = cond_stream.substream(static_cast<std::uint64_t>(r));
      counts[r] =
          sample_conditional_thinned_m3(local, observed, dom, config.cond_lambda, sh)
              .size();
    });
    double mean = 0;
    for (int c : counts) mean += c;
    report.cond_count_mean = mean / static_cast<double>(config.n_cond_draws);
    const double target_mean = config.cond_lambda * config.shadow_area;
    std::vector<long> hist = stats::count_histogram(counts);
    std::vector<double> pmf(hist.size() + 1);
    double tail = 1.0;
    for (size_t k = 0; k < hist.size(); ++k) {
      pmf[k] = std::exp(-target_mean + k * std::log(target_mean) -
                        log_factorial(static_cast<int>(k)));
      tail -= pmf[k];
    }
    pmf.back() = std::max(0.0, tail);
    std::vector<long> hist_padded = hist;
    hist_padded.push_back(0);
    report.cond_count_chisq_p = stats::chisq_gof(hist_padded, pmf).p_value;
  }
  return report;
}

TimedPattern sample_conditional_thinned_m3(Rng& rng,
                                           const TimedPattern& observed,
                                           const Domain& dom, double lambda,
                                           const Shadow& sh) {
  require(lambda > 0.0, ErrorKind::kParameter, "lambda must be positive");
  PointPattern base = sample_homogeneous_ppp(rng, dom, lambda);
  const int n = base.size();
  Eigen::VectorXd times(n);
  for (int i = 0; i < n; ++i) times[i] = rng.uniform();
  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    double h = combined_shadow_h(base.point(i), times[i], observed, sh);
    if (rng.uniform() < h) keep.push_back(i);
  }
  Eigen::MatrixXd locs(static_cast<int>(keep.size()), dom.dim());
  Eigen::VectorXd ts(static_cast<int>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    locs.row(static_cast<int>(k)) = base.points().row(keep[k]);
    ts[static_cast<int>(k)] = times[keep[k]];
  }
  return make_timed(std::move(locs), ts, 0);
}

}  // namespace coxthin::matern3
