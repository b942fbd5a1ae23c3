// Timing comparison of the OpenMP kernels against their serial references.
// Run: ./bench_kernels [n_points]

#include <chrono>
#include <cstdio>

#include "coxthin/kernel.hpp"
#include "coxthin/matern3.hpp"
#include "coxthin/parallel.hpp"
#include "coxthin/rng.hpp"
#include "coxthin/sgcp.hpp"

using namespace coxthin;

namespace {

double seconds(const std::chrono::steady_clock::time_point& a,
               const std::chrono::steady_clock::time_point& b) {
  return std::chrono::duration<double>(b - a).count();
}

template <class F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, seconds(t0, t1));
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-34s serial %9.4f s   omp %9.4f s   speedup %.2fx\n", name,
              serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 1500;
  std::printf("threads: %d\n", max_threads());
  Rng rng(1);
  Domain dom = Domain::unit_square();

  {
    Eigen::MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) {
      pts(i, 0) = rng.uniform();
      pts(i, 1) = rng.uniform();
    }
    Kernel k(2.0, 1.0);
    volatile double sink = 0;
    double ts = time_best_of(3, [&] { sink = cov_matrix_serial(k, pts)(0, 1); });
    double tp = time_best_of(3, [&] { sink = cov_matrix(k, pts)(0, 1); });
    report("cov_matrix", ts, tp);

    Eigen::MatrixXd a(2, 2);
    a << 1.0, 0.3, -0.2, 0.9;
    LMCParams lmc(a, (Eigen::VectorXd(2) << 3.0, 1.0).finished(),
                  Eigen::VectorXd::Zero(2));
    Eigen::MatrixXd half = pts.topRows(n / 2);
    ts = time_best_of(3, [&] { sink = lmc_cov_matrix_serial(lmc, half)(0, 1); });
    tp = time_best_of(3, [&] { sink = lmc_cov_matrix(lmc, half)(0, 1); });
    report("lmc_cov_matrix", ts, tp);
    (void)sink;
  }

  {
    Rng sub = rng.substream(2);
    matern3::SimulationResult sim = simulate_matern3(
        sub, dom, 40.0, matern3::Shadow::gaussian_bump(0.7, 0.1));
    matern3::HQuadrature quad{512};
    matern3::Shadow sh = matern3::Shadow::gaussian_bump(0.7, 0.1);
    volatile double sink = 0;
    double ts = time_best_of(3, [&] {
      sink = matern3::integral_h_serial(sim.observed, dom, sh, quad).value;
    });
    double tp = time_best_of(3, [&] {
      sink = matern3::integral_h(sim.observed, dom, sh, quad).value;
    });
    report("matern3 shadow integral (512^2)", ts, tp);
    (void)sink;
  }

  {
    // replicated-simulation driver, the workhorse of the verification runs
    sgcp::SgcpParams params;
    params.lambda = 5.0;
    params.kernel = Kernel(2.0, 1.0);
    params.dom = dom;
    const long reps = 20000;
    std::vector<int> counts(reps);
    Rng base = rng.substream(3);
    auto body = [&](std::int64_t r) {
      Rng local = base.substream(static_cast<std::uint64_t>(r));
      counts[r] = sgcp::simulate_sgcp(local, params).observed.size();
    };
    double ts = time_best_of(2, [&] { serial_reps(reps, body); });
    double tp = time_best_of(2, [&] { parallel_reps(reps, body); });
    report("sgcp simulation x20000", ts, tp);
  }

  return 0;
}
