#include "coxthin/grid_gp.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>

namespace coxthin {

namespace {

std::mutex g_plan_mutex;  // FFTW planning is not thread-safe

struct FftwBuffer {
  fftw_complex* data = nullptr;
  explicit FftwBuffer(long n) {
    data = fftw_alloc_complex(static_cast<size_t>(n));
    require(data != nullptr, ErrorKind::kNumeric, "fftw allocation failed");
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  std::complex<double>* cx() {
    return reinterpret_cast<std::complex<double>*>(data);
  }
};

}  // namespace

struct GridGpSampler::Impl {
  fftw_plan backward = nullptr;
  ~Impl() {
    if (backward != nullptr) fftw_destroy_plan(backward);
  }
};

GridGpSampler::GridGpSampler(const Domain& dom, int res, const Kernel& kernel)
    : dim_(dom.dim()), res_(res) {
  require(res >= 2, ErrorKind::kParameter, "grid resolution must be >= 2");
  require(kernel.variance > 0.0, ErrorKind::kParameter,
          "grid sampler needs a positive kernel variance");
  n_cells_ = dim_ == 1 ? res_ : static_cast<long>(res_) * res_;

  centers_.resize(n_cells_, dim_);
  if (dim_ == 1) {
    double h = (dom.upper()[0] - dom.lower()[0]) / res_;
    for (int i = 0; i < res_; ++i) centers_(i, 0) = dom.lower()[0] + (i + 0.5) * h;
    cell_measure_ = h;
  } else {
    double hx = (dom.upper()[0] - dom.lower()[0]) / res_;
    double hy = (dom.upper()[1] - dom.lower()[1]) / res_;
    long k = 0;
    for (int i = 0; i < res_; ++i) {
      for (int j = 0; j < res_; ++j, ++k) {
        centers_(k, 0) = dom.lower()[0] + (i + 0.5) * hx;
        centers_(k, 1) = dom.lower()[1] + (j + 0.5) * hy;
      }
    }
    cell_measure_ = hx * hy;
  }

  // smallest padding whose clipped spectral mass is negligible; the
  // exponential kernel's embedding is never exactly nonnegative, and a few
  // per mille of clipped mass distorts the field variance by the same order,
  // far below the Monte Carlo resolution of the experiments built on this
  build(dom, kernel, 2);
  for (int factor : {3, 4}) {
    if (clipped_mass_ <= 5e-3) break;
    build(dom, kernel, factor);
  }
}

GridGpSampler::~GridGpSampler() = default;

void GridGpSampler::build(const Domain& dom, const Kernel& kernel,
                          int embed_factor) {
  embed_ = static_cast<long>(res_) * embed_factor;
  const long n_torus = dim_ == 1 ? embed_ : embed_ * embed_;

  // first circulant column: covariance at torus wrap distances
  FftwBuffer base(n_torus), spectrum(n_torus);
  auto wrap = [this](long i) {
    return static_cast<double>(std::min(i, embed_ - i));
  };
  if (dim_ == 1) {
    double h = (dom.upper()[0] - dom.lower()[0]) / res_;
    for (long i = 0; i < embed_; ++i) base.cx()[i] = kernel(wrap(i) * h);
  } else {
    double hx = (dom.upper()[0] - dom.lower()[0]) / res_;
    double hy = (dom.upper()[1] - dom.lower()[1]) / res_;
    for (long i = 0; i < embed_; ++i) {
      for (long j = 0; j < embed_; ++j) {
        base.cx()[i * embed_ + j] =
            kernel(std::hypot(wrap(i) * hx, wrap(j) * hy));
      }
    }
  }

  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    fftw_plan fwd =
        dim_ == 1 ? fftw_plan_dft_1d(static_cast<int>(embed_), base.data,
                                     spectrum.data, FFTW_FORWARD, FFTW_ESTIMATE)
                  : fftw_plan_dft_2d(static_cast<int>(embed_),
                                     static_cast<int>(embed_), base.data,
                                     spectrum.data, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);

    // the backward plan is executed later on per-call fftw-allocated buffers
    // (same alignment class as the planning buffers)
    impl_ = std::make_unique<Impl>();
    impl_->backward =
        dim_ == 1 ? fftw_plan_dft_1d(static_cast<int>(embed_), base.data,
                                     spectrum.data, FFTW_BACKWARD, FFTW_ESTIMATE)
                  : fftw_plan_dft_2d(static_cast<int>(embed_),
                                     static_cast<int>(embed_), base.data,
                                     spectrum.data, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  amplitude_.resize(n_torus);
  double pos_mass = 0.0, neg_mass = 0.0;
  for (long k = 0; k < n_torus; ++k) {
    double lam = spectrum.cx()[k].real();
    if (lam > 0.0) {
      pos_mass += lam;
      amplitude_[k] = std::sqrt(lam / static_cast<double>(n_torus));
    } else {
      neg_mass += -lam;
      amplitude_[k] = 0.0;
    }
  }
  clipped_mass_ = neg_mass / (pos_mass + neg_mass);
}

void GridGpSampler::draw_pair(Rng& rng, Eigen::VectorXd& a,
                              Eigen::VectorXd& b) const {
  const long n_torus = dim_ == 1 ? embed_ : embed_ * embed_;
  FftwBuffer in(n_torus), out(n_torus);
  std::complex<double>* in_c = in.cx();
  for (long k = 0; k < n_torus; ++k) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    in_c[k] = std::complex<double>(amplitude_[k] * z1, amplitude_[k] * z2);
  }
  fftw_execute_dft(impl_->backward, in.data, out.data);
  const std::complex<double>* out_c = out.cx();
  a.resize(n_cells_);
  b.resize(n_cells_);
  if (dim_ == 1) {
    for (int i = 0; i < res_; ++i) {
      a[i] = out_c[i].real();
      b[i] = out_c[i].imag();
    }
  } else {
    long k = 0;
    for (int i = 0; i < res_; ++i) {
      for (int j = 0; j < res_; ++j, ++k) {
        a[k] = out_c[i * embed_ + j].real();
        b[k] = out_c[i * embed_ + j].imag();
      }
    }
  }
}

Eigen::VectorXd GridGpSampler::draw(Rng& rng) const {
  Eigen::VectorXd a, b;
  draw_pair(rng, a, b);
  return a;
}

}  // namespace coxthin
