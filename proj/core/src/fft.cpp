#include "pnpmri/fft.hpp"

#include "pnpmri/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace pnpmri {

namespace {

// FFTW planning is not thread-safe; execution of a finished plan on new
// arrays is. Plans are made once per (rank, n0, n1, sign) and kept.
class PlanCache {
public:
  static PlanCache &instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n0, int n1, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(n0, n1, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) {
      return it->second;
    }
    const std::size_t n = static_cast<std::size_t>(n0) * static_cast<std::size_t>(n1);
    auto *a = fftw_alloc_complex(n);
    auto *b = fftw_alloc_complex(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = n0 == 1 ? fftw_plan_dft_1d(n1, a, b, sign, flags) : fftw_plan_dft_2d(n0, n1, a, b, sign, flags);
    fftw_free(a);
    fftw_free(b);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto &[key, plan] : plans_) {
      fftw_destroy_plan(plan);
    }
  }

private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

// Centred transform: ifftshift -> DFT -> fftshift, scaled to be unitary.
void centered_2d(std::span<const cplx> in, std::span<cplx> out, std::size_t nx, std::size_t ny, int sign) {
  const std::size_t n = nx * ny;
  if (in.size() != n || out.size() != n) {
    throw DimensionError("fft2c: buffer size does not match nx*ny");
  }
  std::vector<cplx> src(n), dst(n);
  const std::size_t hx = nx / 2, hy = ny / 2;
  for (std::size_t y = 0; y < ny; ++y) {
    const std::size_t sy = (y + hy) % ny;
    for (std::size_t x = 0; x < nx; ++x) {
      src[x + nx * y] = in[(x + hx) % nx + nx * sy];
    }
  }
  fftw_plan plan = PlanCache::instance().get(static_cast<int>(ny), static_cast<int>(nx), sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex *>(src.data()), reinterpret_cast<fftw_complex *>(dst.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const std::size_t bx = nx - hx, by = ny - hy;
  for (std::size_t y = 0; y < ny; ++y) {
    const std::size_t sy = (y + by) % ny;
    for (std::size_t x = 0; x < nx; ++x) {
      out[x + nx * y] = dst[(x + bx) % nx + nx * sy] * scale;
    }
  }
}

ComplexImage centered_t(const ComplexImage &x, int sign) {
  const std::size_t nt = x.nt(), npix = x.nx() * x.ny();
  ComplexImage out(x.shape());
  std::vector<cplx> src(nt), dst(nt);
  fftw_plan plan = PlanCache::instance().get(1, static_cast<int>(nt), sign);
  const std::size_t h = nt / 2, b = nt - h;
  const double scale = 1.0 / std::sqrt(static_cast<double>(nt));
  auto xin = x.values();
  auto xout = out.values();
  for (std::size_t p = 0; p < npix; ++p) {
    for (std::size_t t = 0; t < nt; ++t) {
      src[t] = xin[p + npix * ((t + h) % nt)];
    }
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex *>(src.data()),
                     reinterpret_cast<fftw_complex *>(dst.data()));
    for (std::size_t t = 0; t < nt; ++t) {
      xout[p + npix * t] = dst[(t + b) % nt] * scale;
    }
  }
  return out;
}

} // namespace

void fft2c(std::span<const cplx> in, std::span<cplx> out, std::size_t nx, std::size_t ny) {
  centered_2d(in, out, nx, ny, FFTW_FORWARD);
}

void ifft2c(std::span<const cplx> in, std::span<cplx> out, std::size_t nx, std::size_t ny) {
  centered_2d(in, out, nx, ny, FFTW_BACKWARD);
}

std::vector<cplx> fft2c(std::span<const cplx> in, std::size_t nx, std::size_t ny) {
  std::vector<cplx> out(in.size());
  fft2c(in, out, nx, ny);
  return out;
}

std::vector<cplx> ifft2c(std::span<const cplx> in, std::size_t nx, std::size_t ny) {
  std::vector<cplx> out(in.size());
  ifft2c(in, out, nx, ny);
  return out;
}

ComplexImage fft_t(const ComplexImage &x) { return centered_t(x, FFTW_FORWARD); }
ComplexImage ifft_t(const ComplexImage &x) { return centered_t(x, FFTW_BACKWARD); }

} // namespace pnpmri
