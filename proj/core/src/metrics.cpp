#include "pnpmri/metrics.hpp"

#include "pnpmri/errors.hpp"
#include "pnpmri/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace pnpmri {

double rsnr(const ComplexImage &reference, const ComplexImage &estimate) {
  if (!reference.same_shape(estimate)) {
    throw DimensionError("rsnr: reference and estimate shapes differ");
  }
  const double ref = l2_norm(reference);
  if (ref == 0.0) {
    throw UndefinedMetricError("rsnr: reference image is zero");
  }
  const double err = l2_norm(reference - estimate);
  if (err == 0.0) {
    return kRsnrCap;
  }
  return std::min(kRsnrCap, 20.0 * std::log10(ref / err));
}

double snr_db(const ComplexImage &signal, const ComplexImage &noise) {
  if (!signal.same_shape(noise)) {
    throw DimensionError("snr_db: shapes differ");
  }
  const double s = l2_norm(signal), n = l2_norm(noise);
  if (s == 0.0 || n == 0.0) {
    throw UndefinedMetricError("snr_db: signal or noise is zero");
  }
  return 20.0 * std::log10(s / n);
}

} // namespace pnpmri
