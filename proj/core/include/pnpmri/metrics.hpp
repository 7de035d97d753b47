#pragma once

#include "pnpmri/types.hpp"

namespace pnpmri {

/// Value reported by rsnr when the estimate equals the reference exactly.
inline constexpr double kRsnrCap = 300.0;

/// 20·log10(‖x‖ / ‖x − x̂‖) in dB, capped at kRsnrCap.
double rsnr(const ComplexImage &reference, const ComplexImage &estimate);

/// 20·log10(‖x‖ / ‖w‖) for a signal and its additive noise.
double snr_db(const ComplexImage &signal, const ComplexImage &noise);

} // namespace pnpmri
