#include "pnpmri/denoisers.hpp"

#include "pnpmri/cnn.hpp"
#include "pnpmri/errors.hpp"
#include "pnpmri/linalg.hpp"
#include "pnpmri/regularizers.hpp"
#include "pnpmri/weights.hpp"

#include <cmath>

namespace pnpmri {

std::optional<double> Denoiser::penalty(const ComplexImage &, double) const { return std::nullopt; }

UwtDenoiser::UwtDenoiser(double tau) : tau_(tau) {
  if (!(tau >= 0.0)) {
    throw ParameterError("UWT denoiser threshold must be non-negative");
  }
}

ComplexImage UwtDenoiser::apply(const ComplexImage &z) const { return prox_uwt_l1(z, tau_); }

std::optional<double> UwtDenoiser::penalty(const ComplexImage &x, double nu) const {
  return tau_ / nu * uwt_detail_l1(x);
}

SoftThresholdDenoiser::SoftThresholdDenoiser(double tau) : tau_(tau) {
  if (!(tau >= 0.0)) {
    throw ParameterError("soft-threshold denoiser threshold must be non-negative");
  }
}

ComplexImage SoftThresholdDenoiser::apply(const ComplexImage &z) const { return soft_threshold(z, tau_); }

std::optional<double> SoftThresholdDenoiser::penalty(const ComplexImage &x, double nu) const {
  return tau_ / nu * l1_norm(x.values());
}

CnnDenoiser::CnnDenoiser(std::shared_ptr<const DenoiserNet> net, double scale)
    : net_(std::move(net)), scale_(scale) {
  if (!net_) {
    throw DenoiserError("CNN denoiser needs a network");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("CNN denoiser scale must be positive");
  }
}

ComplexImage CnnDenoiser::apply(const ComplexImage &z) const {
  if (scale_ == 1.0) {
    return denoise_cnn(*net_, z);
  }
  ComplexImage out = denoise_cnn(*net_, cplx(1.0 / scale_) * z);
  out *= cplx(scale_);
  return out;
}

std::shared_ptr<const Denoiser> make_denoiser(const DenoiserSpec &spec) {
  if (spec.kind == "identity") {
    return std::make_shared<IdentityDenoiser>();
  }
  if (spec.kind == "uwt") {
    return std::make_shared<UwtDenoiser>(spec.tau);
  }
  if (spec.kind == "soft") {
    return std::make_shared<SoftThresholdDenoiser>(spec.tau);
  }
  if (spec.kind == "cnn") {
    if (spec.weights.empty()) {
      throw DenoiserError("cnn denoiser requires a weight file");
    }
    auto net = std::make_shared<const DenoiserNet>(load_weights(spec.weights));
    return std::make_shared<CnnDenoiser>(std::move(net), spec.scale);
  }
  throw DenoiserError("unknown denoiser '" + spec.kind + "'");
}

} // namespace pnpmri
