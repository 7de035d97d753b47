#pragma once

#include "pnpmri/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace pnpmri {

class DenoiserNet;

/// Image-to-image map g(·) plugged into ADMM in place of a proximal step.
class Denoiser {
public:
  virtual ~Denoiser() = default;
  virtual ComplexImage apply(const ComplexImage &z) const = 0;
  virtual std::string name() const = 0;
  /// φ(x) when this denoiser is prox_{νφ}; empty when it is not a known prox.
  virtual std::optional<double> penalty(const ComplexImage &x, double nu) const;
};

class IdentityDenoiser final : public Denoiser {
public:
  ComplexImage apply(const ComplexImage &z) const override { return z; }
  std::string name() const override { return "identity"; }
  std::optional<double> penalty(const ComplexImage &, double) const override { return 0.0; }
};

/// prox_uwt_l1 with threshold tau; as a prox of ν·φ this is φ = (tau/ν)‖W_d x‖₁.
class UwtDenoiser final : public Denoiser {
public:
  explicit UwtDenoiser(double tau);
  ComplexImage apply(const ComplexImage &z) const override;
  std::string name() const override { return "uwt"; }
  std::optional<double> penalty(const ComplexImage &x, double nu) const override;
  double tau() const { return tau_; }

private:
  double tau_;
};

/// Entrywise complex soft-thresholding (prox of (tau/ν)‖x‖₁).
class SoftThresholdDenoiser final : public Denoiser {
public:
  explicit SoftThresholdDenoiser(double tau);
  ComplexImage apply(const ComplexImage &z) const override;
  std::string name() const override { return "soft"; }
  std::optional<double> penalty(const ComplexImage &x, double nu) const override;

private:
  double tau_;
};

/// g(z) = s · net(z / s). The input scale s moves the noise level the
/// network sees without changing its Lipschitz bound; s = 1 is the plain net.
class CnnDenoiser final : public Denoiser {
public:
  explicit CnnDenoiser(std::shared_ptr<const DenoiserNet> net, double scale = 1.0);
  ComplexImage apply(const ComplexImage &z) const override;
  std::string name() const override { return "cnn"; }
  const DenoiserNet &net() const { return *net_; }
  double scale() const { return scale_; }

private:
  std::shared_ptr<const DenoiserNet> net_;
  double scale_;
};

/// Names a denoiser in configuration files: identity | uwt(tau) | soft(tau) | cnn(weights, scale).
struct DenoiserSpec {
  std::string kind = "identity";
  double tau = 0.0;
  std::string weights;
  double scale = 1.0;
};

/// Resolve a spec. CNN weights are loaded and certified on every call; share
/// the result across solves.
std::shared_ptr<const Denoiser> make_denoiser(const DenoiserSpec &spec);

} // namespace pnpmri
