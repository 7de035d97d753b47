#include "pnpmri/phantom.hpp"

#include "pnpmri/errors.hpp"
#include "pnpmri/linalg.hpp"
#include "pnpmri/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pnpmri {

namespace {

constexpr double kPi = std::numbers::pi;

double norm_coord(std::size_t i, std::size_t n) {
  const double half = static_cast<double>(n) / 2.0;
  return (static_cast<double>(i) - half) / half;
}

} // namespace

double Ellipse::scale_at(std::size_t t, std::size_t nt, double amplitude) const {
  const double phase = 2.0 * kPi * static_cast<double>(t) / static_cast<double>(nt);
  return 1.0 + motion * amplitude * std::cos(phase);
}

bool Ellipse::contains(double u, double v, double scale) const {
  const double du = u - cx, dv = v - cy;
  const double c = std::cos(angle), s = std::sin(angle);
  const double p = (c * du + s * dv) / (ra * scale);
  const double q = (-s * du + c * dv) / (rb * scale);
  return p * p + q * q <= 1.0;
}

PhantomLayout phantom_layout(const PhantomSpec &spec) {
  if (spec.n_ellipses == 0) {
    throw ParameterError("n_ellipses must be positive");
  }
  if (spec.motion_amplitude < 0.0 || spec.motion_amplitude > 0.5) {
    throw ParameterError("motion_amplitude must lie in [0, 0.5]");
  }
  Rng rng(spec.seed);
  PhantomLayout layout;

  const auto shading = [&rng](Ellipse &e, double g) {
    e.gx = rng.uniform(-g, g);
    e.gy = rng.uniform(-g, g);
  };

  // Ventricle first in draw order of the generator, painted last.
  Ellipse ventricle;
  ventricle.cx = rng.uniform(-0.12, 0.12);
  ventricle.cy = rng.uniform(-0.12, 0.12);
  ventricle.ra = rng.uniform(0.16, 0.24);
  ventricle.rb = ventricle.ra * rng.uniform(0.75, 1.0);
  ventricle.angle = rng.uniform(0.0, kPi);
  ventricle.intensity = rng.uniform(0.85, 1.0);
  ventricle.motion = 1.0;
  shading(ventricle, 0.15);

  if (spec.n_ellipses >= 2) {
    Ellipse body;
    body.cx = rng.uniform(-0.04, 0.04);
    body.cy = rng.uniform(-0.04, 0.04);
    body.ra = rng.uniform(0.78, 0.9);
    body.rb = rng.uniform(0.62, 0.76);
    body.angle = rng.uniform(-0.25, 0.25);
    body.intensity = rng.uniform(0.3, 0.45);
    shading(body, 0.25);
    layout.ellipses.push_back(body);
  }

  std::vector<Ellipse> organs;
  for (std::size_t i = 3; i < spec.n_ellipses; ++i) {
    Ellipse organ;
    const double rad = rng.uniform(0.35, 0.6);
    const double ang = rng.uniform(0.0, 2.0 * kPi);
    organ.cx = rad * std::cos(ang);
    organ.cy = 0.8 * rad * std::sin(ang);
    organ.ra = rng.uniform(0.06, 0.2);
    organ.rb = organ.ra * rng.uniform(0.5, 1.0);
    organ.angle = rng.uniform(0.0, kPi);
    organ.intensity = rng.uniform(0.1, 0.9);
    shading(organ, 0.3);
    organs.push_back(organ);
  }
  layout.ellipses.insert(layout.ellipses.end(), organs.begin(), organs.end());

  if (spec.n_ellipses >= 3) {
    Ellipse myo = ventricle;
    const double wall = rng.uniform(0.06, 0.1);
    myo.ra = ventricle.ra + wall;
    myo.rb = ventricle.rb + wall;
    myo.intensity = rng.uniform(0.18, 0.3);
    myo.motion = 0.5 * ventricle.ra / myo.ra;
    shading(myo, 0.1);
    layout.ellipses.push_back(myo);
  }
  layout.ellipses.push_back(ventricle);

  layout.phase[0] = rng.uniform(-kPi, kPi);
  layout.phase[1] = rng.uniform(-kPi / 3, kPi / 3);
  layout.phase[2] = rng.uniform(-kPi / 3, kPi / 3);
  for (int k = 3; k < 6; ++k) {
    layout.phase[k] = rng.uniform(-kPi / 6, kPi / 6);
  }
  return layout;
}

ComplexImage generate_cine_phantom(const PhantomSpec &spec) {
  if (spec.nx < 16 || spec.ny < 16 || spec.nt < 4) {
    throw DimensionError("phantom requires nx, ny >= 16 and nt >= 4");
  }
  const PhantomLayout layout = phantom_layout(spec);
  ComplexImage img(spec.nx, spec.ny, spec.nt);

  std::vector<double> magnitude(spec.nx * spec.ny * spec.nt, 0.0);
  double peak = 0.0;
  for (std::size_t t = 0; t < spec.nt; ++t) {
    for (std::size_t y = 0; y < spec.ny; ++y) {
      const double v = norm_coord(y, spec.ny);
      for (std::size_t x = 0; x < spec.nx; ++x) {
        const double u = norm_coord(x, spec.nx);
        double m = 0.0;
        for (const auto &e : layout.ellipses) {
          if (e.contains(u, v, e.scale_at(t, spec.nt, spec.motion_amplitude))) {
            m = e.intensity * (1.0 + e.gx * (u - e.cx) + e.gy * (v - e.cy));
          }
        }
        m = std::max(m, 0.0);
        magnitude[x + spec.nx * (y + spec.ny * t)] = m;
        peak = std::max(peak, m);
      }
    }
  }
  const double inv_peak = peak > 0.0 ? 1.0 / peak : 0.0;
  const double *c = layout.phase;
  for (std::size_t t = 0; t < spec.nt; ++t) {
    for (std::size_t y = 0; y < spec.ny; ++y) {
      const double v = norm_coord(y, spec.ny);
      for (std::size_t x = 0; x < spec.nx; ++x) {
        const double u = norm_coord(x, spec.nx);
        const double phi = c[0] + c[1] * u + c[2] * v + c[3] * u * u + c[4] * u * v + c[5] * v * v;
        const double m = magnitude[x + spec.nx * (y + spec.ny * t)] * inv_peak;
        img(x, y, t) = std::polar(m, phi);
      }
    }
  }
  return img;
}

std::size_t ventricle_area(const PhantomSpec &spec, std::size_t t) {
  const PhantomLayout layout = phantom_layout(spec);
  const Ellipse &e = layout.ventricle();
  const double scale = e.scale_at(t, spec.nt, spec.motion_amplitude);
  std::size_t area = 0;
  for (std::size_t y = 0; y < spec.ny; ++y) {
    for (std::size_t x = 0; x < spec.nx; ++x) {
      area += e.contains(norm_coord(x, spec.nx), norm_coord(y, spec.ny), scale) ? 1 : 0;
    }
  }
  return area;
}

SensitivityMaps generate_coil_maps(std::size_t nc, std::size_t nx, std::size_t ny, std::uint64_t seed) {
  if (nc == 0) {
    throw ParameterError("coil count must be positive");
  }
  SensitivityMaps maps(nc, nx, ny);
  Rng rng(seed);
  for (std::size_t c = 0; c < nc; ++c) {
    const double theta = 2.0 * kPi * static_cast<double>(c) / static_cast<double>(nc);
    const double cx = std::cos(theta), cy = std::sin(theta);
    const double width = rng.uniform(0.6, 0.9);
    const double slope_x = rng.uniform(-kPi / 4, kPi / 4);
    const double slope_y = rng.uniform(-kPi / 4, kPi / 4);
    const double offset = rng.uniform(-kPi, kPi);
    for (std::size_t y = 0; y < ny; ++y) {
      const double v = norm_coord(y, ny);
      for (std::size_t x = 0; x < nx; ++x) {
        const double u = norm_coord(x, nx);
        const double d2 = (u - cx) * (u - cx) + (v - cy) * (v - cy);
        const double mag = std::exp(-d2 / (2.0 * width * width));
        maps(c, x, y) = std::polar(mag, offset + slope_x * u + slope_y * v);
      }
    }
  }
  maps.normalize();
  return maps;
}

ComplexImage add_noise(const ComplexImage &x, double snr_db, std::uint64_t seed) {
  const double signal = l2_norm(x);
  if (signal == 0.0) {
    throw UndefinedMetricError("add_noise: SNR undefined for an all-zero image");
  }
  Rng rng(seed);
  ComplexImage w(x.shape());
  for (auto &v : w.values()) {
    const double re = rng.normal();
    const double im = rng.normal();
    v = {re, im};
  }
  const double realized = l2_norm(w);
  const double target = signal * std::pow(10.0, -snr_db / 20.0);
  w *= target / realized;
  return x + w;
}

ComplexImage temporal_mean(const ComplexImage &x) {
  ComplexImage mean(x.nx(), x.ny(), 1);
  const std::size_t npix = x.nx() * x.ny();
  for (std::size_t t = 0; t < x.nt(); ++t) {
    auto f = x.frame(t);
    for (std::size_t p = 0; p < npix; ++p) {
      mean[p] += f[p];
    }
  }
  mean *= 1.0 / static_cast<double>(x.nt());
  return mean;
}

} // namespace pnpmri
