#include "pnpmri/regularizers.hpp"

#include "pnpmri/errors.hpp"

#include <cmath>

namespace pnpmri {

void soft_threshold(std::span<const cplx> z, double tau, std::span<cplx> out) {
  if (!(tau >= 0.0)) {
    throw ParameterError("soft_threshold: tau must be non-negative");
  }
  if (z.size() != out.size()) {
    throw DimensionError("soft_threshold: size mismatch");
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double mag = std::abs(z[i]);
    out[i] = mag > tau ? z[i] * ((mag - tau) / mag) : cplx(0.0);
  }
}

ComplexImage soft_threshold(const ComplexImage &z, double tau) {
  ComplexImage out(z.shape());
  soft_threshold(z.values(), tau, out.values());
  return out;
}

namespace {

struct AxisGeometry {
  std::size_t n;      // length along the axis
  std::size_t stride; // element stride along the axis
};

AxisGeometry axis_geometry(const ImageShape &s, int axis) {
  switch (axis) {
  case 0:
    return {s.nx, 1};
  case 1:
    return {s.ny, s.nx};
  default:
    return {s.nt, s.nx * s.ny};
  }
}

// out_i = (in_i ± in_{i+1})/2, or for the adjoint out_i = (in_i ± in_{i-1})/2.
void haar_axis(const ComplexImage &in, int axis, bool high, bool adjoint, ComplexImage &out) {
  const ImageShape &s = in.shape();
  const AxisGeometry g = axis_geometry(s, axis);
  const double sign = high ? -1.0 : 1.0;
  const std::size_t total = s.size();
  const std::size_t span = g.n * g.stride;
  auto src = in.values();
  auto dst = out.values();
  for (std::size_t base = 0; base < total; base += span) {
    for (std::size_t inner = 0; inner < g.stride; ++inner) {
      const std::size_t origin = base + inner;
      for (std::size_t i = 0; i < g.n; ++i) {
        const std::size_t j = adjoint ? (i + g.n - 1) % g.n : (i + 1) % g.n;
        dst[origin + i * g.stride] += 0.5 * (src[origin + i * g.stride] + sign * src[origin + j * g.stride]);
      }
    }
  }
}

ComplexImage haar_axis(const ComplexImage &in, int axis, bool high) {
  ComplexImage out(in.shape());
  haar_axis(in, axis, high, false, out);
  return out;
}

} // namespace

UwtCoeffs uwt_forward(const ComplexImage &x) {
  UwtCoeffs c;
  for (int bx = 0; bx < 2; ++bx) {
    const ComplexImage fx = haar_axis(x, 0, bx == 1);
    for (int by = 0; by < 2; ++by) {
      const ComplexImage fxy = haar_axis(fx, 1, by == 1);
      for (int bt = 0; bt < 2; ++bt) {
        c.bands[std::size_t(bx + 2 * by + 4 * bt)] = haar_axis(fxy, 2, bt == 1);
      }
    }
  }
  return c;
}

ComplexImage uwt_adjoint(const UwtCoeffs &c) {
  const ImageShape shape = c.bands[0].shape();
  for (const auto &b : c.bands) {
    if (!(b.shape() == shape)) {
      throw DimensionError("uwt_adjoint: subband shapes differ");
    }
  }
  ComplexImage x(shape);
  for (int bx = 0; bx < 2; ++bx) {
    ComplexImage fx(shape);
    for (int by = 0; by < 2; ++by) {
      ComplexImage fxy(shape);
      for (int bt = 0; bt < 2; ++bt) {
        haar_axis(c.bands[std::size_t(bx + 2 * by + 4 * bt)], 2, bt == 1, true, fxy);
      }
      haar_axis(fxy, 1, by == 1, true, fx);
    }
    haar_axis(fx, 0, bx == 1, true, x);
  }
  return x;
}

double uwt_detail_l1(const ComplexImage &x) {
  const UwtCoeffs c = uwt_forward(x);
  double s = 0.0;
  for (std::size_t b = 1; b < UwtCoeffs::kBands; ++b) {
    for (const auto &v : c.bands[b].values()) {
      s += std::abs(v);
    }
  }
  return s;
}

ComplexImage prox_uwt_l1(const ComplexImage &z, double tau) {
  if (!(tau >= 0.0)) {
    throw ParameterError("prox_uwt_l1: tau must be non-negative");
  }
  UwtCoeffs c = uwt_forward(z);
  for (std::size_t b = 1; b < UwtCoeffs::kBands; ++b) {
    soft_threshold(c.bands[b].values(), tau, c.bands[b].values());
  }
  return uwt_adjoint(c);
}

namespace {

ComplexImage forward_difference(const ComplexImage &x, int axis) {
  const ImageShape &s = x.shape();
  const AxisGeometry g = axis_geometry(s, axis);
  ComplexImage out(s);
  const std::size_t span = g.n * g.stride;
  auto src = x.values();
  auto dst = out.values();
  for (std::size_t base = 0; base < s.size(); base += span) {
    for (std::size_t inner = 0; inner < g.stride; ++inner) {
      const std::size_t origin = base + inner;
      for (std::size_t i = 0; i < g.n; ++i) {
        const std::size_t j = (i + 1) % g.n;
        dst[origin + i * g.stride] = src[origin + j * g.stride] - src[origin + i * g.stride];
      }
    }
  }
  return out;
}

// accumulates D_axisᴴ c: out_i += c_{i-1} − c_i
void add_backward_difference(const ComplexImage &c, int axis, ComplexImage &out) {
  const ImageShape &s = c.shape();
  const AxisGeometry g = axis_geometry(s, axis);
  const std::size_t span = g.n * g.stride;
  auto src = c.values();
  auto dst = out.values();
  for (std::size_t base = 0; base < s.size(); base += span) {
    for (std::size_t inner = 0; inner < g.stride; ++inner) {
      const std::size_t origin = base + inner;
      for (std::size_t i = 0; i < g.n; ++i) {
        const std::size_t j = (i + g.n - 1) % g.n;
        dst[origin + i * g.stride] += src[origin + j * g.stride] - src[origin + i * g.stride];
      }
    }
  }
}

} // namespace

FiniteDiffCoeffs finite_diff_forward(const ComplexImage &x) {
  return {forward_difference(x, 0), forward_difference(x, 1), forward_difference(x, 2)};
}

ComplexImage finite_diff_adjoint(const FiniteDiffCoeffs &c) {
  if (!c.dx.same_shape(c.dy) || !c.dx.same_shape(c.dt)) {
    throw DimensionError("finite_diff_adjoint: coefficient shapes differ");
  }
  ComplexImage out(c.dx.shape());
  add_backward_difference(c.dx, 0, out);
  add_backward_difference(c.dy, 1, out);
  add_backward_difference(c.dt, 2, out);
  return out;
}

double tv_l1(const ComplexImage &x) {
  const FiniteDiffCoeffs d = finite_diff_forward(x);
  double s = 0.0;
  for (const auto *g : {&d.dx, &d.dy, &d.dt}) {
    for (const auto &v : g->values()) {
      s += std::abs(v);
    }
  }
  return s;
}

} // namespace pnpmri
