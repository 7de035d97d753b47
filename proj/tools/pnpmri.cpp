// pnpmri command-line front end.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 usage, 3 file/format,
// 4 certification, 5 dimension or parameter, 6 numerical failure.

#include "pnpmri/cnn.hpp"
#include "pnpmri/coils.hpp"
#include "pnpmri/cplx_io.hpp"
#include "pnpmri/errors.hpp"
#include "pnpmri/experiment.hpp"
#include "pnpmri/metrics.hpp"
#include "pnpmri/phantom.hpp"
#include "pnpmri/png_io.hpp"
#include "pnpmri/random.hpp"
#include "pnpmri/sampling.hpp"
#include "pnpmri/sense.hpp"
#include "pnpmri/weights.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace pnpmri;

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kFormat = 3,
  kCertification = 4,
  kInvalid = 5,
  kNumerical = 6,
};

int exit_code_for(const std::exception &e) {
  if (dynamic_cast<const FormatError *>(&e)) {
    return kFormat;
  }
  if (dynamic_cast<const CertificationError *>(&e)) {
    return kCertification;
  }
  if (dynamic_cast<const DimensionError *>(&e) || dynamic_cast<const ParameterError *>(&e) ||
      dynamic_cast<const InfeasibleSpecError *>(&e) || dynamic_cast<const EmptyMaskError *>(&e) ||
      dynamic_cast<const UndefinedMetricError *>(&e) || dynamic_cast<const DenoiserError *>(&e)) {
    return kInvalid;
  }
  if (dynamic_cast<const DivergenceError *>(&e) || dynamic_cast<const NumericalError *>(&e)) {
    return kNumerical;
  }
  return kFailure;
}

std::string png_path_for(const std::string &cplx_path) {
  std::filesystem::path p(cplx_path);
  p.replace_extension(".png");
  return p.string();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) {
    throw FormatError("cannot write " + path);
  }
}

struct PhantomArgs {
  PhantomSpec spec;
  std::string out;
  bool png = false;
  std::uint64_t seed = 0;
};

struct MaskArgs {
  MaskSpec spec;
  std::string out;
  bool png = false;
  std::uint64_t seed = 0;
};

struct SimulateArgs {
  std::string image, mask, maps, out, maps_out;
  std::size_t coils = 8;
  double snr = 0.0;
  std::uint64_t seed = 0;
};

struct ReconArgs {
  std::string kspace, mask, maps, reference, out, report, solver = "admm-pnp";
  std::string denoiser = "identity", weights, dual, prox;
  std::vector<std::string> params;
  std::size_t walsh_block = 7;
  bool timing = false, quiet = false;
  std::uint64_t seed = 0;
};

struct DenoiseArgs {
  std::string in, weights, out;
  std::size_t tile = 0;
  bool no_certify = false;
  std::uint64_t seed = 0;
};

struct EvalArgs {
  std::string reference, estimate;
  std::uint64_t seed = 0;
};

struct RunArgs {
  std::string config, output_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct CertifyArgs {
  std::string weights;
  std::size_t iters = 30;
  std::size_t grid = 8;
  double tolerance = 1e-3;
  std::uint64_t seed = 0;
};

int cmd_phantom(PhantomArgs a) {
  a.spec.seed = a.seed;
  const ComplexImage x = generate_cine_phantom(a.spec);
  write_image(a.out, x);
  if (a.png) {
    write_png(png_path_for(a.out), magnitude_montage(x));
  }
  return kOk;
}

int cmd_mask(MaskArgs a) {
  a.spec.seed = a.seed;
  const SamplingMask m = generate_mask(a.spec);
  write_mask(a.out, m);
  if (a.png) {
    // ky-t pattern: one row per frame, one column per phase-encode line.
    GrayImage img{m.nky(), m.nt(), std::vector<std::uint8_t>(m.nky() * m.nt(), 0)};
    for (std::size_t t = 0; t < m.nt(); ++t) {
      for (std::size_t ky = 0; ky < m.nky(); ++ky) {
        img.pixels[t * m.nky() + ky] = m.line_kept(ky, t) ? 255 : 0;
      }
    }
    write_png(png_path_for(a.out), img);
  }
  std::printf("acceleration %.4f (nominal %.4f)\n", acceleration_of(m), m.r_nominal());
  return kOk;
}

int cmd_simulate(const SimulateArgs &a) {
  const ComplexImage x = read_image(a.image);
  const SensitivityMaps maps =
      a.maps.empty() ? generate_coil_maps(a.coils, x.nx(), x.ny(), derive_seed(a.seed, 2)) : read_maps(a.maps);
  const SamplingMask mask =
      a.mask.empty() ? SamplingMask(x.nx(), x.ny(), x.nt(), std::vector<std::uint8_t>(x.size(), 1), 1.0)
                     : read_mask(a.mask);
  const SamplingMask full(x.nx(), x.ny(), x.nt(), std::vector<std::uint8_t>(x.size(), 1), 1.0);
  MultiCoilKSpace y = sense_forward(x, SenseModel(maps, full));
  if (a.snr > 0.0) {
    const ComplexImage flat(ImageShape{y.nkx(), y.nky(), y.nt() * y.nc()}, {y.values().begin(), y.values().end()});
    const ComplexImage noisy = add_noise(flat, a.snr, derive_seed(a.seed, 4));
    y = MultiCoilKSpace(y.shape(), {noisy.values().begin(), noisy.values().end()});
  }
  apply_mask(y, mask);
  write_kspace(a.out, y);
  if (!a.maps_out.empty()) {
    write_maps(a.maps_out, maps);
  }
  return kOk;
}

int cmd_recon(const ReconArgs &a) {
  const MultiCoilKSpace y = read_kspace(a.kspace);
  const SamplingMask mask = a.mask.empty()
                                ? SamplingMask(y.nkx(), y.nky(), y.nt(),
                                               std::vector<std::uint8_t>(y.nkx() * y.nky() * y.nt(), 1), 1.0)
                                : read_mask(a.mask);
  SensitivityMaps maps = [&] {
    if (!a.maps.empty()) {
      return read_maps(a.maps);
    }
    const auto avg = coil_images(time_average_sampled(y, mask));
    return estimate_maps_walsh(avg, a.walsh_block).maps;
  }();
  const SenseModel model(std::move(maps), mask);

  SolverSpec spec;
  spec.label = a.solver;
  spec.type = a.solver;
  if (a.solver == "admm-pnp") {
    spec.options["denoiser"] = a.denoiser;
    if (!a.weights.empty()) {
      spec.options["weights"] = a.weights;
    }
    if (!a.dual.empty()) {
      spec.options["dual"] = a.dual;
    }
  }
  if (a.solver == "fista-uwt" && !a.prox.empty()) {
    spec.options["prox"] = a.prox;
  }
  for (const auto &kv : a.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("--param expects key=value, got '" + kv + "'");
    }
    try {
      spec.sweep[kv.substr(0, eq)] = {std::stod(kv.substr(eq + 1))};
    } catch (const std::logic_error &) {
      throw ParameterError("--param value is not a number: '" + kv + "'");
    }
  }
  const auto combos = spec.combinations();
  DenoiserCache cache;
  const SolveReport rep = run_solver(spec, combos.front(), y, model, cache);

  if (!a.out.empty()) {
    write_image(a.out, rep.image);
  }
  if (!a.report.empty()) {
    write_file(a.report, report_to_json(rep, a.timing));
  }
  if (!a.quiet) {
    std::cout << report_to_text(rep);
  }
  if (!a.reference.empty()) {
    std::printf("rsnr_db %.6f\n", rsnr(read_image(a.reference), rep.image));
  }
  return kOk;
}

int cmd_denoise(const DenoiseArgs &a) {
  LoadOptions opt;
  opt.certify = !a.no_certify;
  const DenoiserNet net = load_weights(a.weights, opt);
  const ComplexImage z = read_image(a.in);
  const ComplexImage out = a.tile > 0 ? denoise_cnn_tiled(net, z, a.tile) : denoise_cnn(net, z);
  write_image(a.out, out);
  return kOk;
}

int cmd_eval(const EvalArgs &a) {
  const double v = rsnr(read_image(a.reference), read_image(a.estimate));
  if (v >= kRsnrCap) {
    std::printf("rsnr_db inf (capped at %.0f)\n", kRsnrCap);
  } else {
    std::printf("rsnr_db %.6f\n", v);
  }
  return kOk;
}

int cmd_run(const RunArgs &a) {
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (!a.output_dir.empty()) {
    cfg.output_dir = std::filesystem::absolute(a.output_dir).string();
  }
  if (a.seed) {
    cfg.seeds = {*a.seed};
  }
  ProgressFn progress;
  if (!a.quiet) {
    progress = [](const CellResult &c) {
      std::fprintf(stderr, "  %-12s R=%-4g seed=%-4llu %s %8.3f dB  %6.2fs%s%s\n", c.solver.c_str(), c.R,
                   static_cast<unsigned long long>(c.seed), c.ok ? "ok    " : "FAILED", c.ok ? c.rsnr : 0.0,
                   c.seconds, c.ok ? "" : "  ", c.error.c_str());
    };
  }
  const ExperimentResult res = run_experiment(cfg, progress);
  std::cout << results_to_text(res);
  return kOk;
}

int cmd_certify(const CertifyArgs &a) {
  LoadOptions opt;
  opt.certify = false;
  opt.require_reference_architecture = false;
  const DenoiserNet net = load_weights(a.weights, opt);
  CertificationOptions c;
  c.power_iters = a.iters;
  c.tolerance = a.tolerance;
  c.grid.nx = c.grid.ny = c.grid.nt = a.grid;
  const auto certs = certify(net, c);
  bool ok = true;
  for (const auto &cert : certs) {
    std::printf("layer %zu  estimate %.6f  declared %.6f  %s\n", cert.layer, cert.estimate, cert.declared,
                cert.passed ? "ok" : "VIOLATION");
    ok = ok && cert.passed;
  }
  std::printf("lipschitz_bound %.6f (%s)\n", lipschitz_bound(certs, net.residual_mode()),
              net.residual_mode() ? "residual" : "direct");
  std::printf("reference_architecture %s\n", net.matches_reference_architecture() ? "yes" : "no");
  if (!ok) {
    std::fprintf(stderr, "error: spectral-norm certification failed\n");
    return kCertification;
  }
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Plug-and-play ADMM reconstruction for multi-coil cine MRI"};
  app.require_subcommand(1);
  app.set_config("--config-file", "", "INI/TOML file supplying option values");

  PhantomArgs ph;
  auto *phantom = app.add_subcommand("phantom", "Generate a dynamic phantom (CPLX)");
  phantom->add_option("-o,--out", ph.out, "Output CPLX file")->required();
  phantom->add_option("--nx", ph.spec.nx);
  phantom->add_option("--ny", ph.spec.ny);
  phantom->add_option("--nt", ph.spec.nt);
  phantom->add_option("--ellipses", ph.spec.n_ellipses);
  phantom->add_option("--motion", ph.spec.motion_amplitude);
  phantom->add_flag("--png", ph.png, "Also write a magnitude montage PNG");
  phantom->add_option("--seed", ph.seed);

  MaskArgs mk;
  auto *mask = app.add_subcommand("mask", "Generate a ky-t sampling mask (CPLX + optional PNG)");
  mask->add_option("-o,--out", mk.out)->required();
  mask->add_option("--nkx", mk.spec.nkx);
  mask->add_option("--nky", mk.spec.nky);
  mask->add_option("--nt", mk.spec.nt);
  mask->add_option("-R,--acceleration", mk.spec.R);
  mask->add_option("--calib", mk.spec.calib_lines);
  mask->add_option("--asym", mk.spec.asym_echo_fraction);
  mask->add_flag("--png", mk.png);
  mask->add_option("--seed", mk.seed);

  SimulateArgs sm;
  auto *simulate = app.add_subcommand("simulate", "Simulate multi-coil k-space from an image");
  simulate->add_option("-i,--image", sm.image)->required()->check(CLI::ExistingFile);
  simulate->add_option("-o,--out", sm.out)->required();
  simulate->add_option("--mask", sm.mask)->check(CLI::ExistingFile);
  simulate->add_option("--maps", sm.maps, "Sensitivity maps (default: simulated)")->check(CLI::ExistingFile);
  simulate->add_option("--maps-out", sm.maps_out);
  simulate->add_option("--coils", sm.coils);
  simulate->add_option("--snr", sm.snr, "k-space SNR in dB (0 = noiseless)");
  simulate->add_option("--seed", sm.seed);

  ReconArgs rc;
  auto *recon = app.add_subcommand("recon", "Reconstruct one dataset with one solver");
  recon->add_option("-k,--kspace", rc.kspace)->required()->check(CLI::ExistingFile);
  recon->add_option("--mask", rc.mask)->check(CLI::ExistingFile);
  recon->add_option("--maps", rc.maps, "Sensitivity maps (default: Walsh estimate)")->check(CLI::ExistingFile);
  recon->add_option("--walsh-block", rc.walsh_block);
  recon->add_option("--solver", rc.solver)
      ->check(CLI::IsMember({"admm-pnp", "fista-uwt", "admm-tv", "lps", "cg-sense", "zero-filled"}));
  recon->add_option("--denoiser", rc.denoiser)->check(CLI::IsMember({"identity", "uwt", "soft", "cnn"}));
  recon->add_option("--weights", rc.weights)->check(CLI::ExistingFile);
  recon->add_option("--dual", rc.dual)->check(CLI::IsMember({"standard", "reversed"}));
  recon->add_option("--prox", rc.prox)->check(CLI::IsMember({"thresholding", "exact"}));
  recon->add_option("-p,--param", rc.params, "Solver parameter key=value (repeatable)");
  recon->add_option("--reference", rc.reference, "Reference image for rSNR")->check(CLI::ExistingFile);
  recon->add_option("-o,--out", rc.out);
  recon->add_option("--report", rc.report, "Per-iteration JSON report");
  recon->add_flag("--timing", rc.timing, "Include wall-clock times in the JSON report");
  recon->add_flag("-q,--quiet", rc.quiet);
  recon->add_option("--seed", rc.seed);

  DenoiseArgs dn;
  auto *denoise = app.add_subcommand("denoise", "Apply a CNN weight file to an image");
  denoise->add_option("-i,--in", dn.in)->required()->check(CLI::ExistingFile);
  denoise->add_option("-w,--weights", dn.weights)->required()->check(CLI::ExistingFile);
  denoise->add_option("-o,--out", dn.out)->required();
  denoise->add_option("--tile", dn.tile, "Tile size for overlapped tiling (0 = whole image)");
  denoise->add_flag("--no-certify", dn.no_certify);
  denoise->add_option("--seed", dn.seed);

  EvalArgs ev;
  auto *eval = app.add_subcommand("eval", "rSNR of an estimate against a reference");
  eval->add_option("reference", ev.reference)->required()->check(CLI::ExistingFile);
  eval->add_option("estimate", ev.estimate)->required()->check(CLI::ExistingFile);
  eval->add_option("--seed", ev.seed);

  RunArgs rn;
  auto *run = app.add_subcommand("run", "Run a JSON experiment configuration");
  run->add_option("config", rn.config)->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", rn.output_dir);
  run->add_option("--seed", rn.seed, "Replace the config's seed list with one seed");
  run->add_flag("-q,--quiet", rn.quiet);

  CertifyArgs ct;
  auto *cert = app.add_subcommand("certify", "Spectral-norm certification of a weight file");
  cert->add_option("weights", ct.weights)->required()->check(CLI::ExistingFile);
  cert->add_option("--iters", ct.iters);
  cert->add_option("--grid", ct.grid);
  cert->add_option("--tolerance", ct.tolerance);
  cert->add_option("--seed", ct.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc_parse = app.exit(e);
    return rc_parse == 0 ? kOk : kUsage;
  }

  try {
    if (*phantom) return cmd_phantom(ph);
    if (*mask) return cmd_mask(mk);
    if (*simulate) return cmd_simulate(sm);
    if (*recon) return cmd_recon(rc);
    if (*denoise) return cmd_denoise(dn);
    if (*eval) return cmd_eval(ev);
    if (*run) return cmd_run(rn);
    if (*cert) return cmd_certify(ct);
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  }
  return kUsage;
}
