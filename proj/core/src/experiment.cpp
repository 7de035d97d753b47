#include "pnpmri/experiment.hpp"

#include "pnpmri/cg.hpp"
#include "pnpmri/cnn.hpp"
#include "pnpmri/coils.hpp"
#include "pnpmri/cplx_io.hpp"
#include "pnpmri/errors.hpp"
#include "pnpmri/metrics.hpp"
#include "pnpmri/png_io.hpp"
#include "pnpmri/random.hpp"
#include "pnpmri/solvers.hpp"
#include "pnpmri/weights.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace pnpmri {

namespace {

using ordered_json = nlohmann::ordered_json;

const std::map<std::string, ParamSet> &solver_defaults() {
  static const std::map<std::string, ParamSet> defaults = {
      {"admm-pnp", {{"nu", 1.0}, {"outer_iters", 20}, {"cg_iters", 5}, {"cg_tol", 1e-5}, {"tau", 0.0}, {"scale", 1.0}}},
      {"fista-uwt", {{"lambda", 0.0}, {"iters", 100}, {"step", 1.0}, {"prox_iters", 50}}},
      {"admm-tv", {{"lambda", 0.0}, {"nu", 1.0}, {"outer_iters", 50}, {"cg_iters", 5}, {"cg_tol", 1e-5}}},
      {"lps", {{"lambda_L", 0.01}, {"lambda_S", 0.01}, {"iters", 50}}},
      {"cg-sense", {{"iters", 30}, {"tol", 1e-8}}},
      {"zero-filled", {}},
  };
  return defaults;
}

const std::map<std::string, std::vector<std::string>> &solver_options() {
  static const std::map<std::string, std::vector<std::string>> options = {
      {"admm-pnp", {"denoiser", "weights", "dual"}},
      {"fista-uwt", {"prox"}},
  };
  return options;
}

std::size_t as_count(const ParamSet &p, const std::string &key) {
  const double v = p.at(key);
  if (!(v >= 0.0) || v != std::floor(v)) {
    throw ParameterError("parameter '" + key + "' must be a non-negative integer");
  }
  return std::size_t(v);
}

std::string option_or(const SolverSpec &s, const std::string &key, const std::string &fallback) {
  const auto it = s.options.find(key);
  return it == s.options.end() ? fallback : it->second;
}

std::string format_r(double R) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", R);
  return buf;
}

ordered_json params_json(const ParamSet &p) {
  ordered_json j = ordered_json::object();
  for (const auto &[k, v] : p) {
    j[k] = v;
  }
  return j;
}

// Virtual coil v = Σ_c conj(basis(c, v))·coil c.
MultiCoilKSpace project_coils(const MultiCoilKSpace &y, const Eigen::MatrixXcd &basis) {
  const std::size_t nv = std::size_t(basis.cols());
  MultiCoilKSpace out(KSpaceShape{nv, y.nkx(), y.nky(), y.nt()});
  const std::size_t block = y.shape().coil_size();
  for (std::size_t v = 0; v < nv; ++v) {
    cplx *dst = out.values().data() + v * block;
    for (std::size_t c = 0; c < y.nc(); ++c) {
      const cplx w = std::conj(basis(Eigen::Index(c), Eigen::Index(v)));
      const cplx *src = y.values().data() + c * block;
      for (std::size_t i = 0; i < block; ++i) {
        dst[i] += w * src[i];
      }
    }
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
}

} // namespace

std::vector<ParamSet> SolverSpec::combinations() const {
  const auto d = solver_defaults().find(type);
  if (d == solver_defaults().end()) {
    throw ParameterError("unknown solver type '" + type + "'");
  }
  for (const auto &[k, values] : sweep) {
    if (!d->second.contains(k)) {
      throw ParameterError("solver '" + label + "': unknown parameter '" + k + "' for " + type);
    }
    if (values.empty()) {
      throw ParameterError("solver '" + label + "': empty sweep for '" + k + "'");
    }
  }
  std::vector<ParamSet> out{d->second};
  for (const auto &[k, values] : sweep) {
    std::vector<ParamSet> next;
    for (const auto &p : out) {
      for (double v : values) {
        ParamSet q = p;
        q[k] = v;
        next.push_back(std::move(q));
      }
    }
    out = std::move(next);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) {
    throw ParameterError("at least one seed is required");
  }
  if (accelerations.empty()) {
    throw ParameterError("at least one acceleration is required");
  }
  for (double r : accelerations) {
    if (!(r >= 1.0)) {
      throw ParameterError("accelerations must be >= 1");
    }
  }
  if (n_coils == 0) {
    throw ParameterError("n_coils must be positive");
  }
  if (n_virtual > n_coils) {
    throw ParameterError("n_virtual must not exceed n_coils");
  }
  if (walsh_block == 0 || walsh_block % 2 == 0) {
    throw ParameterError("walsh_block must be odd");
  }
  std::map<std::string, int> labels;
  for (const auto &s : solvers) {
    if (s.label.empty() || labels[s.label]++ > 0) {
      throw ParameterError("solver labels must be non-empty and unique");
    }
    const auto allowed = solver_options().find(s.type);
    for (const auto &[k, v] : s.options) {
      const bool ok = allowed != solver_options().end() &&
                      std::find(allowed->second.begin(), allowed->second.end(), k) != allowed->second.end();
      if (!ok) {
        throw ParameterError("solver '" + s.label + "': unknown option '" + k + "'");
      }
    }
    s.combinations();
  }
}

ExperimentConfig parse_experiment_config(const std::string &json_text, const std::filesystem::path &base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw FormatError("config must be a JSON object");
  }
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  try {
    static const std::vector<std::string> known = {
        "name",        "seeds",      "phantom", "accelerations", "calib_lines",  "asym_echo_fraction",
        "noise_snr_db", "n_coils",   "n_virtual", "true_maps",   "walsh_block", "solvers",
        "output_dir",  "write_images"};
    for (const auto &[k, v] : j.items()) {
      if (std::find(known.begin(), known.end(), k) == known.end()) {
        throw FormatError("unknown config key '" + k + "'");
      }
    }
    cfg.name = j.value("name", cfg.name);
    if (j.contains("seeds")) {
      cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    }
    if (j.contains("phantom")) {
      const auto &p = j.at("phantom");
      cfg.phantom.nx = p.value("nx", cfg.phantom.nx);
      cfg.phantom.ny = p.value("ny", cfg.phantom.ny);
      cfg.phantom.nt = p.value("nt", cfg.phantom.nt);
      cfg.phantom.n_ellipses = p.value("n_ellipses", cfg.phantom.n_ellipses);
      cfg.phantom.motion_amplitude = p.value("motion_amplitude", cfg.phantom.motion_amplitude);
    }
    if (j.contains("accelerations")) {
      cfg.accelerations = j.at("accelerations").get<std::vector<double>>();
    }
    cfg.calib_lines = j.value("calib_lines", cfg.calib_lines);
    cfg.asym_echo_fraction = j.value("asym_echo_fraction", cfg.asym_echo_fraction);
    if (j.contains("noise_snr_db") && !j.at("noise_snr_db").is_null()) {
      cfg.noise_snr_db = j.at("noise_snr_db").get<double>();
    }
    cfg.n_coils = j.value("n_coils", cfg.n_coils);
    cfg.n_virtual = j.value("n_virtual", cfg.n_virtual);
    cfg.true_maps = j.value("true_maps", cfg.true_maps);
    cfg.walsh_block = j.value("walsh_block", cfg.walsh_block);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.write_images = j.value("write_images", cfg.write_images);
    for (const auto &s : j.value("solvers", nlohmann::json::array())) {
      SolverSpec spec;
      for (const auto &[k, v] : s.items()) {
        if (k == "label") {
          spec.label = v.get<std::string>();
        } else if (k == "type") {
          spec.type = v.get<std::string>();
        } else if (v.is_string()) {
          spec.options[k] = v.get<std::string>();
        } else if (v.is_number()) {
          spec.sweep[k] = {v.get<double>()};
        } else if (v.is_array()) {
          spec.sweep[k] = v.get<std::vector<double>>();
        } else {
          throw FormatError("solver parameter '" + k + "' must be a number, list or string");
        }
      }
      if (spec.label.empty()) {
        spec.label = spec.type;
      }
      cfg.solvers.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(std::string("config field has the wrong type: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.parent_path());
}

std::string experiment_config_to_json(const ExperimentConfig &cfg) {
  ordered_json j;
  j["name"] = cfg.name;
  j["seeds"] = cfg.seeds;
  j["phantom"] = {{"nx", cfg.phantom.nx},
                  {"ny", cfg.phantom.ny},
                  {"nt", cfg.phantom.nt},
                  {"n_ellipses", cfg.phantom.n_ellipses},
                  {"motion_amplitude", cfg.phantom.motion_amplitude}};
  j["accelerations"] = cfg.accelerations;
  j["calib_lines"] = cfg.calib_lines;
  j["asym_echo_fraction"] = cfg.asym_echo_fraction;
  j["noise_snr_db"] = cfg.noise_snr_db ? ordered_json(*cfg.noise_snr_db) : ordered_json(nullptr);
  j["n_coils"] = cfg.n_coils;
  j["n_virtual"] = cfg.n_virtual;
  j["true_maps"] = cfg.true_maps;
  j["walsh_block"] = cfg.walsh_block;
  ordered_json solvers = ordered_json::array();
  for (const auto &s : cfg.solvers) {
    ordered_json o;
    o["label"] = s.label;
    o["type"] = s.type;
    for (const auto &[k, v] : s.options) {
      o[k] = v;
    }
    for (const auto &[k, v] : s.sweep) {
      o[k] = v.size() == 1 ? ordered_json(v.front()) : ordered_json(v);
    }
    solvers.push_back(std::move(o));
  }
  j["solvers"] = std::move(solvers);
  j["output_dir"] = cfg.output_dir;
  j["write_images"] = cfg.write_images;
  return j.dump(2) + "\n";
}

Dataset simulate_dataset(const ExperimentConfig &cfg, double R, std::uint64_t seed) {
  PhantomSpec ps = cfg.phantom;
  ps.seed = derive_seed(seed, 1);
  Dataset ds;
  ds.truth = generate_cine_phantom(ps);
  const SensitivityMaps true_maps = generate_coil_maps(cfg.n_coils, ps.nx, ps.ny, derive_seed(seed, 2));

  MaskSpec ms;
  ms.nkx = ps.nx;
  ms.nky = ps.ny;
  ms.nt = ps.nt;
  ms.R = R;
  ms.calib_lines = cfg.calib_lines;
  ms.asym_echo_fraction = cfg.asym_echo_fraction;
  ms.seed = derive_seed(derive_seed(seed, 3), std::uint64_t(std::llround(R * 1000.0)));
  ds.mask = generate_mask(ms);

  const SamplingMask full(ps.nx, ps.ny, ps.nt, std::vector<std::uint8_t>(ps.nx * ps.ny * ps.nt, 1), 1.0);
  MultiCoilKSpace clean = sense_forward(ds.truth, SenseModel(true_maps, full));
  MultiCoilKSpace noisy = clean;
  if (cfg.noise_snr_db) {
    // The coil k-space viewed as one (nkx, nky, nt·nc) array.
    const ComplexImage flat(ImageShape{ps.nx, ps.ny, ps.nt * cfg.n_coils},
                            {clean.values().begin(), clean.values().end()});
    const ComplexImage n = add_noise(flat, *cfg.noise_snr_db, derive_seed(seed, 4));
    noisy = MultiCoilKSpace(clean.shape(), {n.values().begin(), n.values().end()});
  }
  apply_mask(noisy, ds.mask);

  SensitivityMaps maps = true_maps;
  if (cfg.n_virtual > 0) {
    const CoilCompression cc = coil_compress(noisy, cfg.n_virtual);
    noisy = cc.data;
    clean = project_coils(clean, cc.basis);
    maps = compress_maps(true_maps, cc.basis);
  }
  ds.kspace = std::move(noisy);

  if (cfg.true_maps) {
    ds.maps = std::move(maps);
    ds.reference = ds.truth;
  } else {
    const auto avg = coil_images(time_average_sampled(ds.kspace, ds.mask));
    WalshEstimate est = estimate_maps_walsh(avg, cfg.walsh_block);
    ds.maps = std::move(est.maps);
    ds.flagged_map_pixels = est.flagged_pixels;
    ds.reference = coil_combine(coil_images(clean), ds.maps);
  }
  return ds;
}

std::shared_ptr<const Denoiser> DenoiserCache::get(const DenoiserSpec &spec) {
  if (spec.kind != "cnn") {
    return make_denoiser(spec);
  }
  if (spec.weights.empty()) {
    throw DenoiserError("cnn denoiser requires a weight file");
  }
  const std::string path = resolve(base_dir_, spec.weights).string();
  auto &slot = nets_[path];
  if (!slot) {
    slot = std::make_shared<const DenoiserNet>(load_weights(path));
  }
  return std::make_shared<CnnDenoiser>(slot, spec.scale);
}

SolveReport run_solver(const SolverSpec &solver, const ParamSet &params, const MultiCoilKSpace &kspace,
                       const SenseModel &model, DenoiserCache &cache) {
  const auto &t = solver.type;
  if (t == "admm-pnp") {
    AdmmConfig cfg;
    cfg.nu = params.at("nu");
    cfg.outer_iters = as_count(params, "outer_iters");
    cfg.cg_iters = as_count(params, "cg_iters");
    cfg.cg_tol = params.at("cg_tol");
    cfg.denoiser.kind = option_or(solver, "denoiser", "identity");
    cfg.denoiser.tau = params.at("tau");
    cfg.denoiser.scale = params.at("scale");
    cfg.denoiser.weights = option_or(solver, "weights", "");
    const std::string dual = option_or(solver, "dual", "standard");
    if (dual != "standard" && dual != "reversed") {
      throw ParameterError("dual must be 'standard' or 'reversed'");
    }
    cfg.dual = dual == "standard" ? DualUpdate::Standard : DualUpdate::Reversed;
    cfg.validate();
    const auto denoiser = cache.get(cfg.denoiser);
    return admm_pnp(kspace, model, cfg, *denoiser);
  }
  if (t == "fista-uwt") {
    FistaOptions opt;
    opt.step = params.at("step");
    opt.prox_iters = as_count(params, "prox_iters");
    const std::string prox = option_or(solver, "prox", "thresholding");
    if (prox != "thresholding" && prox != "exact") {
      throw ParameterError("prox must be 'thresholding' or 'exact'");
    }
    opt.prox = prox == "exact" ? UwtProx::Exact : UwtProx::Thresholding;
    return fista_uwt(kspace, model, params.at("lambda"), as_count(params, "iters"), opt);
  }
  if (t == "admm-tv") {
    return admm_tv(kspace, model, params.at("lambda"), params.at("nu"), as_count(params, "outer_iters"),
                   as_count(params, "cg_iters"), params.at("cg_tol"));
  }
  if (t == "lps") {
    return lps(kspace, model, params.at("lambda_L"), params.at("lambda_S"), as_count(params, "iters"));
  }
  if (t == "cg-sense") {
    const auto start = std::chrono::steady_clock::now();
    const ComplexImage b = sense_adjoint(kspace, model);
    const CgResult r =
        cg_solve([&](const ComplexImage &x) { return sense_gram(x, model); }, b, params.at("tol"),
                 as_count(params, "iters"));
    SolveReport rep;
    rep.solver = "cg-sense";
    IterationRecord rec;
    rec.iteration = 1;
    rec.data_fidelity = data_fidelity(r.x, kspace, model);
    rec.cg_iterations = r.iterations;
    rec.cg_residual = r.relative_residual;
    rep.iterations.push_back(rec);
    rep.image = r.x;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  }
  if (t == "zero-filled") {
    SolveReport rep;
    rep.solver = "zero-filled";
    rep.image = sense_adjoint(kspace, model);
    IterationRecord rec;
    rec.data_fidelity = data_fidelity(rep.image, kspace, model);
    rep.iterations.push_back(rec);
    return rep;
  }
  throw ParameterError("unknown solver type '" + t + "'");
}

const TableEntry &ExperimentResult::entry(const std::string &solver, double R) const {
  for (const auto &e : table) {
    if (e.solver == solver && e.R == R) {
      return e;
    }
  }
  throw ParameterError("no table entry for " + solver + " at R = " + format_r(R));
}

ExperimentResult run_experiment(const ExperimentConfig &cfg, const ProgressFn &progress) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  DenoiserCache cache(cfg.base_dir);

  std::filesystem::path out_dir;
  if (!cfg.output_dir.empty()) {
    out_dir = resolve(cfg.base_dir, cfg.output_dir);
    std::filesystem::create_directories(out_dir);
  }

  for (double R : cfg.accelerations) {
    std::vector<Dataset> data;
    std::vector<SenseModel> models;
    for (auto seed : cfg.seeds) {
      data.push_back(simulate_dataset(cfg, R, seed));
      models.emplace_back(data.back().maps, data.back().mask);
    }
    const std::string tag = "R" + format_r(R);
    if (!out_dir.empty() && cfg.write_images) {
      write_image(out_dir / ("reference_" + tag + ".cplx"), data.front().reference);
      write_png(out_dir / ("reference_" + tag + ".png"), magnitude_montage(data.front().reference));
      write_png(out_dir / ("reference_" + tag + "_profile.png"),
                temporal_profile(data.front().reference, data.front().reference.ny() / 2));
      write_mask(out_dir / ("mask_" + tag + ".cplx"), data.front().mask);
    }

    for (const auto &solver : cfg.solvers) {
      TableEntry entry;
      entry.solver = solver.label;
      entry.R = R;
      std::optional<ComplexImage> best_image;
      double best = -std::numeric_limits<double>::infinity();

      std::vector<ParamSet> combos;
      try {
        combos = solver.combinations();
      } catch (const Error &e) {
        CellResult cell{solver.label, R, cfg.seeds.front(), {}, false, 0.0, e.what(), 0.0};
        result.cells.push_back(cell);
        ++entry.failed_cells;
      }
      for (const auto &params : combos) {
        std::vector<double> scores;
        std::optional<ComplexImage> first_image;
        bool all_ok = true;
        for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
          CellResult cell;
          cell.solver = solver.label;
          cell.R = R;
          cell.seed = cfg.seeds[s];
          cell.params = params;
          const auto start = std::chrono::steady_clock::now();
          try {
            SolveReport rep = run_solver(solver, params, data[s].kspace, models[s], cache);
            cell.rsnr = rsnr(data[s].reference, rep.image);
            if (!std::isfinite(cell.rsnr)) {
              throw NumericalError("non-finite rSNR");
            }
            cell.ok = true;
            if (s == 0) {
              first_image = std::move(rep.image);
            }
          } catch (const std::exception &e) {
            cell.error = e.what();
          }
          cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          if (progress) {
            progress(cell);
          }
          all_ok = all_ok && cell.ok;
          if (cell.ok) {
            scores.push_back(cell.rsnr);
          } else {
            ++entry.failed_cells;
          }
          result.cells.push_back(std::move(cell));
        }
        if (!all_ok) {
          continue;
        }
        double mean = 0.0;
        for (double v : scores) {
          mean += v;
        }
        mean /= double(scores.size());
        if (mean > best) {
          best = mean;
          entry.ok = true;
          entry.mean_rsnr = mean;
          entry.params = params;
          entry.per_seed = scores;
          best_image = std::move(first_image);
        }
      }

      if (!out_dir.empty() && cfg.write_images && best_image) {
        const std::string stem = solver.label + "_" + tag;
        write_image(out_dir / (stem + ".cplx"), *best_image);
        write_png(out_dir / (stem + ".png"), magnitude_montage(*best_image));
        write_png(out_dir / (stem + "_error.png"), error_montage(data.front().reference, *best_image, 5.0));
        write_png(out_dir / (stem + "_profile.png"), temporal_profile(*best_image, best_image->ny() / 2));
      }
      result.table.push_back(std::move(entry));
    }
  }

  if (!out_dir.empty()) {
    write_text(out_dir / "results.json", results_to_json(result));
    write_text(out_dir / "results.txt", results_to_text(result));
  }
  return result;
}

std::string results_to_json(const ExperimentResult &result) {
  ordered_json j;
  j["schema_version"] = 1;
  j["name"] = result.config.name;
  j["config"] = ordered_json::parse(experiment_config_to_json(result.config));
  ordered_json table = ordered_json::array();
  for (double R : result.config.accelerations) {
    ordered_json row;
    row["R"] = R;
    ordered_json cols = ordered_json::array();
    for (const auto &e : result.table) {
      if (e.R != R) {
        continue;
      }
      ordered_json c;
      c["solver"] = e.solver;
      c["status"] = e.ok ? "ok" : "failed";
      c["mean_rsnr"] = e.ok ? ordered_json(e.mean_rsnr) : ordered_json(nullptr);
      c["params"] = params_json(e.params);
      c["per_seed_rsnr"] = e.per_seed;
      c["failed_cells"] = e.failed_cells;
      cols.push_back(std::move(c));
    }
    row["solvers"] = std::move(cols);
    table.push_back(std::move(row));
  }
  j["table"] = std::move(table);
  ordered_json cells = ordered_json::array();
  for (const auto &c : result.cells) {
    ordered_json o;
    o["solver"] = c.solver;
    o["R"] = c.R;
    o["seed"] = c.seed;
    o["params"] = params_json(c.params);
    o["status"] = c.ok ? "ok" : "failed";
    o["rsnr"] = c.ok ? ordered_json(c.rsnr) : ordered_json(nullptr);
    if (!c.ok) {
      o["error"] = c.error;
    }
    cells.push_back(std::move(o));
  }
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

std::string results_to_text(const ExperimentResult &result) {
  std::ostringstream out;
  char buf[64];
  out << "# " << result.config.name << ": mean rSNR [dB] over " << result.config.seeds.size()
      << " seed(s), best parameters per cell\n";
  std::snprintf(buf, sizeof buf, "%6s", "R");
  out << buf;
  for (const auto &s : result.config.solvers) {
    std::snprintf(buf, sizeof buf, " %14s", s.label.c_str());
    out << buf;
  }
  out << '\n';
  for (double R : result.config.accelerations) {
    std::snprintf(buf, sizeof buf, "%6s", format_r(R).c_str());
    out << buf;
    for (const auto &s : result.config.solvers) {
      const auto &e = result.entry(s.label, R);
      if (e.ok) {
        std::snprintf(buf, sizeof buf, " %14.2f", e.mean_rsnr);
      } else {
        std::snprintf(buf, sizeof buf, " %14s", "FAILED");
      }
      out << buf;
    }
    out << '\n';
  }
  out << "\n# best parameters\n";
  for (const auto &e : result.table) {
    out << e.solver << " R=" << format_r(e.R) << ":";
    if (!e.ok) {
      out << " failed (" << e.failed_cells << " cell(s))\n";
      continue;
    }
    for (const auto &[k, v] : e.params) {
      std::snprintf(buf, sizeof buf, " %s=%g", k.c_str(), v);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

} // namespace pnpmri
