#pragma once

#include "pnpmri/denoisers.hpp"
#include "pnpmri/phantom.hpp"
#include "pnpmri/report.hpp"
#include "pnpmri/sampling.hpp"
#include "pnpmri/sense.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pnpmri {

using ParamSet = std::map<std::string, double>;

/// One column of the results table. Numeric parameters given as a list are
/// swept (Cartesian product over all swept keys); string parameters are
/// fixed options.
///
/// Solver types and their parameters (defaults in parentheses):
///   admm-pnp     nu (1), outer_iters (20), cg_iters (5), cg_tol (1e-5), tau (0);
///                denoiser (identity | uwt | soft | cnn), weights, dual (standard | reversed)
///   fista-uwt    lambda (0), iters (100), step (1), prox_iters (50); prox (thresholding | exact)
///   admm-tv      lambda (0), nu (1), outer_iters (50), cg_iters (5), cg_tol (1e-5)
///   lps          lambda_L (0.01), lambda_S (0.01), iters (50)
///   cg-sense     iters (30), tol (1e-8)
///   zero-filled  (none)
struct SolverSpec {
  std::string label;
  std::string type;
  std::map<std::string, std::vector<double>> sweep;
  std::map<std::string, std::string> options;

  /// All parameter combinations in lexicographic key order, defaults filled.
  std::vector<ParamSet> combinations() const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<std::uint64_t> seeds{0};
  PhantomSpec phantom{};
  std::vector<double> accelerations{6.0, 8.0, 10.0};
  std::size_t calib_lines = 4;
  double asym_echo_fraction = 0.0;
  /// Complex Gaussian noise added to the fully sampled coil k-space.
  std::optional<double> noise_snr_db;
  std::size_t n_coils = 8;
  /// 0 disables coil compression.
  std::size_t n_virtual = 0;
  /// Use the simulated sensitivities instead of Walsh estimates.
  bool true_maps = false;
  std::size_t walsh_block = 7;
  std::vector<SolverSpec> solvers;
  /// Empty: no files are written.
  std::string output_dir;
  bool write_images = true;

  /// Directory against which relative weight and output paths resolve. Not
  /// part of the serialised config.
  std::filesystem::path base_dir;

  void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string &json_text, const std::filesystem::path &base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path &path);
std::string experiment_config_to_json(const ExperimentConfig &cfg);

/// One simulated acquisition.
struct Dataset {
  ComplexImage truth;
  /// Image the reconstructions are scored against: the truth for simulated
  /// maps, otherwise the clean coil images combined with the maps in use.
  ComplexImage reference;
  SensitivityMaps maps;
  SamplingMask mask;
  MultiCoilKSpace kspace;
  std::size_t flagged_map_pixels = 0;
};

Dataset simulate_dataset(const ExperimentConfig &cfg, double R, std::uint64_t seed);

/// Loads and certifies CNN weight files once per path.
class DenoiserCache {
public:
  explicit DenoiserCache(std::filesystem::path base_dir = {}) : base_dir_(std::move(base_dir)) {}
  std::shared_ptr<const Denoiser> get(const DenoiserSpec &spec);

private:
  std::filesystem::path base_dir_;
  std::map<std::string, std::shared_ptr<const DenoiserNet>> nets_;
};

SolveReport run_solver(const SolverSpec &solver, const ParamSet &params, const MultiCoilKSpace &kspace,
                       const SenseModel &model, DenoiserCache &cache);

struct CellResult {
  std::string solver;
  double R = 0.0;
  std::uint64_t seed = 0;
  ParamSet params;
  bool ok = false;
  double rsnr = 0.0;
  std::string error;
  double seconds = 0.0;
};

/// Best parameter set for one (solver, R): highest mean rSNR over seeds
/// among the combinations that succeeded for every seed.
struct TableEntry {
  std::string solver;
  double R = 0.0;
  bool ok = false;
  double mean_rsnr = 0.0;
  ParamSet params;
  std::vector<double> per_seed;
  std::size_t failed_cells = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellResult> cells;
  std::vector<TableEntry> table;

  const TableEntry &entry(const std::string &solver, double R) const;
};

using ProgressFn = std::function<void(const CellResult &)>;

/// Runs every (R, solver, parameter combination, seed) cell. A failing cell
/// is recorded and does not stop the others. When output_dir is set, writes
/// results.json, results.txt and, for the best parameters on the first seed,
/// CPLX reconstructions and PNG magnitude, error and temporal-profile images.
ExperimentResult run_experiment(const ExperimentConfig &cfg, const ProgressFn &progress = {});

std::string results_to_json(const ExperimentResult &result);
std::string results_to_text(const ExperimentResult &result);

} // namespace pnpmri
