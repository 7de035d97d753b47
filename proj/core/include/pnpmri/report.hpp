#pragma once

#include "pnpmri/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pnpmri {

struct IterationRecord {
  std::size_t iteration = 0;
  /// ½‖A x_t − d‖²
  double data_fidelity = 0.0;
  /// Splitting residual: ‖v_t − x_t‖ for PnP-ADMM, ‖D x_t − z_t‖ for TV-ADMM,
  /// ‖x_t − x_{t−1}‖ for FISTA and L+S.
  double primal_residual = 0.0;
  /// Full objective when the regulariser is an explicit penalty.
  std::optional<double> objective;
  std::size_t cg_iterations = 0;
  double cg_residual = 0.0;
  double elapsed_seconds = 0.0;
};

struct SolveReport {
  std::string solver;
  std::vector<IterationRecord> iterations;
  ComplexImage image;
  double wall_seconds = 0.0;

  /// Objective of the last iterate when defined, else its data fidelity.
  double final_objective() const;
};

/// Machine-readable per-iteration metrics. Timing fields are only written
/// when include_timing is set, so untimed reports are reproducible byte for
/// byte.
std::string report_to_json(const SolveReport &report, bool include_timing = false);

/// Fixed-width text table, one row per iteration.
std::string report_to_text(const SolveReport &report);

} // namespace pnpmri
