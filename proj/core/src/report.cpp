#include "pnpmri/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace pnpmri {

double SolveReport::final_objective() const {
  if (iterations.empty()) {
    return 0.0;
  }
  const auto &last = iterations.back();
  return last.objective.value_or(last.data_fidelity);
}

std::string report_to_json(const SolveReport &report, bool include_timing) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["solver"] = report.solver;
  j["shape"] = {report.image.nx(), report.image.ny(), report.image.nt()};
  auto &rows = j["iterations"] = nlohmann::ordered_json::array();
  for (const auto &it : report.iterations) {
    nlohmann::ordered_json row;
    row["iteration"] = it.iteration;
    row["data_fidelity"] = it.data_fidelity;
    row["primal_residual"] = it.primal_residual;
    row["objective"] = it.objective ? nlohmann::ordered_json(*it.objective) : nlohmann::ordered_json(nullptr);
    row["cg_iterations"] = it.cg_iterations;
    row["cg_residual"] = it.cg_residual;
    if (include_timing) {
      row["elapsed_seconds"] = it.elapsed_seconds;
    }
    rows.push_back(std::move(row));
  }
  if (include_timing) {
    j["wall_seconds"] = report.wall_seconds;
  }
  return j.dump(2) + "\n";
}

std::string report_to_text(const SolveReport &report) {
  std::ostringstream os;
  char line[160];
  os << "# solver: " << report.solver << "\n";
  std::snprintf(line, sizeof line, "%6s %16s %16s %16s %6s %12s %10s\n", "iter", "fidelity", "primal_res",
                "objective", "cg_it", "cg_res", "time_s");
  os << line;
  for (const auto &it : report.iterations) {
    char obj[32];
    if (it.objective) {
      std::snprintf(obj, sizeof obj, "%16.9e", *it.objective);
    } else {
      std::snprintf(obj, sizeof obj, "%16s", "-");
    }
    std::snprintf(line, sizeof line, "%6zu %16.9e %16.9e %s %6zu %12.4e %10.3f\n", it.iteration,
                  it.data_fidelity, it.primal_residual, obj, it.cg_iterations, it.cg_residual,
                  it.elapsed_seconds);
    os << line;
  }
  return os.str();
}

} // namespace pnpmri
