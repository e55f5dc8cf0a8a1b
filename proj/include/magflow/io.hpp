#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "magflow/flow.hpp"

namespace magflow {

/// CSV with header `source,t,node,x0,...,x{q-1},e,kappa,residual,h`, one row
/// per (recorded time, node), numbers printed with %.17g. Coordinates are the
/// stored (unwrapped) positions.
void write_trajectory_csv(const std::filesystem::path& path, const std::vector<LoopState>& states,
                          const std::vector<StateDiagnostics>& diagnostics, const std::string& source = "flow");

/// Serialized form, byte-identical for identical inputs.
std::string trajectory_csv(const std::vector<LoopState>& states, const std::vector<StateDiagnostics>& diagnostics,
                           const std::string& source = "flow");

struct CsvTrajectory {
  std::string source;
  std::vector<LoopState> states;
  std::vector<StateDiagnostics> diagnostics;  ///< per-node columns and their sups
};

CsvTrajectory read_trajectory_csv(const std::filesystem::path& path);

struct SvgSeries {
  std::string label;
  std::vector<double> t;
  std::vector<double> values;
};

/// Snapshots of loops (first, middle, last by default) in an orthographic
/// projection; flat-torus coordinates are wrapped into the fundamental domain.
std::string loop_svg(const std::vector<LoopState>& states, const ManifoldModel& model, const std::string& title);

/// Time series on a log10 axis (non-positive values are skipped).
std::string timeseries_svg(const std::vector<SvgSeries>& series, const std::string& title);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace magflow
