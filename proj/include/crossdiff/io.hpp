// File formats: flat key-value run configuration, cell-centered field
// snapshots as CSV, per-monitor CSV series, and the JSON run summary.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crossdiff/diagnostics.hpp"
#include "crossdiff/stepper.hpp"

namespace crossdiff {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Combined run configuration: parameter keys (d_u .. gamma, plus
// strict_validation), grid keys (dim, n, ny, length, length_y), scheme keys
// (T, N, newton_tol), initial-data presets (u_init, v_init) and seed.
struct RunConfig {
  ParamSet params;
  int dim = 1;
  int n = 64;
  int ny = 0;          // 0: same as n
  double length = 1.0;
  double length_y = 0.0;  // 0: same as length
  double final_time = 1.0;
  int steps = 100;
  double newton_tol = 1e-10;
  std::string u_init = "constant:1";
  std::string v_init = "constant:1";
  uint64_t seed = 0;

  Grid make_grid() const;
  SchemeConfig make_scheme() const;
};

RunConfig parse_run_config(const std::filesystem::path& path);
RunConfig parse_run_config_text(const std::string& text);

// Initial-data presets: constant:<val>, cosine_bump:<amp> (1 + amp times
// the product of the first cosine modes), random:<seed>,<lo>,<hi>
// (per-cell uniform draws; the preset seed is XOR-combined with run_seed),
// file:<path> (field CSV, shape must match the grid).
Field make_initial_field(const std::string& spec, const Grid& grid, uint64_t run_seed);

// Field snapshot CSV: header `index,x,value` in 1D, `index,j,x,y,value`
// in 2D; full double precision. The grid is reconstructed on read.
void write_field_csv(const std::filesystem::path& path, const Field& field);
Field read_field_csv(const std::filesystem::path& path);

// Monitor CSV: `step,time,value,bound,margin,pass`; bound/margin columns
// are left empty for informational series.
void write_monitor_csv(const std::filesystem::path& path, const MonitorSeries& series);

std::string format_double(double value);

}  // namespace crossdiff
