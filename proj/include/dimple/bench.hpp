// Experiment harness: seeded replicated runs of the tensor and baseline
// clustering pipelines over an (n, L) sweep, with per-cell checkpoints and
// deterministic CSV outputs.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dimple/cluster.hpp"
#include "dimple/netgen.hpp"

namespace dimple {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SweepSpec {
  char axis = 'n';          // 'n' (vary nodes, fixed L) or 'L' (vary layers, fixed n)
  std::vector<int> values;  // swept values
  int fixed = 0;            // the non-swept dimension
};

struct ExperimentGrid {
  SweepSpec sweep;
  ModelConfig model;        // n and L are filled in per cell
  std::vector<std::string> algorithms;  // subset of {"tensor", "baseline"}
  int replications = 20;
  std::uint64_t base_seed = 0;
  std::string output_dir;
  int threads = 1;
  ThresholdMode threshold_mode = ThresholdMode::Separation;
  double manual_t = 0.0;

  void validate() const;  // throws ConfigError
};

struct ResultRow {
  std::string algorithm;
  int n = 0, L = 0;
  double c = 0.0, d = 0.0;
  std::string distribution;
  int replication = 0;   // 1-based
  std::uint64_t seed = 0;
  std::optional<double> r_bl;
  std::optional<double> sin_theta_u;
  std::optional<double> sin_theta_w;
  double wall_time_ms = 0.0;
  int hooi_iters = 0;
  std::string error;     // empty on success
};

// One cell: `replications` seeded instances, each scored by every requested
// algorithm. Per-replication seeds depend only on (base_seed, n, L,
// replication), so all algorithms see the same adjacency sample. Failures
// become error rows, not aborts. Deterministic in everything but wall time,
// for any thread count.
std::vector<ResultRow> run_cell(const ModelConfig& model,
                                const std::vector<std::string>& algorithms,
                                std::uint64_t base_seed, int replications, int threads,
                                ThresholdMode threshold_mode = ThresholdMode::Separation,
                                double manual_t = 0.0);

// All cells, resuming from per-cell checkpoint files under
// <output_dir>/cells/. Writes results.csv (deterministic columns),
// timings.csv (wall clock sidecar) and summary.csv (per-cell means/stderr).
// Returns the number of error rows.
int run_grid(const ExperimentGrid& grid);

// JSON codecs for the grid and model configurations; see README for the schema.
ExperimentGrid grid_from_json_file(const std::string& path);
ExperimentGrid grid_from_json_text(const std::string& text);
ModelConfig model_from_json_file(const std::string& path);
ModelConfig model_from_json_text(const std::string& text);

// CSV helpers shared by the harness and the CLI.
std::string format_double(double v);            // shortest round-trip form
std::string csv_header_results();               // deterministic result columns
std::string csv_line_results(const ResultRow& row);
std::string csv_line_full(const ResultRow& row);  // checkpoint line (adds wall time)
ResultRow parse_checkpoint_line(const std::string& line);

struct SummaryRow {
  std::string algorithm;
  int n = 0, L = 0;
  int replications = 0;
  int errors = 0;
  std::optional<double> mean_r_bl, stderr_r_bl;
  std::optional<double> mean_sin_theta_u, mean_sin_theta_w;
  std::optional<double> mean_hooi_iters;
};

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);
std::vector<SummaryRow> load_summary_csv(const std::string& path);

}  // namespace dimple
