#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dimple/bench.hpp"
#include "dimple/plot.hpp"

using namespace dimple;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_model() {
  ModelConfig m;
  m.n = 40;
  m.L = 24;
  m.M = 2;
  m.K = {2, 2};
  m.b_min = -0.3;
  m.b_max = 0.3;
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string grid_json(const fs::path& out_dir, int reps = 2) {
  std::ostringstream ss;
  ss << R"({
    "sweep": {"axis": "L", "values": [16, 24], "fixed_n": 40},
    "model": {"M": 2, "K": 2, "b_range": [-0.3, 0.3]},
    "algorithms": ["tensor", "baseline"],
    "replications": )"
     << reps << R"(,
    "base_seed": 4242,
    "output_dir": ")"
     << out_dir.string() << R"("
  })";
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("run_cell produces one row per replication and algorithm") {
  const auto rows = run_cell(tiny_model(), {"tensor", "baseline"}, 7, 2, 1);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.error.empty());
    REQUIRE(r.r_bl.has_value());
    CHECK(*r.r_bl >= 0.0);
    CHECK(*r.r_bl <= 1.0);
    CHECK(r.n == 40);
    CHECK(r.L == 24);
    CHECK(r.distribution == "truncated_normal");
  }
  CHECK(rows[0].algorithm == "tensor");
  CHECK(rows[1].algorithm == "baseline");
  CHECK(rows[0].seed == rows[1].seed);  // paired comparison
  CHECK(rows[0].hooi_iters >= 1);
  REQUIRE(rows[0].sin_theta_u.has_value());
  CHECK(!rows[1].sin_theta_u.has_value());
}

TEST_CASE("run_cell is deterministic across thread counts") {
  const auto serial = run_cell(tiny_model(), {"tensor", "baseline"}, 11, 4, 1);
  const auto parallel = run_cell(tiny_model(), {"tensor", "baseline"}, 11, 4, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i)
    CHECK(csv_line_results(serial[i]) == csv_line_results(parallel[i]));
}

TEST_CASE("run_cell emits error rows for a degenerate zero model") {
  ModelConfig m = tiny_model();
  m.b_min = m.b_max = 0.0;  // P = 0 -> both algorithms fail downstream
  const auto rows = run_cell(m, {"tensor", "baseline"}, 3, 1, 1);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(!r.error.empty());
    CHECK(!r.r_bl.has_value());
  }
}

TEST_CASE("checkpoint line round trip") {
  ResultRow r;
  r.algorithm = "tensor";
  r.n = 40;
  r.L = 16;
  r.c = -0.3;
  r.d = 0.3;
  r.distribution = "truncated_normal";
  r.replication = 2;
  r.seed = 12345678901234ULL;
  r.r_bl = 0.125;
  r.sin_theta_u = 0.5;
  r.hooi_iters = 7;
  r.wall_time_ms = 12.5;
  const ResultRow back = parse_checkpoint_line(csv_line_full(r));
  CHECK(back.algorithm == r.algorithm);
  CHECK(back.seed == r.seed);
  CHECK(back.r_bl == r.r_bl);
  CHECK(back.sin_theta_u == r.sin_theta_u);
  CHECK(!back.sin_theta_w.has_value());
  CHECK(back.wall_time_ms == r.wall_time_ms);
  CHECK(back.error.empty());
}

TEST_CASE("run_grid writes results, summary and timings") {
  TempDir dir("dimple_bench_grid_test");
  const ExperimentGrid grid = grid_from_json_text(grid_json(dir.path));
  const int errors = run_grid(grid);
  CHECK(errors == 0);

  const std::string results = slurp(dir.path / "results.csv");
  CHECK(results.rfind(csv_header_results(), 0) == 0);
  // header + 2 cells x 2 reps x 2 algorithms
  CHECK(std::count(results.begin(), results.end(), '\n') == 9);

  const auto summary = load_summary_csv((dir.path / "summary.csv").string());
  REQUIRE(summary.size() == 4);  // 2 cells x 2 algorithms
  // summary mean equals the arithmetic mean of the raw rows
  std::vector<ResultRow> rows;
  {
    std::ifstream is(dir.path / "cells" / "cell_n40_L16.csv");
    std::string line;
    std::getline(is, line);  // fingerprint comment
    while (std::getline(is, line))
      if (!line.empty()) rows.push_back(parse_checkpoint_line(line));
  }
  double tensor_sum = 0.0;
  int tensor_count = 0;
  for (const auto& r : rows)
    if (r.algorithm == "tensor") {
      tensor_sum += *r.r_bl;
      ++tensor_count;
    }
  for (const auto& s : summary)
    if (s.algorithm == "tensor" && s.L == 16)
      CHECK(*s.mean_r_bl == doctest::Approx(tensor_sum / tensor_count).epsilon(1e-15));

  const std::string timings = slurp(dir.path / "timings.csv");
  CHECK(timings.rfind("algorithm,n,L,replication,wall_time_ms", 0) == 0);
}

TEST_CASE("run_grid resumes from finished cell checkpoints without recomputing") {
  TempDir dir("dimple_bench_resume_test");
  const ExperimentGrid grid = grid_from_json_text(grid_json(dir.path));
  run_grid(grid);

  // plant a sentinel value inside one checkpointed row; a resumed run must
  // carry it through instead of recomputing the cell
  const fs::path cell = dir.path / "cells" / "cell_n40_L16.csv";
  std::string text = slurp(cell);
  const std::string needle = "tensor,40,16";
  REQUIRE(text.find(needle) != std::string::npos);
  std::istringstream is(text);
  std::ostringstream patched;
  std::string line;
  bool planted = false;
  while (std::getline(is, line)) {
    if (!planted && line.rfind("tensor,40,16", 0) == 0) {
      ResultRow r = parse_checkpoint_line(line);
      r.r_bl = 0.875;  // sentinel
      line = csv_line_full(r);
      planted = true;
    }
    patched << line << '\n';
  }
  REQUIRE(planted);
  {
    std::ofstream os(cell);
    os << patched.str();
  }
  fs::remove(dir.path / "results.csv");
  fs::remove(dir.path / "summary.csv");

  run_grid(grid);
  const std::string results = slurp(dir.path / "results.csv");
  CHECK(results.find("0.875") != std::string::npos);

  // a changed configuration invalidates the checkpoint
  ExperimentGrid changed = grid;
  changed.base_seed += 1;
  run_grid(changed);
  const std::string fresh = slurp(dir.path / "results.csv");
  CHECK(fresh.find("0.875") == std::string::npos);
}

TEST_CASE("grid json validation errors") {
  CHECK_THROWS_AS(grid_from_json_text("{not json"), ConfigError);
  CHECK_THROWS_AS(grid_from_json_text("{}"), ConfigError);
  CHECK_THROWS_AS(grid_from_json_text(R"({
    "sweep": {"axis": "x", "values": [10], "fixed_L": 8},
    "model": {"M": 2, "K": 2, "b_range": [0, 0.1]}
  })"),
                  ConfigError);
  CHECK_THROWS_AS(grid_from_json_text(R"({
    "sweep": {"axis": "n", "values": [10], "fixed_L": 8},
    "model": {"M": 2, "K": 2, "b_range": [0, 0.1]},
    "algorithms": ["nonsense"]
  })"),
                  ConfigError);
  // model template without n/L validates against the sweep values
  CHECK_NOTHROW(grid_from_json_text(R"({
    "sweep": {"axis": "n", "values": [10, 20], "fixed_L": 8},
    "model": {"M": 2, "K": 2, "b_range": [-0.1, 0.1]}
  })"));
}

TEST_CASE("plot writes scrapeable SVG and rejects empty data") {
  TempDir dir("dimple_bench_plot_test");
  std::vector<SummaryRow> rows;
  for (int i = 0; i < 3; ++i) {
    SummaryRow s;
    s.algorithm = "tensor";
    s.n = 100 + 50 * i;
    s.L = 40;
    s.replications = 2;
    s.mean_r_bl = 0.4 - 0.1 * i;
    rows.push_back(s);
    s.algorithm = "baseline";
    s.mean_r_bl = 0.5 - 0.05 * i;
    rows.push_back(s);
  }
  const std::string path = (dir.path / "plot.svg").string();
  write_svg_plot(rows, 'n', path);
  const auto points = scrape_svg_points(path);
  REQUIRE(points.size() == 6);
  // document order: tensor series first, then baseline
  CHECK(points[0].first == 100.0);
  CHECK(points[0].second == doctest::Approx(0.4));
  CHECK(points[3].first == 100.0);
  CHECK(points[3].second == doctest::Approx(0.5));
  const std::string svg = slurp(path);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);  // baseline dashed

  CHECK_THROWS_AS(write_svg_plot({}, 'n', (dir.path / "none.svg").string()),
                  std::runtime_error);
  CHECK(!fs::exists(dir.path / "none.svg"));

  // single point: no polyline, still a valid scrapeable SVG
  write_svg_plot({rows[0]}, 'n', (dir.path / "single.svg").string());
  CHECK(scrape_svg_points((dir.path / "single.svg").string()).size() == 1);
  CHECK(slurp(dir.path / "single.svg").find("<polyline") == std::string::npos);
}

#ifdef DIMPLE_CLI_PATH
TEST_CASE("cli exit codes and artifacts") {
  TempDir dir("dimple_bench_cli_test");
  const std::string cli = DIMPLE_CLI_PATH;
  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > " + (dir.path / "out.log").string() +
                            " 2> " + (dir.path / "err.log").string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };

  // config error paths
  CHECK(run("bench --config /nonexistent.json") == 2);
  {
    std::ofstream os(dir.path / "bad.json");
    os << "{broken";
  }
  CHECK(run("bench --config " + (dir.path / "bad.json").string()) == 2);
  CHECK(run("frobnicate") == 2);

  // generate -> cluster round trip
  {
    std::ofstream os(dir.path / "model.json");
    os << R"({"n": 40, "L": 20, "M": 2, "K": 2, "b_range": [-0.3, 0.3], "seed": 5})";
  }
  CHECK(run("generate --config " + (dir.path / "model.json").string() + " --out " +
            (dir.path / "gen").string() + " --dump-p") == 0);
  CHECK(fs::exists(dir.path / "gen" / "adjacency.smt1"));
  CHECK(fs::exists(dir.path / "gen" / "labels.csv"));
  CHECK(fs::exists(dir.path / "gen" / "p.bin"));

  CHECK(run("cluster --in " + (dir.path / "gen" / "adjacency.smt1").string() +
            " --algo tensor --M 2 --K 2 --out " + (dir.path / "labels_t.csv").string() +
            " --dump-factors " + (dir.path / "fac").string()) == 0);
  CHECK(fs::exists(dir.path / "labels_t.csv"));
  CHECK(fs::exists(dir.path / "fac_U.csv"));
  CHECK(fs::exists(dir.path / "fac_W.csv"));

  CHECK(run("cluster --in " + (dir.path / "gen" / "adjacency.smt1").string() +
            " --algo baseline --M 2 --K 2 --out " +
            (dir.path / "labels_b.csv").string()) == 0);

  // bench + plot round trip
  {
    std::ofstream os(dir.path / "grid.json");
    os << grid_json(dir.path / "bench_out", 2);
  }
  CHECK(run("bench --config " + (dir.path / "grid.json").string() + " --threads 2") == 0);

  // a degenerate model produces error rows and exit code 1
  {
    std::ofstream os(dir.path / "grid_zero.json");
    os << R"({
      "sweep": {"axis": "L", "values": [12], "fixed_n": 20},
      "model": {"M": 2, "K": 2, "b_range": [0, 0]},
      "algorithms": ["tensor"],
      "replications": 1,
      "base_seed": 1,
      "output_dir": ")"
       << (dir.path / "bench_zero").string() << R"("
    })";
  }
  CHECK(run("bench --config " + (dir.path / "grid_zero.json").string()) == 1);
  // the error rows carry the degenerate-input message
  {
    const std::string results = slurp(dir.path / "bench_zero" / "results.csv");
    CHECK(results.find("rank-deficient") != std::string::npos);
  }

  // --paper switches to 100 replications
  {
    std::ofstream os(dir.path / "grid_paper.json");
    os << R"({
      "sweep": {"axis": "L", "values": [10], "fixed_n": 16},
      "model": {"M": 2, "K": 2, "b_range": [-0.4, 0.4]},
      "algorithms": ["baseline"],
      "replications": 2,
      "base_seed": 3,
      "output_dir": ")"
       << (dir.path / "bench_paper").string() << R"("
    })";
  }
  CHECK(run("bench --config " + (dir.path / "grid_paper.json").string() + " --paper") == 0);
  const auto paper_summary =
      load_summary_csv((dir.path / "bench_paper" / "summary.csv").string());
  REQUIRE(paper_summary.size() == 1);
  CHECK(paper_summary[0].replications == 100);
  CHECK(run("plot --summary " + (dir.path / "bench_out" / "summary.csv").string() +
            " --out " + (dir.path / "plots").string()) == 0);
  CHECK(fs::exists(dir.path / "plots" / "rbl_vs_L.svg"));
}
#endif
